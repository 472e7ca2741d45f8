#pragma once

#include "qbell/box.hpp"
#include "qbell/graph.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace qbell {

// Cyclic sequence of event sets; saturated[i] refers to the pair (i, i+1 mod n).
struct ChainedSequence {
    std::vector<std::vector<std::size_t>> elements;
    std::vector<bool> saturated;

    std::size_t length() const { return elements.size(); }
    int unsaturated_count() const {
        return int(std::count(saturated.begin(), saturated.end(), false));
    }
    bool composite() const {
        return std::any_of(elements.begin(), elements.end(), [](const auto& e) { return e.size() > 1; });
    }
    bool operator==(const ChainedSequence&) const = default;
};

template <class T>
std::vector<T> element_sums(const ChainedSequence& ch, const Box<T>& box) {
    std::vector<T> out;
    out.reserve(ch.length());
    for (const auto& el : ch.elements) {
        T s(0);
        for (auto e : el) s += box[e];
        out.push_back(s);
    }
    return out;
}

// Adjacent elements orthogonal across all sub-events, and sub-events of one element mutually orthogonal.
inline bool chain_orthogonal(const ChainedSequence& ch, const OrthogonalityGraph& g) {
    const std::size_t n = ch.length();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& el = ch.elements[i];
        if (el.empty()) return false;
        for (std::size_t u = 0; u < el.size(); ++u)
            for (std::size_t v = u + 1; v < el.size(); ++v)
                if (!g.adjacent(el[u], el[v])) return false;
        for (auto u : el)
            for (auto v : ch.elements[(i + 1) % n])
                if (!g.adjacent(u, v)) return false;
    }
    return true;
}

template <class T>
void derive_saturation(ChainedSequence& ch, const Box<T>& box, double tol = 1e-12) {
    auto s = element_sums(ch, box);
    const std::size_t n = ch.length();
    ch.saturated.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) ch.saturated[i] = approx_equal<T>(T(s[i] + s[(i + 1) % n]), T(1), tol);
}

template <class T>
bool chain_consistent(const ChainedSequence& ch, const Box<T>& box, const OrthogonalityGraph& g, double tol = 1e-12) {
    if (!chain_orthogonal(ch, g) || ch.saturated.size() != ch.length()) return false;
    auto s = element_sums(ch, box);
    const std::size_t n = ch.length();
    for (std::size_t i = 0; i < n; ++i) {
        T pair = s[i] + s[(i + 1) % n];
        bool sat = approx_equal<T>(pair, T(1), tol);
        if (sat != bool(ch.saturated[i])) return false;
    }
    return true;
}

inline ChainedSequence map_chain(const ChainedSequence& ch, const BellScenario& s, const Relabeling& r) {
    ChainedSequence out = ch;
    for (auto& el : out.elements)
        for (auto& e : el) e = r.map_event(s, e);
    return out;
}

// Exchanges Alice and Bob. Not a relabeling, but it maps PR^(k) to itself.
inline ChainedSequence swap_parties(const ChainedSequence& ch, const BellScenario& s) {
    if (s.ma != s.mb || s.ka != s.kb) throw std::invalid_argument("party swap needs a symmetric scenario");
    ChainedSequence out = ch;
    for (auto& el : out.elements)
        for (auto& e : el) {
            auto ev = EventIndex::from_flat(s, e);
            e = s.index(ev.y, ev.x, ev.b, ev.a);
        }
    return out;
}

// Rotations and reflections of the cyclic order (the saturation flags are recomputed by callers).
inline std::vector<ChainedSequence> dihedral_variants(const ChainedSequence& ch) {
    std::vector<ChainedSequence> out;
    const std::size_t n = ch.length();
    for (int refl = 0; refl < 2; ++refl)
        for (std::size_t shift = 0; shift < n; ++shift) {
            ChainedSequence v;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = refl ? (shift + n - i) % n : (shift + i) % n;
                v.elements.push_back(ch.elements[j]);
            }
            out.push_back(std::move(v));
        }
    return out;
}

// The five-element chain around PR^(k): p2 and p4 are (k-1)x(k-1) blocks, the rest single events.
inline ChainedSequence canonical_pr_chain(int k) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    BellScenario s(2, 2, k, k);
    ChainedSequence ch;
    ch.elements.push_back({s.index(0, 0, k - 1, k - 1)});
    std::vector<std::size_t> p2, p4;
    for (int a = 0; a <= k - 2; ++a)
        for (int b = 0; b <= k - 2; ++b) p2.push_back(s.index(0, 0, a, b));
    for (int a = 0; a < k; ++a) {
        if (a == k - 2) continue;
        for (int b = 0; b <= k - 2; ++b) p4.push_back(s.index(1, 1, a, b));
    }
    ch.elements.push_back(p2);
    ch.elements.push_back({s.index(0, 1, k - 1, k - 1)});
    ch.elements.push_back(p4);
    ch.elements.push_back({s.index(1, 0, k - 2, k - 2)});
    return ch;
}

// (2,2,2) chain with p2 = {(00|00), (01|00)}, the composite element used for four-dimensional faces.
inline ChainedSequence canonical_composite_chain_222() {
    BellScenario s(2, 2, 2, 2);
    ChainedSequence ch;
    ch.elements = {{s.index(0, 0, 1, 1)},
                   {s.index(0, 0, 0, 0), s.index(0, 0, 0, 1)},
                   {s.index(0, 1, 1, 1)},
                   {s.index(1, 1, 1, 0)},
                   {s.index(1, 0, 0, 0)}};
    return ch;
}

inline std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

inline std::vector<std::size_t> support_of_pr(int k) {
    BellScenario s(2, 2, k, k);
    std::vector<std::size_t> out;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < k; ++a) out.push_back(s.index(x, y, a, (a + x * y) % k));
    std::sort(out.begin(), out.end());
    return out;
}

// Relabelings r of the (2,2,k) scenario that send the support of PR^(k) into `allowed`.
// Alice's maps are enumerated, Bob's are matched per input by backtracking.
inline std::vector<Relabeling> relabelings_into_support(int k, const std::vector<bool>& allowed,
                                                        std::size_t limit = SIZE_MAX) {
    BellScenario s(2, 2, k, k);
    auto perms = all_permutations(k);
    std::vector<Relabeling> out;
    for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb)
            for (const auto& s0 : perms)
                for (const auto& s1 : perms) {
                    Relabeling r;
                    r.alice_inputs = sa ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
                    r.bob_inputs = sb ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
                    r.alice_outputs = {s0, s1};
                    std::vector<std::vector<std::vector<int>>> options(2);
                    bool ok = true;
                    for (int y = 0; y < 2 && ok; ++y) {
                        // candidates[b] = images of b compatible with both Alice inputs
                        std::vector<std::vector<int>> cand(k);
                        for (int b = 0; b < k && ok; ++b) {
                            for (int bb = 0; bb < k; ++bb) {
                                bool good = true;
                                for (int x = 0; x < 2 && good; ++x) {
                                    int a = ((b - x * y) % k + k) % k;
                                    auto e = s.index(r.alice_inputs[x], r.bob_inputs[y], r.alice_outputs[x][a], bb);
                                    good = allowed[e];
                                }
                                if (good) cand[b].push_back(bb);
                            }
                            if (cand[b].empty()) ok = false;
                        }
                        if (!ok) break;
                        std::vector<int> cur(k, -1);
                        std::vector<bool> used(k, false);
                        std::function<void(int)> rec = [&](int b) {
                            if (b == k) {
                                options[y].push_back(cur);
                                return;
                            }
                            for (int bb : cand[b]) {
                                if (used[bb]) continue;
                                used[bb] = true;
                                cur[b] = bb;
                                rec(b + 1);
                                used[bb] = false;
                            }
                        };
                        rec(0);
                        if (options[y].empty()) ok = false;
                    }
                    if (!ok) continue;
                    for (const auto& b0 : options[0])
                        for (const auto& b1 : options[1]) {
                            r.bob_outputs = {b0, b1};
                            out.push_back(r);
                            if (out.size() >= limit) return out;
                        }
                }
    return out;
}

// Relabelings fixing PR^(k).
inline std::vector<Relabeling> pr_stabilizer(int k) {
    BellScenario s(2, 2, k, k);
    std::vector<bool> allowed(s.events(), false);
    for (auto e : support_of_pr(k)) allowed[e] = true;
    return relabelings_into_support(k, allowed);
}

// Exhaustive DFS over cycles of distinct single events, in flat-index order, starting from the smallest event.
template <class T>
std::optional<ChainedSequence> search_singleton_cycle(const Box<T>& box, const OrthogonalityGraph& g, std::size_t length,
                                                      int unsaturated, double tol, std::size_t node_cap) {
    const std::size_t n = box.size();
    std::vector<std::size_t> path;
    std::vector<bool> used(n, false);
    std::size_t nodes = 0;
    std::optional<ChainedSequence> found;
    auto sat = [&](std::size_t u, std::size_t v) { return approx_equal<T>(T(box[u] + box[v]), T(1), tol); };
    std::function<bool(int)> rec = [&](int unsat_so_far) -> bool {
        if (++nodes > node_cap) throw std::length_error("chain search cap exceeded");
        if (path.size() == length) {
            auto first = path.front(), last = path.back();
            if (!g.adjacent(first, last)) return false;
            int total = unsat_so_far + (sat(last, first) ? 0 : 1);
            if (total != unsaturated) return false;
            ChainedSequence ch;
            for (auto e : path) ch.elements.push_back({e});
            derive_saturation(ch, box, tol);
            found = ch;
            return true;
        }
        for (std::size_t v = path.front() + 1; v < n; ++v) {
            if (used[v] || !g.adjacent(path.back(), v)) continue;
            int u = unsat_so_far + (sat(path.back(), v) ? 0 : 1);
            if (u > unsaturated) continue;
            used[v] = true;
            path.push_back(v);
            if (rec(u)) return true;
            path.pop_back();
            used[v] = false;
        }
        return false;
    };
    for (std::size_t start = 0; start < n; ++start) {
        path = {start};
        used.assign(n, false);
        used[start] = true;
        if (rec(0)) return found;
    }
    return std::nullopt;
}

struct ChainMode {
    enum class Kind { saturated, unsaturated, composite } kind = Kind::saturated;
    int unsaturated = 0;  // for composite, -1 accepts any count
    static ChainMode saturated_mode() { return {Kind::saturated, 0}; }
    static ChainMode unsaturated_mode(int n) { return {Kind::unsaturated, n}; }
    static ChainMode composite_mode(int n = -1) { return {Kind::composite, n}; }
};

// Composite mode tries the canonical composite chains of the (2,2,k) scenario under every relabeling
// (input swaps times per-input output permutations), identity first, and keeps the first image whose
// elements all carry positive mass and whose derived unsaturation count matches.
template <class T>
std::optional<ChainedSequence> find_chained_sequence(const Box<T>& box, std::size_t length, ChainMode mode,
                                                     double tol = 1e-12, std::size_t node_cap = 50'000'000) {
    if (length < 3) throw std::invalid_argument("chain length must be >= 3");
    OrthogonalityGraph g(box.scenario);
    if (mode.kind != ChainMode::Kind::composite)
        return search_singleton_cycle(box, g, length,
                                      mode.kind == ChainMode::Kind::saturated ? 0 : mode.unsaturated, tol, node_cap);
    const auto& s = box.scenario;
    if (s.ma != 2 || s.mb != 2 || s.ka != s.kb || length != 5) return std::nullopt;
    const int k = s.ka;
    if (k > 4) throw std::length_error("composite relabeling search is limited to k <= 4");
    std::vector<ChainedSequence> bases;
    if (k == 2) bases.push_back(canonical_composite_chain_222());
    bases.push_back(canonical_pr_chain(k));
    std::vector<bool> all(s.events(), true);
    auto rels = relabelings_into_support(k, all);
    auto id = Relabeling::identity(s);
    std::stable_partition(rels.begin(), rels.end(), [&](const Relabeling& r) { return r == id; });
    for (const auto& base : bases)
        for (const auto& r : rels) {
            auto ch = map_chain(base, s, r);
            auto sums = element_sums(ch, box);
            if (std::any_of(sums.begin(), sums.end(), [&](const T& v) { return !is_positive<T>(v, tol); })) continue;
            derive_saturation(ch, box, tol);
            if (mode.unsaturated >= 0 && ch.unsaturated_count() != mode.unsaturated) continue;
            return ch;
        }
    return std::nullopt;
}

}  // namespace qbell
