#pragma once

#include "qbell/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

struct BellScenario {
    int ma = 2, mb = 2, ka = 2, kb = 2;

    BellScenario() = default;
    BellScenario(int ma_, int mb_, int ka_, int kb_) : ma(ma_), mb(mb_), ka(ka_), kb(kb_) { validate(); }

    void validate() const {
        if (ma < 2 || mb < 2 || ka < 2 || kb < 2)
            throw std::invalid_argument("scenario fields must all be >= 2");
    }
    std::size_t events() const { return std::size_t(ma) * mb * ka * kb; }
    std::size_t index(int x, int y, int a, int b) const {
        return ((std::size_t(x) * mb + y) * ka + a) * kb + b;
    }
    bool binary() const { return ka == 2 && kb == 2; }
    bool operator==(const BellScenario&) const = default;
};

struct EventIndex {
    int x = 0, y = 0, a = 0, b = 0;
    std::size_t flat = 0;

    static EventIndex from_flat(const BellScenario& s, std::size_t flat) {
        if (flat >= s.events()) throw std::out_of_range("event index out of range");
        EventIndex e;
        e.flat = flat;
        e.b = int(flat % s.kb);
        flat /= s.kb;
        e.a = int(flat % s.ka);
        flat /= s.ka;
        e.y = int(flat % s.mb);
        e.x = int(flat / s.mb);
        return e;
    }
    static EventIndex make(const BellScenario& s, int x, int y, int a, int b) {
        if (x < 0 || x >= s.ma || y < 0 || y >= s.mb || a < 0 || a >= s.ka || b < 0 || b >= s.kb)
            throw std::out_of_range("event coordinates out of range");
        return EventIndex{x, y, a, b, s.index(x, y, a, b)};
    }
    // "(ab|xy)" with single-digit outputs, as used in the tables.
    std::string label() const {
        return "(" + std::to_string(a) + "," + std::to_string(b) + "|" + std::to_string(x) + "," +
               std::to_string(y) + ")";
    }
};

// Same input of one party, different output.
inline bool locally_orthogonal(const EventIndex& u, const EventIndex& v) {
    return (u.x == v.x && u.a != v.a) || (u.y == v.y && u.b != v.b);
}

template <class T>
struct Box {
    BellScenario scenario;
    std::vector<T> probs;

    Box() = default;
    Box(BellScenario s, std::vector<T> p) : scenario(s), probs(std::move(p)) {
        scenario.validate();
        if (probs.size() != scenario.events())
            throw std::invalid_argument("probability vector length " + std::to_string(probs.size()) +
                                        " does not match scenario event count " +
                                        std::to_string(scenario.events()));
    }
    static Box zeros(const BellScenario& s) { return Box(s, std::vector<T>(s.events(), T(0))); }

    const T& operator()(int a, int b, int x, int y) const { return probs[scenario.index(x, y, a, b)]; }
    T& operator()(int a, int b, int x, int y) { return probs[scenario.index(x, y, a, b)]; }
    const T& operator[](std::size_t i) const { return probs[i]; }
    T& operator[](std::size_t i) { return probs[i]; }
    std::size_t size() const { return probs.size(); }

    bool operator==(const Box& o) const { return scenario == o.scenario && probs == o.probs; }

    template <class U>
    Box<U> convert() const {
        std::vector<U> out;
        out.reserve(probs.size());
        for (const auto& p : probs) {
            if constexpr (std::is_same_v<U, double>)
                out.push_back(to_double(p));
            else
                out.push_back(from_double<U>(to_double(p)));
        }
        return Box<U>(scenario, std::move(out));
    }
};

// Non-negativity and per-setting normalization.
template <class T>
void check_box(const Box<T>& box, double tol = 1e-12) {
    const auto& s = box.scenario;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (is_negative<T>(box[i], tol)) throw std::invalid_argument("negative probability at event " + std::to_string(i));
    for (int x = 0; x < s.ma; ++x)
        for (int y = 0; y < s.mb; ++y) {
            T sum(0);
            for (int a = 0; a < s.ka; ++a)
                for (int b = 0; b < s.kb; ++b) sum += box(a, b, x, y);
            if (!approx_equal<T>(sum, T(1), tol))
                throw std::invalid_argument("setting (" + std::to_string(x) + "," + std::to_string(y) +
                                            ") does not sum to 1");
        }
}

struct SignalingViolation {
    // Bob's marginal depends on Alice's input (x1 vs x2 at fixed y), or the mirror case.
    enum class Party { alice_input, bob_input } varying;
    int outcome;   // b for alice_input, a for bob_input
    int input1;    // the two values of the varying remote input
    int input2;
    int fixed_input;
    double difference;
};

struct NoSignalingReport {
    bool ok = true;
    std::vector<SignalingViolation> violations;
};

template <class T>
NoSignalingReport validate_no_signaling(const Box<T>& box, double tol = 1e-12) {
    const auto& s = box.scenario;
    if (box.probs.size() != s.events()) throw std::invalid_argument("probs length does not match scenario");
    NoSignalingReport rep;
    // Bob's marginal P(b|x,y) must not depend on x.
    for (int y = 0; y < s.mb; ++y)
        for (int b = 0; b < s.kb; ++b) {
            std::vector<T> marg(s.ma, T(0));
            for (int x = 0; x < s.ma; ++x)
                for (int a = 0; a < s.ka; ++a) marg[x] += box(a, b, x, y);
            for (int x1 = 0; x1 < s.ma; ++x1)
                for (int x2 = x1 + 1; x2 < s.ma; ++x2)
                    if (!approx_equal<T>(marg[x1], marg[x2], tol))
                        rep.violations.push_back({SignalingViolation::Party::alice_input, b, x1, x2, y,
                                                  to_double(T(marg[x1] - marg[x2]))});
        }
    for (int x = 0; x < s.ma; ++x)
        for (int a = 0; a < s.ka; ++a) {
            std::vector<T> marg(s.mb, T(0));
            for (int y = 0; y < s.mb; ++y)
                for (int b = 0; b < s.kb; ++b) marg[y] += box(a, b, x, y);
            for (int y1 = 0; y1 < s.mb; ++y1)
                for (int y2 = y1 + 1; y2 < s.mb; ++y2)
                    if (!approx_equal<T>(marg[y1], marg[y2], tol))
                        rep.violations.push_back({SignalingViolation::Party::bob_input, a, y1, y2, x,
                                                  to_double(T(marg[y1] - marg[y2]))});
        }
    rep.ok = rep.violations.empty();
    return rep;
}

struct DeterministicStrategy {
    std::vector<int> alice;  // output per Alice input
    std::vector<int> bob;
};

template <class T>
Box<T> deterministic_box(const BellScenario& s, const DeterministicStrategy& d) {
    if (int(d.alice.size()) != s.ma || int(d.bob.size()) != s.mb)
        throw std::invalid_argument("strategy size does not match scenario");
    auto box = Box<T>::zeros(s);
    for (int x = 0; x < s.ma; ++x)
        for (int y = 0; y < s.mb; ++y) box(d.alice[x], d.bob[y], x, y) = T(1);
    return box;
}

inline constexpr double kDefaultEnumerationCap = 1e6;

// Alice's assignment is the more significant digit string; input 0 is the most significant digit.
inline std::vector<DeterministicStrategy> enumerate_deterministic_strategies(const BellScenario& s,
                                                                           double cap = kDefaultEnumerationCap) {
    double count = std::pow(double(s.ka), s.ma) * std::pow(double(s.kb), s.mb);
    if (count > cap) throw std::length_error("deterministic enumeration exceeds cap");
    std::vector<DeterministicStrategy> out;
    out.reserve(std::size_t(count));
    std::vector<int> a(s.ma, 0);
    auto next = [](std::vector<int>& v, int k) {
        for (int i = int(v.size()) - 1; i >= 0; --i) {
            if (++v[i] < k) return true;
            v[i] = 0;
        }
        return false;
    };
    do {
        std::vector<int> b(s.mb, 0);
        do out.push_back({a, b});
        while (next(b, s.kb));
    } while (next(a, s.ka));
    return out;
}

template <class T>
std::vector<Box<T>> enumerate_local_deterministic(const BellScenario& s, double cap = kDefaultEnumerationCap) {
    std::vector<Box<T>> out;
    for (const auto& d : enumerate_deterministic_strategies(s, cap)) out.push_back(deterministic_box<T>(s, d));
    return out;
}

template <class T>
Box<T> pr_box(int k) {
    if (k < 2) throw std::invalid_argument("pr_box requires k >= 2");
    BellScenario s(2, 2, k, k);
    auto box = Box<T>::zeros(s);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < k; ++a) box(a, (a + x * y) % k, x, y) = T(1) / T(k);
    return box;
}

template <class T>
Box<T> uniform_box(const BellScenario& s) {
    return Box<T>(s, std::vector<T>(s.events(), T(1) / T(s.ka * s.kb)));
}

inline bool is_permutation_of_range(const std::vector<int>& p, int n) {
    if (int(p.size()) != n) return false;
    std::vector<bool> seen(n, false);
    for (int v : p) {
        if (v < 0 || v >= n || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

// Event (a,b|x,y) is sent to (alice_outputs[x][a], bob_outputs[y][b] | alice_inputs[x], bob_inputs[y]).
struct Relabeling {
    std::vector<int> alice_inputs, bob_inputs;
    std::vector<std::vector<int>> alice_outputs, bob_outputs;

    static Relabeling identity(const BellScenario& s) {
        Relabeling r;
        r.alice_inputs.resize(s.ma);
        r.bob_inputs.resize(s.mb);
        std::iota(r.alice_inputs.begin(), r.alice_inputs.end(), 0);
        std::iota(r.bob_inputs.begin(), r.bob_inputs.end(), 0);
        std::vector<int> ida(s.ka), idb(s.kb);
        std::iota(ida.begin(), ida.end(), 0);
        std::iota(idb.begin(), idb.end(), 0);
        r.alice_outputs.assign(s.ma, ida);
        r.bob_outputs.assign(s.mb, idb);
        return r;
    }

    void validate(const BellScenario& s) const {
        bool ok = is_permutation_of_range(alice_inputs, s.ma) && is_permutation_of_range(bob_inputs, s.mb) &&
                  int(alice_outputs.size()) == s.ma && int(bob_outputs.size()) == s.mb;
        if (ok) {
            for (const auto& p : alice_outputs) ok = ok && is_permutation_of_range(p, s.ka);
            for (const auto& p : bob_outputs) ok = ok && is_permutation_of_range(p, s.kb);
        }
        if (!ok) throw std::invalid_argument("relabeling does not match scenario");
    }

    std::size_t map_event(const BellScenario& s, std::size_t flat) const {
        auto e = EventIndex::from_flat(s, flat);
        return s.index(alice_inputs[e.x], bob_inputs[e.y], alice_outputs[e.x][e.a], bob_outputs[e.y][e.b]);
    }

    // Apply *this first, then next.
    Relabeling then(const Relabeling& next) const {
        Relabeling r;
        int ma = int(alice_inputs.size()), mb = int(bob_inputs.size());
        r.alice_inputs.resize(ma);
        r.bob_inputs.resize(mb);
        r.alice_outputs.resize(ma);
        r.bob_outputs.resize(mb);
        for (int x = 0; x < ma; ++x) {
            int x1 = alice_inputs[x];
            r.alice_inputs[x] = next.alice_inputs[x1];
            for (int a : alice_outputs[x]) r.alice_outputs[x].push_back(next.alice_outputs[x1][a]);
        }
        for (int y = 0; y < mb; ++y) {
            int y1 = bob_inputs[y];
            r.bob_inputs[y] = next.bob_inputs[y1];
            for (int b : bob_outputs[y]) r.bob_outputs[y].push_back(next.bob_outputs[y1][b]);
        }
        return r;
    }

    Relabeling inverse() const {
        Relabeling r;
        int ma = int(alice_inputs.size()), mb = int(bob_inputs.size());
        r.alice_inputs.resize(ma);
        r.bob_inputs.resize(mb);
        r.alice_outputs.resize(ma);
        r.bob_outputs.resize(mb);
        for (int x = 0; x < ma; ++x) {
            int x1 = alice_inputs[x];
            r.alice_inputs[x1] = x;
            r.alice_outputs[x1].resize(alice_outputs[x].size());
            for (int a = 0; a < int(alice_outputs[x].size()); ++a) r.alice_outputs[x1][alice_outputs[x][a]] = a;
        }
        for (int y = 0; y < mb; ++y) {
            int y1 = bob_inputs[y];
            r.bob_inputs[y1] = y;
            r.bob_outputs[y1].resize(bob_outputs[y].size());
            for (int b = 0; b < int(bob_outputs[y].size()); ++b) r.bob_outputs[y1][bob_outputs[y][b]] = b;
        }
        return r;
    }

    bool operator==(const Relabeling&) const = default;
};

template <class T>
Box<T> apply_relabeling(const Box<T>& box, const Relabeling& rel) {
    rel.validate(box.scenario);
    auto out = Box<T>::zeros(box.scenario);
    for (std::size_t i = 0; i < box.size(); ++i) out[rel.map_event(box.scenario, i)] = box[i];
    return out;
}

template <class T>
Box<T> mix(const std::vector<Box<T>>& boxes, const std::vector<T>& weights, double tol = 1e-12) {
    if (boxes.empty()) throw std::invalid_argument("mix of an empty list");
    if (boxes.size() != weights.size()) throw std::invalid_argument("mix: boxes and weights differ in length");
    T total(0);
    for (const auto& w : weights) {
        if (is_negative<T>(w, tol)) throw std::invalid_argument("mix: negative weight");
        total += w;
    }
    if (!approx_equal<T>(total, T(1), tol)) throw std::invalid_argument("mix: weights do not sum to 1");
    auto out = Box<T>::zeros(boxes.front().scenario);
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (!(boxes[j].scenario == out.scenario)) throw std::invalid_argument("mix: scenario mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[j] * boxes[j][i];
    }
    return out;
}

template <class T>
struct CorrelatorTable {
    int ma = 0, mb = 0;
    std::vector<T> values;  // row-major, ma x mb

    CorrelatorTable() = default;
    CorrelatorTable(int ma_, int mb_) : ma(ma_), mb(mb_), values(std::size_t(ma_) * mb_, T(0)) {}
    T& operator()(int x, int y) { return values[std::size_t(x) * mb + y]; }
    const T& operator()(int x, int y) const { return values[std::size_t(x) * mb + y]; }
    bool operator==(const CorrelatorTable&) const = default;
};

template <class T>
CorrelatorTable<T> correlators_of(const Box<T>& box) {
    const auto& s = box.scenario;
    if (!s.binary()) throw std::invalid_argument("correlators need binary outcomes");
    CorrelatorTable<T> E(s.ma, s.mb);
    for (int x = 0; x < s.ma; ++x)
        for (int y = 0; y < s.mb; ++y)
            E(x, y) = box(0, 0, x, y) + box(1, 1, x, y) - box(0, 1, x, y) - box(1, 0, x, y);
    return E;
}

template <class T>
Box<T> box_of_correlators(const CorrelatorTable<T>& E, double tol = 1e-12) {
    BellScenario s(E.ma, E.mb, 2, 2);
    auto box = Box<T>::zeros(s);
    for (int x = 0; x < s.ma; ++x)
        for (int y = 0; y < s.mb; ++y) {
            const T& e = E(x, y);
            if (is_positive<T>(T(abs_value<T>(e) - T(1)), tol)) throw std::invalid_argument("|E| > 1");
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) box(a, b, x, y) = (a == b ? T(T(1) + e) : T(T(1) - e)) / T(4);
        }
    return box;
}

}  // namespace qbell
