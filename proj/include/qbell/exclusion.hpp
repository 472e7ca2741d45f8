#pragma once

#include "qbell/certificate.hpp"
#include "qbell/chain.hpp"
#include "qbell/faces.hpp"
#include "qbell/templates.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qbell {

template <class T>
CertificateMatrix<T> convert_certificate(const CertificateMatrix<Rational>& m) {
    if constexpr (is_exact_v<T>) {
        return m;
    } else {
        Matrix<double> e(m.entries.rows, m.entries.cols);
        for (std::size_t i = 0; i < e.data.size(); ++i) e.data[i] = m.entries.data[i].get_d();
        return CertificateMatrix<double>(m.events, e);
    }
}

// Cycle A(00|00) D(11|01) H(10|11) E(00|10) B(11|00) C(00|01) G(01|11) F(11|10) around PR(2).
inline ChainedSequence canonical_octagon_222() {
    BellScenario s(2, 2, 2, 2);
    ChainedSequence ch;
    ch.elements = {{s.index(0, 0, 0, 0)}, {s.index(0, 1, 1, 1)}, {s.index(1, 1, 1, 0)}, {s.index(1, 0, 0, 0)},
                   {s.index(0, 0, 1, 1)}, {s.index(0, 1, 0, 0)}, {s.index(1, 1, 0, 1)}, {s.index(1, 0, 1, 1)}};
    return ch;
}

struct AnalyticOptions {
    Rational epsilon = Rational(1, 10);
    bool use_octagon = true;
    // Second stage: chains assembled from saturated pairs found directly in the box.
    bool support_search = true;
    // Skip free-element subsets larger than this many events.
    std::size_t max_free_events = 12;
    // Third stage: chains with a single saturated pair.
    bool single_pair_search = true;
    std::size_t single_pair_subset_cap = 6;
    std::size_t single_pair_budget = 5000;
    double tol = 1e-12;
};

template <class T>
struct AnalyticReport {
    bool excluded = false;
    std::optional<Template> tmpl;
    T value = T(0);
    std::optional<T> closed_form;
    TemplateParams params;
    std::optional<ChainedSequence> chain;
    std::optional<CertificateMatrix<Rational>> certificate;
    std::vector<T> element_sums;
    std::size_t pr_candidates = 0;
    // "canonical" for the PR-oriented chain families, "support" for saturated runs found in the box,
    // "single-pair" for chains with one saturated pair.
    std::string stage;
    std::string note;
};

// Precomputed chain orientations around the canonical PR^(k); immutable after construction.
class AnalyticExcluder {
public:
    static constexpr int kMaxCanonicalK = 4;

    explicit AnalyticExcluder(int k, AnalyticOptions opt = {}) : k_(k), opt_(opt), scenario_(2, 2, k, k), graph_(scenario_) {
        if (k < 2) throw std::invalid_argument("k must be >= 2");
        templates_ = k == 2 ? std::vector<Template>{Template::m0, Template::m1, Template::m21, Template::m22, Template::m22c,
                                                    Template::m3}
                            : std::vector<Template>{Template::m0, Template::m1_k, Template::m21_k, Template::m22_k,
                                                    Template::m22c_k, Template::m31_k, Template::m32_k};
        // The relabeling search behind the canonical families is only affordable up to k = 4.
        if (k > kMaxCanonicalK) return;
        stabilizer_ = pr_stabilizer(k);
        std::set<std::vector<std::vector<std::size_t>>> seen;
        auto add = [&](const ChainedSequence& base, std::vector<ChainedSequence>& into) {
            for (const auto& b : {base, swap_parties(base, scenario_)})
                for (const auto& r : stabilizer_)
                    for (auto& v : dihedral_variants(map_chain(b, scenario_, r))) {
                        if (!seen.insert(v.elements).second) continue;
                        into.push_back(v);
                    }
        };
        if (k == 2) {
            auto pr = pr_box<Rational>(2);
            std::vector<bool> allowed(pr.size(), false);
            for (auto e : support_of_pr(2)) allowed[e] = true;
            for (auto& c : support_cycles(allowed, 5)) add(c, chains5_);
            add(canonical_composite_chain_222(), chains5_);
            add(canonical_octagon_222(), chains8_);
        } else {
            add(canonical_pr_chain(k), chains5_);
        }
        // Support feasibility depends only on the nonzero pattern, which relabelings preserve.
        TemplateParams probe;
        probe.k = k;
        probe.c_ns = Rational(1, 2);
        probe.g = Rational(1, 2);
        probe.big = Rational(1);
        for (auto t : templates_) {
            auto& ok = support_ok_[t];
            for (const auto& ch : chains5_)
                ok.push_back(check_certificate(build_certificate(t, probe, ch), graph_).support_ok);
        }
        for (const auto& ch : chains8_)
            support_ok_[Template::octagon].push_back(
                check_certificate(build_certificate(Template::octagon, probe, ch), graph_).support_ok);
    }

    int k() const { return k_; }
    const std::vector<ChainedSequence>& chains5() const { return chains5_; }
    const std::vector<ChainedSequence>& chains8() const { return chains8_; }
    const std::vector<Relabeling>& stabilizer() const { return stabilizer_; }

    // PR^(k) copies whose support lies inside the box's support, one relabeling per distinct copy.
    template <class T>
    std::vector<Relabeling> pr_copies(const Box<T>& box) const {
        std::vector<bool> allowed(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) allowed[i] = is_positive<T>(box[i], opt_.tol);
        std::vector<Relabeling> out;
        std::set<std::vector<std::size_t>> seen;
        for (auto& r : relabelings_into_support(k_, allowed)) {
            std::vector<std::size_t> sup;
            for (auto e : support_of_pr(k_)) sup.push_back(r.map_event(scenario_, e));
            std::sort(sup.begin(), sup.end());
            if (seen.insert(sup).second) out.push_back(r);
        }
        return out;
    }

    // When face is given only the canonical PR^(k) is used; otherwise every PR^(k) copy in the support.
    template <class T>
    AnalyticReport<T> run(const Box<T>& box, bool canonical_only = false) const {
        AnalyticReport<T> rep;
        if (!(box.scenario == scenario_)) {
            rep.note = "scenario is not (2,2,k) with matching k";
            return rep;
        }
        std::vector<Relabeling> copies;
        if (canonical_only)
            copies.push_back(Relabeling::identity(scenario_));
        else if (k_ <= kMaxCanonicalK)
            copies = pr_copies(box);
        rep.pr_candidates = copies.size();
        struct Oriented {
            Relabeling r;
            T c;
        };
        std::vector<Oriented> oriented;
        for (auto& r : copies) {
            std::vector<bool> in_support(box.size(), false);
            for (auto e : support_of_pr(k_)) in_support[r.map_event(scenario_, e)] = true;
            T outside(0);
            for (std::size_t i = 0; i < box.size(); ++i)
                if (!in_support[i]) outside += box[i];
            T c = T(1) - outside;
            if (is_positive<T>(c, opt_.tol)) oriented.push_back({r, c});
        }
        for (auto t : templates_)
            for (const auto& o : oriented)
                for (std::size_t ci = 0; ci < chains5_.size(); ++ci) {
                    if (!support_ok_.at(t)[ci]) continue;
                    if (try_chain(t, map_chain(chains5_[ci], scenario_, o.r), o.c, box, rep)) return rep;
                }
        if (opt_.use_octagon)
            for (const auto& o : oriented)
                for (std::size_t ci = 0; ci < chains8_.size(); ++ci) {
                    if (!support_ok_.at(Template::octagon)[ci]) continue;
                    if (try_chain(Template::octagon, map_chain(chains8_[ci], scenario_, o.r), o.c, box, rep)) return rep;
                }
        std::vector<Rational> cs;
        for (const auto& o : oriented) cs.push_back(to_rational(o.c));
        if (opt_.support_search && support_search(box, cs, rep)) return rep;
        if (rep.note.empty()) rep.note = oriented.empty() ? "no PR copy inside the support" : "no template fired";
        return rep;
    }

private:
    std::vector<ChainedSequence> support_cycles(const std::vector<bool>& allowed, std::size_t length) const {
        std::vector<ChainedSequence> out;
        std::vector<std::size_t> path;
        const std::size_t n = allowed.size();
        std::function<void()> rec = [&]() {
            if (path.size() == length) {
                if (graph_.adjacent(path.back(), path.front())) {
                    ChainedSequence ch;
                    for (auto e : path) ch.elements.push_back({e});
                    out.push_back(ch);
                }
                return;
            }
            for (std::size_t v = path.front() + 1; v < n; ++v) {
                if (!allowed[v] || !graph_.adjacent(path.back(), v)) continue;
                if (std::find(path.begin(), path.end(), v) != path.end()) continue;
                path.push_back(v);
                rec();
                path.pop_back();
            }
        };
        for (std::size_t s = 0; s < n; ++s) {
            if (!allowed[s]) continue;
            path = {s};
            rec();
        }
        return out;
    }

    using Element = std::vector<std::size_t>;

    struct FormD {
        TemplateForm form;
        std::array<double, 25> B, Q, L;
    };

    static std::vector<FormD> make_forms() {
        std::vector<FormD> out;
        for (auto t : {Template::m21_k, Template::m22c_k, Template::m31_k, Template::m32_k}) {
            FormD f{template_form(t), {}, {}, {}};
            for (std::size_t i = 0; i < 25; ++i) {
                f.B[i] = f.form.B.data[i].get_d();
                f.Q[i] = f.form.Q.data[i].get_d();
                f.L[i] = f.form.L.data[i].get_d();
            }
            out.push_back(f);
        }
        return out;
    }

    // For fixed element sums the value is k'^3 b + c^2 q + k' c l; returns promising (k', c) pairs, best first.
    std::vector<std::pair<int, Rational>> promising_params(const FormD& f, const std::array<double, 5>& s,
                                                           const std::vector<Rational>& c_hint) const {
        auto quad = [&](const std::array<double, 25>& m) {
            double v = 0;
            for (int i = 0; i < 5; ++i) {
                v -= m[i * 5 + i] * s[i];
                for (int j = 0; j < 5; ++j) v += m[i * 5 + j] * s[i] * s[j];
            }
            return v;
        };
        const double b = quad(f.B), q = quad(f.Q), l = quad(f.L);
        std::vector<std::pair<double, std::pair<int, Rational>>> scored;
        for (int kp : {k_, 2, 3, 4, 6, 8, 12, 16}) {
            if (kp < 2) continue;
            std::vector<Rational> cs = c_hint;
            cs.push_back(Rational(1, 1000));
            cs.push_back(Rational(999, 1000));
            if (q < 0) {
                double v = -kp * l / (2 * q);
                if (v > 0 && v < 1) cs.push_back(make_rational(std::clamp(std::lround(v * 1000), 1L, 999L), 1000));
            }
            for (const auto& c : cs) {
                if (sgn(c) <= 0 || c >= 1) continue;
                double cd = c.get_d();
                double g = double(kp) * kp * kp * b + cd * cd * q + kp * cd * l;
                if (g > 1e-12) scored.push_back({g, {kp, c}});
            }
        }
        std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
        std::vector<std::pair<int, Rational>> out;
        for (std::size_t i = 0; i < scored.size() && i < 4; ++i) out.push_back(scored[i].second);
        return out;
    }

    template <class T>
    bool support_search(const Box<T>& box, const std::vector<Rational>& c_hint, AnalyticReport<T>& rep) const {
        const double tol = opt_.tol;
        const int k = k_;
        std::array<Element, 4> supp;
        for (std::size_t e = 0; e < box.size(); ++e)
            if (is_positive<T>(box[e], tol)) {
                auto ev = EventIndex::from_flat(scenario_, e);
                supp[2 * ev.x + ev.y].push_back(e);
            }
        auto mass = [&](const Element& el) {
            T m(0);
            for (auto e : el) m += box[e];
            return m;
        };
        auto orth = [&](const Element& a, const Element& b) {
            for (auto u : a)
                for (auto v : b)
                    if (!graph_.adjacent(u, v)) return false;
            return true;
        };
        auto saturated = [&](const Element& a, const Element& b) {
            return approx_equal<T>(T(mass(a) + mass(b)), T(1), tol);
        };
        auto disjoint = [](const std::vector<Element>& chain, const Element& el) {
            for (const auto& c : chain)
                for (auto e : el)
                    if (std::find(c.begin(), c.end(), e) != c.end()) return false;
            return true;
        };

        // Saturated ordered pairs. Across settings sharing Alice's input the pair must split her outputs
        // into complementary sets (likewise for Bob); within one setting it must partition the support.
        std::map<Element, std::vector<Element>> succ;
        std::set<std::pair<Element, Element>> seen;
        auto add_pair = [&](const Element& a, const Element& b) {
            if (a.empty() || b.empty() || !orth(a, b) || !saturated(a, b)) return;
            if (seen.insert({a, b}).second) succ[a].push_back(b);
        };
        auto select = [&](const Element& from, auto keep) {
            Element out;
            for (auto e : from)
                if (keep(EventIndex::from_flat(scenario_, e))) out.push_back(e);
            return out;
        };
        for (int u = 0; u < 2; ++u)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    if (v1 == v2) continue;
                    for (unsigned mask = 1; mask + 1 < (1u << k); ++mask) {
                        auto in = [&](int o) { return (mask >> o) & 1u; };
                        add_pair(select(supp[2 * u + v1], [&](const EventIndex& e) { return in(e.a) != 0; }),
                                 select(supp[2 * u + v2], [&](const EventIndex& e) { return in(e.a) == 0; }));
                        add_pair(select(supp[2 * v1 + u], [&](const EventIndex& e) { return in(e.b) != 0; }),
                                 select(supp[2 * v2 + u], [&](const EventIndex& e) { return in(e.b) == 0; }));
                    }
                }
        for (const auto& sp : supp) {
            if (sp.size() < 2 || sp.size() > opt_.max_free_events) continue;
            for (unsigned mask = 1; mask + 1 < (1u << sp.size()); ++mask) {
                Element a, b;
                for (std::size_t i = 0; i < sp.size(); ++i) ((mask >> i) & 1u ? a : b).push_back(sp[i]);
                add_pair(a, b);
            }
        }
        if (succ.empty()) return false;

        std::map<std::size_t, std::vector<std::vector<Element>>> run_cache;
        auto runs = [&](std::size_t len) -> const std::vector<std::vector<Element>>& {
            auto it = run_cache.find(len);
            if (it != run_cache.end()) return it->second;
            std::vector<std::vector<Element>> out;
            std::vector<Element> path;
            std::function<void()> rec = [&]() {
                if (path.size() == len) {
                    out.push_back(path);
                    return;
                }
                auto nx = succ.find(path.back());
                if (nx == succ.end()) return;
                for (const auto& b : nx->second) {
                    if (!disjoint(path, b)) continue;
                    path.push_back(b);
                    rec();
                    path.pop_back();
                }
            };
            for (const auto& [a, _] : succ) {
                path = {a};
                rec();
            }
            return run_cache[len] = std::move(out);
        };
        // Events of one setting orthogonal to every given element and unused by the chain.
        auto free_set = [&](int setting, const std::vector<const Element*>& nbrs, const std::vector<Element>& chain) {
            Element out;
            for (auto e : supp[setting]) {
                bool ok = true;
                for (const auto* n : nbrs)
                    for (auto f : *n)
                        if (!graph_.adjacent(e, f)) ok = false;
                if (ok && disjoint(chain, {e})) out.push_back(e);
            }
            return out;
        };
        auto subsets = [&](const Element& base) {
            std::vector<Element> out;
            if (base.empty()) return out;
            if (base.size() > opt_.max_free_events) return std::vector<Element>{base};
            for (unsigned mask = 1; mask < (1u << base.size()); ++mask) {
                Element el;
                for (std::size_t i = 0; i < base.size(); ++i)
                    if ((mask >> i) & 1u) el.push_back(base[i]);
                out.push_back(std::move(el));
            }
            return out;
        };

        auto accept = [&](Template t, const TemplateParams& params, const std::vector<Element>& elements) {
            ChainedSequence chain;
            chain.elements = elements;
            auto cert = build_certificate(t, params, chain);
            if (!check_certificate(cert, graph_).valid()) return false;
            auto value = certificate_value(convert_certificate<T>(cert), box);
            if (!is_positive<T>(value, is_exact_v<T> ? 0.0 : 1e-9)) return false;
            rep.excluded = true;
            rep.stage = "support";
            rep.tmpl = t;
            rep.value = value;
            rep.params = params;
            rep.certificate = cert;
            rep.element_sums.clear();
            for (const auto& el : elements) rep.element_sums.push_back(mass(el));
            derive_saturation(chain, box, tol);
            rep.chain = chain;
            // The closed forms assume the template's pairs are saturated; single-pair chains usually are not.
            bool premises = true;
            for (int i : template_saturated_pairs(t))
                premises = premises && approx_equal<T>(T(rep.element_sums[std::size_t(i)] + rep.element_sums[std::size_t(i + 1) % 5]),
                                                       T(1), tol);
            if (premises)
                rep.closed_form = closed_form_value<T>(t, params, rep.element_sums);
            else
                rep.closed_form.reset();
            return true;
        };
        // Double-precision screen on the element sums; exact arithmetic only for promising parameters.
        auto evaluate_sums = [&](Template t, const std::vector<Element>& elements, const std::array<double, 5>& sd) {
            TemplateParams params;
            params.k = k_;
            params.epsilon = opt_.epsilon;
            if (t == Template::m0 || t == Template::m1_k) return accept(t, params, elements);
            for (const auto& f : forms_) {
                if (f.form.t != t) continue;
                for (const auto& [kp, c] : promising_params(f, sd, c_hint)) {
                    params.k = kp;
                    params.c_ns = c;
                    if (accept(t, params, elements)) return true;
                }
            }
            return false;
        };
        auto evaluate = [&](Template t, const std::vector<Element>& elements) {
            std::array<double, 5> sd;
            for (int i = 0; i < 5; ++i) sd[i] = to_double(mass(elements[i]));
            return evaluate_sums(t, elements, sd);
        };

        for (const auto& r : runs(5))
            if (orth(r[4], r[0]) && saturated(r[4], r[0]) && evaluate(Template::m0, r)) return true;
        for (const auto& r : runs(5))
            if (orth(r[4], r[0]) && evaluate(Template::m1_k, r)) return true;
        for (const auto& r : runs(4))
            for (int st = 0; st < 4; ++st) {
                auto e4 = free_set(st, {&r[3], &r[0]}, r);
                if (e4.empty()) continue;
                auto ch = r;
                ch.push_back(e4);
                if (evaluate(Template::m21_k, ch)) return true;
            }
        for (const auto& r : runs(3))
            for (const auto& [a, bs] : succ) {
                if (!orth(r[2], a) || !disjoint(r, a)) continue;
                for (const auto& b : bs) {
                    if (!orth(b, r[0]) || !disjoint(r, b)) continue;
                    auto ch = r;
                    ch.push_back(a);
                    ch.push_back(b);
                    if (evaluate(Template::m22c_k, ch)) return true;
                }
            }
        // Free elements enter each template with a nonnegative square coefficient, so the value is convex
        // in each of their sums; the last free element is taken maximal.
        for (const auto& r : runs(3))
            for (int s3 = 0; s3 < 4; ++s3)
                for (const auto& e3 : subsets(free_set(s3, {&r[2]}, r))) {
                    auto ch = r;
                    ch.push_back(e3);
                    for (int s4 = 0; s4 < 4; ++s4) {
                        auto e4 = free_set(s4, {&e3, &r[0]}, ch);
                        if (e4.empty()) continue;
                        auto full = ch;
                        full.push_back(e4);
                        if (evaluate(Template::m31_k, full)) return true;
                    }
                }
        for (const auto& r : runs(3))
            for (int s4 = 0; s4 < 4; ++s4)
                for (const auto& e4 : subsets(free_set(s4, {&r[2]}, r))) {
                    auto ch = r;
                    ch.push_back(e4);
                    for (int s0 = 0; s0 < 4; ++s0) {
                        auto e0 = free_set(s0, {&e4, &r[0]}, ch);
                        if (e0.empty()) continue;
                        std::vector<Element> full{e0, r[0], r[1], r[2], e4};
                        if (evaluate(Template::m32_k, full)) return true;
                    }
                }
        if (!opt_.single_pair_search) return false;
        // Third stage: one saturated pair, three free elements, every orientation and template.
        std::set<std::vector<long>> tried;
        std::size_t budget = opt_.single_pair_budget;
        auto small_subsets = [&](const Element& base) {
            if (base.size() > opt_.single_pair_subset_cap) return std::vector<Element>{base};
            return subsets(base);
        };
        auto dmass = [&](const Element& el) {
            double m = 0;
            for (auto e : el) m += to_double(box[e]);
            return m;
        };
        for (const auto& [a, bs] : succ)
            for (const auto& b : bs)
                for (int s1 = 0; s1 < 4; ++s1)
                    for (const auto& f1 : small_subsets(free_set(s1, {&b}, {a, b})))
                        for (int s2 = 0; s2 < 4; ++s2)
                            for (const auto& f2 : small_subsets(free_set(s2, {&f1}, {a, b, f1})))
                                for (int s3 = 0; s3 < 4; ++s3)
                                    for (const auto& f3 : small_subsets(free_set(s3, {&f2, &a}, {a, b, f1, f2}))) {
                                        std::vector<Element> cyc{a, b, f1, f2, f3};
                                        std::array<double, 5> sd;
                                        std::vector<long> key;
                                        for (int i = 0; i < 5; ++i) {
                                            sd[i] = dmass(cyc[i]);
                                            key.push_back(std::lround(sd[i] * 1e12));
                                        }
                                        if (!tried.insert(key).second) continue;
                                        if (budget-- == 0) return false;
                                        for (int refl = 0; refl < 2; ++refl)
                                            for (int shift = 0; shift < 5; ++shift) {
                                                std::array<double, 5> so;
                                                std::array<int, 5> idx;
                                                for (int i = 0; i < 5; ++i) {
                                                    idx[i] = refl ? (shift + 5 - i) % 5 : (shift + i) % 5;
                                                    so[i] = sd[idx[i]];
                                                }
                                                for (const auto& f : forms_) {
                                                    if (promising_params(f, so, c_hint).empty()) continue;
                                                    std::vector<Element> ch;
                                                    for (int i = 0; i < 5; ++i) ch.push_back(cyc[idx[i]]);
                                                    if (evaluate_sums(f.form.t, ch, so)) {
                                                        rep.stage = "single-pair";
                                                        return true;
                                                    }
                                                }
                                            }
                                    }
        return false;
    }

    TemplateParams params_for(Template t, const Rational& c) const {
        TemplateParams p;
        p.k = k_;
        p.c_ns = c;
        p.epsilon = opt_.epsilon;
        if (t == Template::octagon) {
            p.g = 1 - c / 8;
            p.big = 16 / c;
        }
        return p;
    }

    template <class T>
    bool try_chain(Template t, const ChainedSequence& chain, const T& c, const Box<T>& box, AnalyticReport<T>& rep) const {
        auto sums = element_sums(chain, box);
        const std::size_t n = chain.length();
        if (t == Template::octagon) {
            // Chords (1,5) and (3,7) must each carry a full setting.
            if (!approx_equal<T>(T(sums[1] + sums[5]), T(1), opt_.tol) ||
                !approx_equal<T>(T(sums[3] + sums[7]), T(1), opt_.tol))
                return false;
        } else {
            for (int i : template_saturated_pairs(t))
                if (!approx_equal<T>(T(sums[i] + sums[(i + 1) % n]), T(1), opt_.tol)) return false;
        }
        Rational cr;
        if constexpr (is_exact_v<T>)
            cr = c;
        else
            cr = Rational(c);
        bool needs_c = !(t == Template::m0 || t == Template::m1 || t == Template::m1_k);
        if (needs_c && cr >= 1) return false;
        auto params = params_for(t, cr);
        auto core = template_core(t, params);
        T v(0);
        for (std::size_t i = 0; i < n; ++i) {
            if constexpr (is_exact_v<T>)
                v -= core(i, i) * sums[i];
            else
                v -= core(i, i).get_d() * sums[i];
            for (std::size_t j = 0; j < n; ++j) {
                if constexpr (is_exact_v<T>)
                    v += core(i, j) * sums[i] * sums[j];
                else
                    v += core(i, j).get_d() * sums[i] * sums[j];
            }
        }
        if (!is_positive<T>(v, is_exact_v<T> ? 0.0 : 1e-9)) return false;
        auto cert = build_certificate(t, params, chain);
        if (t == Template::octagon) {
            for (int tries = 0; tries < 40 && !psd_ldlt(cert.entries).psd; ++tries) {
                params.big *= 2;
                cert = build_certificate(t, params, chain);
            }
        }
        auto check = check_certificate(cert, graph_);
        if (!check.valid()) return false;
        auto exact_value = certificate_value(convert_certificate<T>(cert), box);
        if (!is_positive<T>(exact_value, is_exact_v<T> ? 0.0 : 1e-9)) return false;
        rep.excluded = true;
        rep.stage = "canonical";
        rep.tmpl = t;
        rep.value = exact_value;
        rep.params = params;
        rep.certificate = cert;
        rep.element_sums = sums;
        ChainedSequence flagged = chain;
        derive_saturation(flagged, box, opt_.tol);
        rep.chain = flagged;
        rep.closed_form = closed_form_value<T>(t, params, sums);
        return true;
    }

    int k_;
    AnalyticOptions opt_;
    BellScenario scenario_;
    OrthogonalityGraph graph_;
    std::vector<Relabeling> stabilizer_;
    std::vector<ChainedSequence> chains5_, chains8_;
    std::vector<Template> templates_;
    std::map<Template, std::vector<bool>> support_ok_;
    std::vector<FormD> forms_ = make_forms();
};

template <class T>
AnalyticReport<T> exclude_by_analytic(const Box<T>& box, AnalyticOptions opt = {}) {
    const auto& s = box.scenario;
    if (s.ma != 2 || s.mb != 2 || s.ka != s.kb) {
        AnalyticReport<T> rep;
        rep.note = "analytic templates cover (2,2,k) scenarios";
        return rep;
    }
    return AnalyticExcluder(s.ka, opt).run(box);
}

template <class T>
AnalyticReport<T> exclude_by_analytic(const FaceSpec<T>& spec, AnalyticOptions opt = {}) {
    return AnalyticExcluder(spec.k, opt).run(face_box(spec), true);
}

}  // namespace qbell
