#pragma once

#include "qbell/certificate.hpp"
#include "qbell/chain.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

// m22c / m22c_k move the c-couplings of m22 / m22_k from the chords (1,4),(3,5) onto the unsaturated
// pairs (3,4),(5,1); the printed chords are never locally orthogonal on a five-element chain.
enum class Template { m0, m1, m21, m22, m22c, m3, m1_k, m21_k, m22_k, m22c_k, m31_k, m32_k, octagon };

inline std::string template_name(Template t) {
    switch (t) {
        case Template::m0: return "M0";
        case Template::m1: return "M1";
        case Template::m21: return "M21";
        case Template::m22: return "M22";
        case Template::m22c: return "M22c";
        case Template::m3: return "M3";
        case Template::m1_k: return "M1_k";
        case Template::m21_k: return "M21_k";
        case Template::m22_k: return "M22_k";
        case Template::m22c_k: return "M22c_k";
        case Template::m31_k: return "M31_k";
        case Template::m32_k: return "M32_k";
        case Template::octagon: return "OCT";
    }
    return "?";
}

inline Template template_from_name(const std::string& s) {
    for (auto t : {Template::m0, Template::m1, Template::m21, Template::m22, Template::m22c, Template::m3,
                   Template::m1_k, Template::m21_k, Template::m22_k, Template::m22c_k, Template::m31_k,
                   Template::m32_k, Template::octagon})
        if (template_name(t) == s) return t;
    throw std::invalid_argument("unknown template " + s);
}

struct TemplateParams {
    int k = 2;
    Rational c_ns = Rational(1, 2);
    Rational epsilon = Rational(1, 10);
    // Octagon only: cycle weight g and the weight on the two saturated pairs.
    Rational g = Rational(0);
    Rational big = Rational(0);
};

inline std::size_t template_size(Template t) { return t == Template::octagon ? 8 : 5; }

// Pairs (i, i+1) whose normalization the template relies on; zero-based, pair i joins i and i+1 mod 5.
inline std::vector<int> template_saturated_pairs(Template t) {
    switch (t) {
        case Template::m0: return {0, 1, 2, 3, 4};
        case Template::m1:
        case Template::m1_k: return {0, 1, 2, 3};
        case Template::m21:
        case Template::m21_k: return {0, 1, 2};
        case Template::m22:
        case Template::m22_k:
        case Template::m22c:
        case Template::m22c_k: return {0, 1, 3};
        case Template::m3:
        case Template::m31_k: return {0, 1};
        case Template::m32_k: return {1, 2};
        case Template::octagon: return {};
    }
    return {};
}

inline void check_params(Template t, const TemplateParams& p) {
    if (p.k < 2) throw std::invalid_argument("template parameter k must be >= 2");
    if (t == Template::m0) {
        if (sgn(p.epsilon) <= 0) throw std::invalid_argument("epsilon must be positive");
        return;
    }
    if (t == Template::m1 || t == Template::m1_k) return;
    if (sgn(p.c_ns) <= 0 || p.c_ns >= 1) throw std::invalid_argument("c_NS must lie in (0,1)");
    if (t == Template::octagon && (sgn(p.g) <= 0 || p.g >= 1 || sgn(p.big) <= 0))
        throw std::invalid_argument("octagon needs 0 < g < 1 and a positive pair weight");
}

inline Rational template_f(int k) { return Rational(k) * k * k; }

// Matrix on the chain positions; composite elements are expanded later with all-ones blocks.
inline Matrix<Rational> template_core(Template t, const TemplateParams& p) {
    check_params(t, p);
    const std::size_t n = template_size(t);
    Matrix<Rational> m(n, n);
    auto pair = [&](int i, int j, const Rational& w) {
        m(i, i) += w;
        m(j, j) += w;
        m(i, j) += w;
        m(j, i) += w;
    };
    auto sym = [&](int i, int j, const Rational& w) {
        m(i, j) += w;
        if (i != j) m(j, i) += w;
    };
    const Rational c = p.c_ns, c2 = c * c, kk(p.k);
    switch (t) {
        case Template::m0:
            for (int i = 0; i < 5; ++i) pair(i, (i + 1) % 5, Rational(1));
            m(0, 0) -= p.epsilon;
            break;
        case Template::m1:
        case Template::m1_k:
            for (int i = 0; i < 4; ++i) pair(i, i + 1, Rational(4));
            sym(0, 4, Rational(1));
            break;
        case Template::m21:
        case Template::m21_k: {
            Rational f = t == Template::m21 ? Rational(8) : template_f(p.k);
            Rational cc = t == Template::m21 ? Rational(2) * c : kk * c;
            for (int i = 0; i < 3; ++i) pair(i, i + 1, f);
            sym(0, 0, c2);
            sym(3, 3, c2);
            sym(4, 4, 2 * c2);
            sym(0, 4, cc);
            sym(3, 4, cc);
            break;
        }
        case Template::m22:
        case Template::m22_k:
        case Template::m22c:
        case Template::m22c_k: {
            bool small = t == Template::m22 || t == Template::m22c;
            Rational f = small ? Rational(8) : template_f(p.k);
            Rational cc = small ? Rational(2) * c : kk * c;
            pair(0, 1, f);
            pair(1, 2, f);
            pair(3, 4, f);
            for (int i : {0, 2, 3, 4}) sym(i, i, c2);
            if (t == Template::m22 || t == Template::m22_k) {
                sym(0, 3, cc);
                sym(2, 4, cc);
            } else {
                sym(0, 4, cc);
                sym(2, 3, cc);
            }
            break;
        }
        case Template::m3:
        case Template::m31_k: {
            Rational f = t == Template::m3 ? Rational(8) : template_f(p.k);
            Rational half = t == Template::m3 ? c : kk * c / 2;
            Rational cc = t == Template::m3 ? Rational(2) * c : kk * c;
            pair(0, 1, f);
            pair(1, 2, f);
            sym(0, 0, half);
            sym(2, 2, half);
            sym(3, 3, cc + c2);
            sym(4, 4, cc + c2);
            sym(0, 4, cc);
            sym(2, 3, cc);
            sym(3, 4, cc);
            break;
        }
        case Template::m32_k: {
            Rational f = template_f(p.k);
            pair(1, 2, f);
            pair(2, 3, f);
            sym(1, 1, kk * c / 2);
            sym(3, 3, kk * c / 2);
            sym(4, 4, kk * c + c2);
            sym(0, 0, kk * c + c2);
            sym(1, 0, kk * c);
            sym(3, 4, kk * c);
            sym(4, 0, kk * c);
            break;
        }
        case Template::octagon: {
            // Positions follow the cycle order; chords (1,5) and (3,7) join the two saturated pairs,
            // chords (0,4) and (2,6) carry the negative weight.
            for (int i = 0; i < 8; ++i) sym(i, i, Rational(1));
            for (int i = 0; i < 8; ++i) sym(i, (i + 1) % 8, p.g);
            pair(1, 5, p.big);
            pair(3, 7, p.big);
            sym(0, 4, -p.g * p.g);
            sym(2, 6, -p.g * p.g);
            break;
        }
    }
    return m;
}

// Expands each core entry into a constant block over the sub-events of the two elements.
inline CertificateMatrix<Rational> build_certificate(Template t, const TemplateParams& p, const ChainedSequence& ch) {
    const auto core = template_core(t, p);
    if (ch.length() != core.rows) throw std::invalid_argument("chain length does not match template");
    std::vector<std::size_t> events;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < ch.length(); ++i)
        for (auto e : ch.elements[i]) {
            events.push_back(e);
            owner.push_back(i);
        }
    Matrix<Rational> m(events.size(), events.size());
    for (std::size_t u = 0; u < events.size(); ++u)
        for (std::size_t v = 0; v < events.size(); ++v) m(u, v) = core(owner[u], owner[v]);
    return CertificateMatrix<Rational>(std::move(events), std::move(m));
}

// k-family cores are linear in (k^3, c^2, k c): core = k^3 B + c^2 Q + k c L.
struct TemplateForm {
    Template t;
    Matrix<Rational> B, Q, L;
};

inline bool has_template_form(Template t) {
    return t == Template::m21_k || t == Template::m22c_k || t == Template::m22_k || t == Template::m31_k ||
           t == Template::m32_k;
}

inline TemplateForm template_form(Template t) {
    if (!has_template_form(t)) throw std::invalid_argument("template has no (k^3, c^2, k c) form: " + template_name(t));
    auto core = [&](int k, Rational c) {
        TemplateParams p;
        p.k = k;
        p.c_ns = c;
        return template_core(t, p);
    };
    // Three samples (k, c) = (2, 1/2), (2, 1/4), (4, 1/2) determine the form; a fourth checks it.
    auto x1 = core(2, Rational(1, 2)), x2 = core(2, Rational(1, 4)), x3 = core(4, Rational(1, 2));
    TemplateForm f{t, Matrix<Rational>(5, 5), Matrix<Rational>(5, 5), Matrix<Rational>(5, 5)};
    for (std::size_t i = 0; i < 25; ++i) {
        // x1 = 8B + Q/4 + L, x2 = 8B + Q/16 + L/2, x3 = 64B + Q/4 + 2L.
        Rational d31 = x3.data[i] - x1.data[i];  // 56B + L
        Rational d12 = x1.data[i] - x2.data[i];  // 3Q/16 + L/2
        Rational B = (d12 - Rational(3, 4) * x1.data[i] + Rational(1, 4) * d31) / 8;
        Rational L = d31 - 56 * B;
        Rational Q = 4 * (x1.data[i] - 8 * B - L);
        f.B.data[i] = B;
        f.Q.data[i] = Q;
        f.L.data[i] = L;
    }
    auto check = core(3, Rational(1, 3));
    for (std::size_t i = 0; i < 25; ++i)
        if (check.data[i] != 27 * f.B.data[i] + f.Q.data[i] / 9 + f.L.data[i])
            throw std::logic_error("template core is not linear in (k^3, c^2, k c)");
    return f;
}

// Values with every relied-on pair saturated, written out term by term.
template <class T>
T closed_form_value(Template t, const TemplateParams& prm, const std::vector<T>& p) {
    auto sq = [](const T& x) { return T(x * x - x); };
    if (t == Template::octagon) {
        // With (1,5) and (3,7) saturated the large weight drops out.
        if (p.size() != 8) throw std::invalid_argument("the octagon closed form needs eight elements");
        const T g = from_rational<T>(prm.g);
        T v(0);
        for (std::size_t i = 0; i < 8; ++i) v += sq(p[i]) + 2 * g * p[i] * p[(i + 1) % 8];
        return T(v - 2 * g * g * (p[0] * p[4] + p[2] * p[6]));
    }
    if (p.size() != 5) throw std::invalid_argument("closed forms are stated for five elements");
    const T c = from_rational<T>(prm.c_ns), c2 = c * c, k = T(prm.k);
    const T &p1 = p[0], &p2 = p[1], &p3 = p[2], &p4 = p[3], &p5 = p[4];
    switch (t) {
        case Template::m0: return T(-from_rational<T>(prm.epsilon) * p1 * (p1 - 1));
        case Template::m1:
        case Template::m1_k: return T(2 * p1 * p5);
        case Template::m21: return T(c2 * (sq(p1) + sq(p4) + 2 * sq(p5)) + 4 * c * (p1 * p5 + p4 * p5));
        case Template::m21_k: return T(c2 * (sq(p1) + sq(p4) + 2 * sq(p5)) + 2 * k * c * (p1 * p5 + p4 * p5));
        case Template::m22: return T(c2 * (sq(p1) + sq(p3) + sq(p4) + sq(p5)) + 4 * c * (p1 * p4 + p3 * p5));
        case Template::m22_k:
            return T(c2 * (sq(p1) + sq(p3) + sq(p4) + sq(p5)) + 2 * k * c * (p1 * p4 + p3 * p5));
        case Template::m22c: return T(c2 * (sq(p1) + sq(p3) + sq(p4) + sq(p5)) + 4 * c * (p1 * p5 + p3 * p4));
        case Template::m22c_k:
            return T(c2 * (sq(p1) + sq(p3) + sq(p4) + sq(p5)) + 2 * k * c * (p1 * p5 + p3 * p4));
        case Template::m3:
            return T(c * (sq(p1) + sq(p3) + 2 * sq(p4) + 2 * sq(p5)) + c2 * (sq(p4) + sq(p5)) +
                     4 * c * (p1 * p5 + p3 * p4 + p4 * p5));
        case Template::m31_k:
            return T(k / 2 * c * (sq(p1) + sq(p3) + 2 * sq(p4) + 2 * sq(p5)) + c2 * (sq(p4) + sq(p5)) +
                     2 * k * c * (p1 * p5 + p3 * p4 + p4 * p5));
        case Template::m32_k:
            return T(k / 2 * c * (sq(p2) + sq(p4) + 2 * sq(p5) + 2 * sq(p1)) + c2 * (sq(p5) + sq(p1)) +
                     2 * k * c * (p2 * p1 + p4 * p5 + p5 * p1));
        case Template::octagon: break;
    }
    throw std::logic_error("unreachable");
}

// Factored forms valid on face boxes where p1 = p3 (M3, M31_k) or p2 = p4 (M32_k).
template <class T>
T factored_value(Template t, const TemplateParams& prm, const std::vector<T>& p) {
    const T c = from_rational<T>(prm.c_ns), c2 = c * c, k = T(prm.k);
    const T &p1 = p[0], &p4 = p[3], &p5 = p[4];
    T s = p1 + p4 + p5;
    switch (t) {
        case Template::m3: return T(2 * c * s * (s - 1) + c2 * (p4 * p4 + p5 * p5) - c2 * (p4 + p5));
        case Template::m31_k: return T(k * c * s * (s - 1) + c2 * (p4 * p4 + p5 * p5) - c2 * (p4 + p5));
        case Template::m32_k: return T(k * c * s * (s - 1) + c2 * (p5 * p5 + p1 * p1) - c2 * (p5 + p1));
        default: break;
    }
    throw std::invalid_argument("no factored form for this template");
}

}  // namespace qbell
