#pragma once

#include "qbell/box.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;

inline Mat2 pauli_z() {
    Mat2 m;
    m << 1, 0, 0, -1;
    return m;
}
inline Mat2 pauli_x() {
    Mat2 m;
    m << 0, 1, 1, 0;
    return m;
}

inline MatXc kron(const MatXc& a, const MatXc& b) {
    MatXc out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// (|00> + |11>)/sqrt 2.
inline Vec4 phi_plus() {
    Vec4 v = Vec4::Zero();
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v;
}

// cos(t) sz + sin(t) sx.
inline Mat2 planar_observable(double theta) { return std::cos(theta) * pauli_z() + std::sin(theta) * pauli_x(); }

struct PlanarModel {
    int m = 2;
    std::vector<double> theta_a, theta_b;

    PlanarModel() = default;
    PlanarModel(std::vector<double> a, std::vector<double> b) : m(int(a.size())), theta_a(std::move(a)), theta_b(std::move(b)) {
        validate();
    }
    void validate() const {
        if (m < 2) throw std::invalid_argument("planar model needs m >= 2");
        if (theta_a.size() != std::size_t(m) || theta_b.size() != std::size_t(m))
            throw std::invalid_argument("planar model angle count does not match m");
        for (double t : theta_a)
            if (!std::isfinite(t)) throw std::invalid_argument("non-finite angle");
        for (double t : theta_b)
            if (!std::isfinite(t)) throw std::invalid_argument("non-finite angle");
    }
    Mat2 alice(int i) const { return planar_observable(theta_a.at(std::size_t(i))); }
    Mat2 bob(int j) const { return planar_observable(theta_b.at(std::size_t(j))); }
};

// Interleaved angles A_1, B_1, A_2, ..., B_m spaced by pi/2m: optimal for the unweighted chained inequality.
inline PlanarModel equal_spacing_model(int m) {
    if (m < 2) throw std::invalid_argument("m >= 2 required");
    const double s = std::numbers::pi / (2.0 * m);
    std::vector<double> a, b;
    for (int i = 0; i < m; ++i) {
        a.push_back(2 * i * s);
        b.push_back((2 * i + 1) * s);
    }
    return PlanarModel(a, b);
}

inline PlanarModel chsh_model() { return PlanarModel({0, std::numbers::pi / 2}, {std::numbers::pi / 4, 3 * std::numbers::pi / 4}); }

inline CorrelatorTable<double> correlators_closed_form(const PlanarModel& model) {
    model.validate();
    CorrelatorTable<double> E(model.m, model.m);
    for (int i = 0; i < model.m; ++i)
        for (int j = 0; j < model.m; ++j) E(i, j) = std::cos(model.theta_a[i] - model.theta_b[j]);
    return E;
}

inline CorrelatorTable<double> correlators_by_expectation(const PlanarModel& model) {
    model.validate();
    const Vec4 psi = phi_plus();
    CorrelatorTable<double> E(model.m, model.m);
    for (int i = 0; i < model.m; ++i)
        for (int j = 0; j < model.m; ++j) {
            Mat4 op = kron(model.alice(i), model.bob(j));
            E(i, j) = (psi.adjoint() * op * psi)(0).real();
        }
    return E;
}

// Both routes must agree; throws if they do not.
inline CorrelatorTable<double> correlators_from_model(const PlanarModel& model, double tol = 1e-12) {
    auto a = correlators_closed_form(model);
    auto b = correlators_by_expectation(model);
    for (std::size_t k = 0; k < a.values.size(); ++k)
        if (std::abs(a.values[k] - b.values[k]) > tol) throw std::logic_error("correlator routes disagree");
    return a;
}

struct AngleTable {
    int m = 0;
    std::vector<double> alpha;  // row-major, alpha[x][y] in [0, pi]
    double operator()(int x, int y) const { return alpha[std::size_t(x) * m + y]; }
};

inline AngleTable angle_table(const CorrelatorTable<double>& E) {
    if (E.ma != E.mb) throw std::invalid_argument("angle table needs a square correlator table");
    AngleTable t{E.ma, {}};
    for (double e : E.values) {
        if (!(std::abs(e) <= 1 + 1e-12)) throw std::invalid_argument("|E| > 1");
        t.alpha.push_back(std::acos(std::clamp(e, -1.0, 1.0)));
    }
    return t;
}

// sum_{i<m} (alpha_{i,i} + alpha_{i+1,i}) - (alpha_{1,m} - alpha_{m,m}), 1-based indices as written.
inline double boundary_residual(const AngleTable& al) {
    const int m = al.m;
    if (m < 2) throw std::invalid_argument("m >= 2 required");
    double lhs = 0;
    for (int i = 0; i < m - 1; ++i) lhs += al(i, i) + al(i + 1, i);
    return lhs - (al(0, m - 1) - al(m - 1, m - 1));
}

// sum_{(x,y) != pivot} asin E_xy - asin E_pivot - xi pi, for m = 2. Pivot is 0-based.
inline double tlm_residual(const CorrelatorTable<double>& E, int pi, int pj, int xi) {
    if (E.ma != 2 || E.mb != 2) throw std::invalid_argument("TLM relation is for m = 2");
    if (xi != 1 && xi != -1) throw std::invalid_argument("xi must be +1 or -1");
    if (pi < 0 || pi > 1 || pj < 0 || pj > 1) throw std::invalid_argument("pivot out of range");
    double s = 0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double v = std::asin(std::clamp(E(x, y), -1.0, 1.0));
            s += (x == pi && y == pj) ? -v : v;
        }
    return s - xi * std::numbers::pi;
}

// I = sum_{i<m} (c_{i,i} E_{i,i} + c_{i+1,i} E_{i+1,i}) + c_{m,m} E_{m,m} - c_{1,m} E_{1,m}.
struct WeightedChain {
    int m = 2;
    std::vector<double> diag;  // c_{i,i}, i = 1..m
    std::vector<double> sub;   // c_{i+1,i}, i = 1..m-1
    double corner = 1;         // c_{1,m}

    static WeightedChain unit(int m) {
        if (m < 2) throw std::invalid_argument("m >= 2 required");
        return WeightedChain{m, std::vector<double>(std::size_t(m), 1.0), std::vector<double>(std::size_t(m - 1), 1.0), 1.0};
    }
    void validate() const {
        if (m < 2 || diag.size() != std::size_t(m) || sub.size() != std::size_t(m - 1))
            throw std::invalid_argument("malformed weighted chain");
        for (double c : diag)
            if (!(c > 0)) throw std::invalid_argument("chain weights must be positive");
        for (double c : sub)
            if (!(c > 0)) throw std::invalid_argument("chain weights must be positive");
        if (!(corner > 0)) throw std::invalid_argument("chain weights must be positive");
    }
    double total() const {
        double s = corner;
        for (double c : diag) s += c;
        for (double c : sub) s += c;
        return s;
    }
    WeightedChain normalized() const {
        WeightedChain w = *this;
        const double t = total();
        for (auto& c : w.diag) c /= t;
        for (auto& c : w.sub) c /= t;
        w.corner /= t;
        return w;
    }
};

// Coefficient of E_{x,y} (0-based) in the chain expression.
inline double chain_coefficient(const WeightedChain& w, int x, int y) {
    const int m = w.m;
    double c = 0;
    if (x == y) c += w.diag[std::size_t(x)];
    if (x == y + 1 && y < m - 1) c += w.sub[std::size_t(y)];
    if (x == 0 && y == m - 1) c -= w.corner;
    return c;
}

inline double chain_value(const CorrelatorTable<double>& E, const WeightedChain& w) {
    w.validate();
    if (E.ma != w.m || E.mb != w.m) throw std::invalid_argument("correlator table size does not match chain");
    double v = 0;
    for (int x = 0; x < w.m; ++x)
        for (int y = 0; y < w.m; ++y) v += chain_coefficient(w, x, y) * E(x, y);
    return v;
}

inline constexpr int kMaxChainEnumeration = 12;

// Maximum over deterministic +-1 assignments. For each of Alice's 2^m assignments Bob's best reply is
// taken per input, which covers all 2^{2m} assignments.
inline double classical_chain_max(const WeightedChain& w) {
    w.validate();
    const int m = w.m;
    if (m > kMaxChainEnumeration) throw std::invalid_argument("classical enumeration capped at m = 12");
    double best = -1e300;
    for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
        double v = 0;
        for (int y = 0; y < m; ++y) {
            double col = 0;
            for (int x = 0; x < m; ++x) col += chain_coefficient(w, x, y) * ((mask >> x) & 1 ? -1.0 : 1.0);
            v += std::abs(col);
        }
        best = std::max(best, v);
    }
    return best;
}

// c_{i,j} = 1/sin alpha_{i,j}: the hyperplane tangent to the boundary surface in correlator coordinates.
inline WeightedChain boundary_weights(const AngleTable& al, double tol = 1e-12) {
    const int m = al.m;
    if (m < 2) throw std::invalid_argument("m >= 2 required");
    auto weight = [&](int x, int y) {
        double s = std::sin(al(x, y));
        if (s <= tol) throw std::invalid_argument("degenerate angle at (" + std::to_string(x + 1) + "," + std::to_string(y + 1) + ")");
        return 1.0 / s;
    };
    WeightedChain w{m, {}, {}, 0};
    for (int i = 0; i < m; ++i) w.diag.push_back(weight(i, i));
    for (int i = 0; i < m - 1; ++i) w.sub.push_back(weight(i + 1, i));
    w.corner = weight(0, m - 1);
    return w;
}

// Angle between the planar vectors A_i|phi+> and A_j|phi+>, in [0, pi].
inline double vector_angle(double t1, double t2) { return std::acos(std::clamp(std::cos(t1 - t2), -1.0, 1.0)); }

struct ControlOperators {
    Mat2 za, xa, zb, xb;
};

inline ControlOperators control_operators(const PlanarModel& model, double tol = 1e-12) {
    auto al = angle_table(correlators_from_model(model));
    const double a11 = al(0, 0), a21 = al(1, 0), a12 = al(0, 1);
    const double s1 = std::sin(a11 + a21), s2 = std::sin(a12 - a11);
    if (std::abs(s1) <= tol) throw std::invalid_argument("sin(alpha11 + alpha21) vanishes");
    if (std::abs(s2) <= tol) throw std::invalid_argument("sin(alpha12 - alpha11) vanishes");
    const Mat2 A1 = model.alice(0), A2 = model.alice(1), B1 = model.bob(0), B2 = model.bob(1);
    ControlOperators c;
    c.za = A1;
    c.xa = (A2 - std::cos(a11 + a21) * A1) / s1;
    c.zb = (std::sin(a12) * B1 - std::sin(a11) * B2) / s2;
    c.xb = (std::cos(a11) * B2 - std::cos(a12) * B1) / s2;
    return c;
}

inline double unitarity_residual(const Mat2& u) { return (u.adjoint() * u - Mat2::Identity()).norm(); }

// Unitary factor of the polar decomposition.
inline Mat2 nearest_unitary(const Mat2& m) {
    Eigen::JacobiSVD<Mat2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline ControlOperators regularized(const ControlOperators& c) {
    return {nearest_unitary(c.za), nearest_unitary(c.xa), nearest_unitary(c.zb), nearest_unitary(c.xb)};
}

struct SelfTestReport {
    double z_match = 0;        // |(Z_A x I - I x Z_B) psi|
    double x_match = 0;        // |(X_A x I - I x X_B) psi|
    double anti_a = 0;         // |(X_A Z_A + Z_A X_A) x I psi|
    double anti_b = 0;         // |I x (X_B Z_B + Z_B X_B) psi|
    double zz = 0, xx = 0;     // <Z_A Z_B>, <X_A X_B>
    double unitarity = 0;      // max over the four operators
    double max_residual() const {
        return std::max({z_match, x_match, anti_a, anti_b, std::abs(zz - 1), std::abs(xx - 1)});
    }
};

inline SelfTestReport verify_self_test_conditions(const PlanarModel& model) {
    const auto c = control_operators(model);
    const Vec4 psi = phi_plus();
    const MatXc I2 = Mat2::Identity();
    SelfTestReport r;
    r.z_match = ((kron(c.za, I2) - kron(I2, c.zb)) * psi).norm();
    r.x_match = ((kron(c.xa, I2) - kron(I2, c.xb)) * psi).norm();
    r.anti_a = (kron(c.xa * c.za + c.za * c.xa, I2) * psi).norm();
    r.anti_b = (kron(I2, c.xb * c.zb + c.zb * c.xb) * psi).norm();
    r.zz = (psi.adjoint() * kron(c.za, c.zb) * psi)(0).real();
    r.xx = (psi.adjoint() * kron(c.xa, c.xb) * psi)(0).real();
    r.unitarity = std::max({unitarity_residual(c.za), unitarity_residual(c.xa), unitarity_residual(c.zb),
                            unitarity_residual(c.xb)});
    return r;
}

namespace detail {

// Register order: system A, system B, ancilla A', ancilla B'.
inline MatXc kron4(const MatXc& a, const MatXc& b, const MatXc& c, const MatXc& d) { return kron(kron(a, b), kron(c, d)); }

inline Mat2 projector(int bit) {
    Mat2 p = Mat2::Zero();
    p(bit, bit) = 1;
    return p;
}

}  // namespace detail

// Swap circuit: H on both ancillas, ancilla-controlled Z_A and Z_B, H again, ancilla-controlled X_A and X_B.
inline MatXc swap_isometry(const ControlOperators& raw) {
    const auto c = regularized(raw);
    using detail::kron4;
    using detail::projector;
    const MatXc I2 = Mat2::Identity();
    Mat2 h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    auto ctrl_a = [&](const Mat2& u) { return MatXc(kron4(I2, I2, projector(0), I2) + kron4(u, I2, projector(1), I2)); };
    auto ctrl_b = [&](const Mat2& u) { return MatXc(kron4(I2, I2, I2, projector(0)) + kron4(I2, u, I2, projector(1))); };
    const MatXc hh = kron4(I2, I2, h, h);
    return ctrl_b(c.xb) * ctrl_a(c.xa) * hh * ctrl_b(c.zb) * ctrl_a(c.za) * hh;
}

// psi (system pair) tensored with |00> on the ancillas.
inline VecXc with_ancillas(const Vec4& psi) {
    VecXc v = VecXc::Zero(16);
    for (int s = 0; s < 4; ++s) v(s * 4) = psi(s);
    return v;
}

// <phi+| rho_ancilla |phi+> / Tr rho_ancilla.
inline double ancilla_fidelity(const VecXc& out) {
    Mat4 rho = Mat4::Zero();
    for (int s = 0; s < 4; ++s)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) rho(i, j) += out(s * 4 + i) * std::conj(out(s * 4 + j));
    const Vec4 t = phi_plus();
    return ((t.adjoint() * rho * t)(0).real()) / rho.trace().real();
}

inline double swap_isometry_fidelity(const PlanarModel& model, const Vec4& state = phi_plus()) {
    const auto phi = swap_isometry(control_operators(model));
    return ancilla_fidelity(phi * with_ancillas(state));
}

// max over (i,j) of |Phi(A_i B_j psi|00>) - junk x (A~_i x B~_j) phi+| with A~_i = a_z sz + a_x sx.
inline double pushforward_residual(const PlanarModel& model) {
    const auto c = control_operators(model);
    const auto phi = swap_isometry(c);
    const Vec4 psi = phi_plus();
    const MatXc I2 = Mat2::Identity();
    const VecXc base = phi * with_ancillas(psi);
    VecXc junk = VecXc::Zero(4);
    const Vec4 t = phi_plus();
    for (int s = 0; s < 4; ++s)
        for (int i = 0; i < 4; ++i) junk(s) += base(s * 4 + i) * std::conj(t(i));
    const Vec4 za = kron(c.za, I2) * psi, xa = kron(c.xa, I2) * psi;
    const Vec4 zb = kron(I2, c.zb) * psi, xb = kron(I2, c.xb) * psi;
    double worst = 0;
    for (int i = 0; i < model.m; ++i)
        for (int j = 0; j < model.m; ++j) {
            const Vec4 ai = kron(model.alice(i), I2) * psi, bj = kron(I2, model.bob(j)) * psi;
            const double az = za.dot(ai).real(), ax = xa.dot(ai).real();
            const double bz = zb.dot(bj).real(), bx = xb.dot(bj).real();
            const Mat2 at = az * pauli_z() + ax * pauli_x(), bt = bz * pauli_z() + bx * pauli_x();
            const VecXc lhs = phi * with_ancillas(kron(model.alice(i), model.bob(j)) * psi);
            const VecXc rhs = kron(junk, kron(at, bt) * t);
            worst = std::max(worst, (lhs - rhs).norm());
        }
    return worst;
}

// Hardy test in (2,2,2) with state cos t|00> + sin t|11> and real projective measurements:
// P(0,0|0,0) = P(0,1|1,0) = P(1,0|0,1) = 0 and the Hardy probability P(0,0|1,1).
struct HardyModel {
    double t = 0, phi = 0;
    double alice[2][2][2];  // [x][a] unit vector
    double bob[2][2][2];    // [y][b]
};

inline HardyModel hardy_model(double t, double phi) {
    HardyModel h{t, phi, {}, {}};
    const double c0 = std::cos(t), c1 = std::sin(t);
    auto set = [](double (&v)[2], double a, double b) {
        double n = std::hypot(a, b);
        if (n == 0) throw std::invalid_argument("degenerate Hardy model");
        v[0] = a / n;
        v[1] = b / n;
    };
    auto perp = [&](double (&dst)[2], const double (&src)[2]) { set(dst, -src[1], src[0]); };
    set(h.alice[0][0], std::cos(phi), std::sin(phi));
    perp(h.alice[0][1], h.alice[0][0]);
    // P(0,0|0,0) = 0: bob[0][0] orthogonal to C alice[0][0].
    set(h.bob[0][1], c0 * h.alice[0][0][0], c1 * h.alice[0][0][1]);
    perp(h.bob[0][0], h.bob[0][1]);
    // P(0,1|1,0) = 0: alice[1][0] orthogonal to C bob[0][1].
    set(h.alice[1][1], c0 * h.bob[0][1][0], c1 * h.bob[0][1][1]);
    perp(h.alice[1][0], h.alice[1][1]);
    // P(1,0|0,1) = 0: bob[1][0] orthogonal to C alice[0][1].
    set(h.bob[1][1], c0 * h.alice[0][1][0], c1 * h.alice[0][1][1]);
    perp(h.bob[1][0], h.bob[1][1]);
    return h;
}

inline double hardy_probability(const HardyModel& h, int a, int b, int x, int y) {
    const double c0 = std::cos(h.t), c1 = std::sin(h.t);
    const double amp = h.alice[x][a][0] * c0 * h.bob[y][b][0] + h.alice[x][a][1] * c1 * h.bob[y][b][1];
    return amp * amp;
}

inline Box<double> hardy_box(const HardyModel& h) {
    auto box = Box<double>::zeros(BellScenario(2, 2, 2, 2));
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) box(a, b, x, y) = hardy_probability(h, a, b, x, y);
    return box;
}

// For each state parameter t the Alice angle is optimized, then t itself; golden-section in both.
inline HardyModel hardy_optimal_model(double tol = 1e-12) {
    auto golden = [tol](auto f, double lo, double hi) {
        const double g = (std::sqrt(5.0) - 1) / 2;
        double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
        double fc = f(c), fd = f(d);
        while (b - a > tol) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        return (a + b) / 2;
    };
    auto bracket = [](auto f, double lo, double hi, int n) {
        double best = lo, bv = -1;
        for (int i = 0; i <= n; ++i) {
            double x = lo + (hi - lo) * i / n, v = f(x);
            if (v > bv) {
                bv = v;
                best = x;
            }
        }
        const double step = (hi - lo) / n;
        return std::pair{std::max(lo, best - step), std::min(hi, best + step)};
    };
    auto best_phi = [&](double t) {
        auto f = [t](double p) { return hardy_probability(hardy_model(t, p), 0, 0, 1, 1); };
        auto [lo, hi] = bracket(f, 0.01, std::numbers::pi / 2 - 0.01, 200);
        return golden(f, lo, hi);
    };
    auto value = [&](double t) { return hardy_probability(hardy_model(t, best_phi(t)), 0, 0, 1, 1); };
    auto [lo, hi] = bracket(value, 0.01, std::numbers::pi / 4 - 0.01, 200);
    double t = golden(value, lo, hi);
    return hardy_model(t, best_phi(t));
}

}  // namespace qbell
