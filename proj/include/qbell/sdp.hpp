#pragma once

#include "qbell/box.hpp"
#include "qbell/certificate.hpp"
#include "qbell/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Nearest PSD matrix in Frobenius norm.
inline MatrixXd project_psd(const MatrixXd& s) {
    if (s.rows() != s.cols()) throw std::invalid_argument("project_psd needs a square matrix");
    if (!s.allFinite()) throw std::invalid_argument("project_psd: non-finite entry");
    MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

// Euclidean projection of v onto {x >= 0, sum x <= tau}.
inline VectorXd project_capped_simplex(const VectorXd& v, double tau) {
    VectorXd pos = v.cwiseMax(0.0);
    if (pos.sum() <= tau) return pos;
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0, theta = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        double t = (cum - tau) / double(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

enum class SdpStatus { optimal, max_iter, infeasible };

inline std::string sdp_status_name(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::max_iter: return "max_iter";
        case SdpStatus::infeasible: return "infeasible";
    }
    return "?";
}

// maximize <C, M> over M PSD with either (pattern, Tr M <= tau) or (M_ii = 1).
struct SdpProblem {
    MatrixXd cost;
    // allowed(i, j) for i != j; ignored in fixed-diagonal mode.
    std::vector<std::uint8_t> allowed;
    double tau = 1.0;
    bool fixed_diagonal = false;

    std::size_t size() const { return std::size_t(cost.rows()); }
    void validate() const {
        const auto n = size();
        if (cost.rows() != cost.cols()) throw std::invalid_argument("cost must be square");
        if ((cost - cost.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + cost.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("cost must be symmetric");
        if (fixed_diagonal) return;
        if (!(tau > 0)) throw std::invalid_argument("trace bound must be positive");
        if (allowed.size() != n * n) throw std::invalid_argument("pattern size mismatch");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (allowed[i * n + j] != allowed[j * n + i]) throw std::invalid_argument("pattern must be symmetric");
    }
};

struct SdpOptions {
    double tol = 1e-8;
    int max_iter = 50000;
    double rho = 1.0;
};

struct SdpResult {
    double value = 0;
    MatrixXd matrix;
    SdpStatus status = SdpStatus::max_iter;
    int iterations = 0;
    double min_eigenvalue = 0;
    double pattern_violation = 0;
    double trace_slack = 0;  // tau - Tr M in trace mode, max |M_ii - 1| in fixed-diagonal mode
    std::optional<double> dual_bound;
};

namespace detail {

inline MatrixXd project_pattern(const MatrixXd& x, const SdpProblem& p) {
    MatrixXd out = x;
    const auto n = p.size();
    if (p.fixed_diagonal) {
        for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && !p.allowed[i * n + j]) out(i, j) = 0.0;
    return out;
}

inline MatrixXd project_cone(const MatrixXd& x, const SdpProblem& p) {
    MatrixXd sym = 0.5 * (x + x.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    VectorXd lam = p.fixed_diagonal ? VectorXd(es.eigenvalues().cwiseMax(0.0))
                                    : project_capped_simplex(es.eigenvalues(), p.tau);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const MatrixXd& m) {
    if (m.rows() == 0) return 0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Turns an approximate solution into an exactly feasible one: snap to the constraint set, then shift
// the diagonal (trace mode) or blend with the identity (fixed-diagonal mode) until PSD.
inline MatrixXd repair(const MatrixXd& z, const SdpProblem& p) {
    const auto n = Eigen::Index(p.size());
    MatrixXd m = project_pattern(0.5 * (z + z.transpose()), p);
    double lmin = min_eigenvalue(m);
    if (p.fixed_diagonal) {
        if (lmin < 0) {
            double t = -lmin / (1 - lmin);  // (1-t) m + t I has min eigenvalue >= 0 and unit diagonal
            m = (1 - t) * m + t * MatrixXd::Identity(n, n);
        }
        return m;
    }
    if (lmin < 0) m += (-lmin) * MatrixXd::Identity(n, n);
    double tr = m.trace();
    if (tr > p.tau) m *= p.tau / tr;
    return m;
}

}  // namespace detail

// ADMM on the split X (affine constraints) = Z (PSD, trace-capped); the repaired Z is returned.
inline SdpResult solve_sdp(const SdpProblem& p, const SdpOptions& opt = {}) {
    p.validate();
    const auto n = Eigen::Index(p.size());
    SdpResult res;
    if (n == 0) {
        res.status = SdpStatus::optimal;
        res.matrix = MatrixXd(0, 0);
        return res;
    }
    const double scale = std::max(1.0, p.cost.cwiseAbs().maxCoeff());
    const MatrixXd c = p.cost / scale;
    double rho = opt.rho;
    MatrixXd z = MatrixXd::Zero(n, n);
    if (p.fixed_diagonal) z.setIdentity();
    MatrixXd u = MatrixXd::Zero(n, n), x = z;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        x = detail::project_pattern(z - u + c / rho, p);
        MatrixXd z_prev = z;
        z = detail::project_cone(x + u, p);
        u += x - z;
        double r = (x - z).norm(), s = rho * (z - z_prev).norm();
        double eps = opt.tol * std::max(1.0, std::max(x.norm(), z.norm()));
        if (r < eps && s < eps) {
            res.status = SdpStatus::optimal;
            ++it;
            break;
        }
        if (it % 50 == 49) {
            if (r > 10 * s) {
                rho *= 2;
                u /= 2;
            } else if (s > 10 * r) {
                rho /= 2;
                u *= 2;
            }
        }
    }
    res.iterations = it;
    MatrixXd m = detail::repair(z, p);
    double value = (p.cost.array() * m.array()).sum();
    if (!p.fixed_diagonal && value < 0) {
        // The zero matrix is feasible with value 0.
        m.setZero();
        value = 0;
    }
    res.matrix = m;
    res.value = value;
    res.min_eigenvalue = detail::min_eigenvalue(m);
    res.pattern_violation = (m - detail::project_pattern(m, p)).cwiseAbs().maxCoeff();
    res.trace_slack = p.fixed_diagonal ? (m.diagonal().array() - 1.0).abs().maxCoeff() : p.tau - m.trace();
    if (p.fixed_diagonal) {
        // Dual certificate: Diag(y) - C PSD bounds the optimum by sum(y); y from complementary slackness.
        VectorXd y = (p.cost * m).diagonal();
        MatrixXd d = MatrixXd(y.asDiagonal()) - p.cost;
        double lmin = detail::min_eigenvalue(d);
        if (lmin < 0) y.array() += -lmin;
        res.dual_bound = y.sum();
    }
    return res;
}

template <class T>
CertificateMatrix<T> convert_certificate_to(const CertificateMatrix<Rational>& m);

template <>
inline CertificateMatrix<Rational> convert_certificate_to<Rational>(const CertificateMatrix<Rational>& m) {
    return m;
}

template <>
inline CertificateMatrix<double> convert_certificate_to<double>(const CertificateMatrix<Rational>& m) {
    Matrix<double> e(m.entries.rows, m.entries.cols);
    for (std::size_t i = 0; i < e.data.size(); ++i) e.data[i] = m.entries.data[i].get_d();
    return CertificateMatrix<double>(m.events, e);
}

// C(P)_uv = P_u P_v for u != v, C(P)_uu = P_u^2 - P_u, over the box's support.
template <class T>
struct CertificateSdpResult {
    SdpResult sdp;
    std::vector<std::size_t> events;
    // Solver output rounded to dyadic rationals after the PSD repair.
    std::optional<CertificateMatrix<Rational>> certificate;
    bool verified = false;
    T verified_value = T(0);
};

inline Rational dyadic(double v, int bits = 40) {
    const double s = std::ldexp(1.0, bits);
    return Rational(std::nearbyint(v * s)) / Rational(std::ldexp(1.0, bits));
}

template <class T>
CertificateSdpResult<T> solve_certificate_sdp(const Box<T>& box, const OrthogonalityGraph& g, double tau = 1.0,
                                              const SdpOptions& opt = {}) {
    if (!(box.scenario == g.scenario())) throw std::invalid_argument("box and graph scenarios differ");
    CertificateSdpResult<T> out;
    for (std::size_t e = 0; e < box.size(); ++e)
        if (is_positive<T>(box[e], 0.0)) out.events.push_back(e);
    const auto n = out.events.size();
    SdpProblem p;
    p.cost = MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
    p.allowed.assign(n * n, 0);
    p.tau = tau;
    for (std::size_t i = 0; i < n; ++i) {
        double pi = to_double(box[out.events[i]]);
        for (std::size_t j = 0; j < n; ++j) {
            double pj = to_double(box[out.events[j]]);
            p.cost(i, j) = i == j ? pi * pi - pi : pi * pj;
            if (i != j) p.allowed[i * n + j] = g.adjacent(out.events[i], out.events[j]) ? 1 : 0;
        }
    }
    out.sdp = solve_sdp(p, opt);
    if (out.sdp.value <= 0) return out;
    // Exact re-verification: round to a dyadic grid after adding a margin that survives the rounding.
    MatrixXd m = out.sdp.matrix;
    const double margin = double(n) * std::ldexp(1.0, -38);
    m += margin * MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
    Matrix<Rational> q(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            Rational v = (i != j && !p.allowed[i * n + j]) ? Rational(0) : dyadic(0.5 * (m(i, j) + m(j, i)));
            q(i, j) = v;
            q(j, i) = v;
        }
    CertificateMatrix<Rational> cert(out.events, q);
    out.certificate = cert;
    auto check = check_certificate(cert, g);
    if (!check.valid()) return out;
    out.verified_value = certificate_value(convert_certificate_to<T>(cert), box);
    out.verified = true;
    return out;
}

// Quantum (Tsirelson) bias of an XOR game: max sum_ij G_ij C_{i, ma+j} over correlation matrices C.
struct EllipticResult {
    double value = 0;
    double dual_bound = 0;
    SdpStatus status = SdpStatus::max_iter;
    int iterations = 0;
    MatrixXd correlation;
};

inline EllipticResult solve_elliptope(const MatrixXd& game, const SdpOptions& opt = {}) {
    const auto ma = game.rows(), mb = game.cols();
    if (ma != mb) throw std::invalid_argument("elliptope bias needs a square game matrix");
    SdpProblem p;
    p.fixed_diagonal = true;
    p.cost = MatrixXd::Zero(ma + mb, ma + mb);
    p.cost.topRightCorner(ma, mb) = 0.5 * game;
    p.cost.bottomLeftCorner(mb, ma) = 0.5 * game.transpose();
    auto r = solve_sdp(p, opt);
    EllipticResult out;
    out.value = r.value;  // each off-diagonal half of the cost carries G/2
    out.dual_bound = r.dual_bound.value_or(r.value);
    out.status = r.status;
    out.iterations = r.iterations;
    out.correlation = r.matrix;
    return out;
}

inline double solve_elliptope_bias(const MatrixXd& game, const SdpOptions& opt = {}) {
    return solve_elliptope(game, opt).value;
}

}  // namespace qbell
