#pragma once

#include "qbell/box.hpp"
#include "qbell/box_io.hpp"
#include "qbell/graph.hpp"
#include "qbell/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

// Symmetric matrix over a subset of events, zero-extended to the whole event set.
template <class T>
struct CertificateMatrix {
    std::vector<std::size_t> events;
    Matrix<T> entries;

    CertificateMatrix() = default;
    CertificateMatrix(std::vector<std::size_t> ev, Matrix<T> m, double tol = 0.0)
        : events(std::move(ev)), entries(std::move(m)) {
        if (!entries.square() || entries.rows != events.size())
            throw std::invalid_argument("certificate matrix size does not match event list");
        std::set<std::size_t> seen(events.begin(), events.end());
        if (seen.size() != events.size()) throw std::invalid_argument("certificate events must be distinct");
        for (std::size_t i = 0; i < entries.rows; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (!approx_equal<T>(entries(i, j), entries(j, i), tol))
                    throw std::invalid_argument("certificate matrix is not symmetric");
    }
    std::size_t size() const { return events.size(); }

    CertificateMatrix scaled(const T& lambda) const {
        auto m = entries;
        for (auto& v : m.data) v *= lambda;
        return CertificateMatrix(events, m);
    }
};

// <P|M|P> - sum_i M_ii P_i over the certificate's events.
template <class T>
T certificate_value(const CertificateMatrix<T>& M, const Box<T>& box) {
    for (auto e : M.events)
        if (e >= box.size()) throw std::out_of_range("certificate event outside the scenario");
    T v(0);
    const std::size_t n = M.size();
    for (std::size_t i = 0; i < n; ++i) {
        const T& pi = box[M.events[i]];
        v -= M.entries(i, i) * pi;
        for (std::size_t j = 0; j < n; ++j) v += M.entries(i, j) * pi * box[M.events[j]];
    }
    return v;
}

struct CertificateCheck {
    bool support_ok = true;
    bool psd = true;
    std::optional<std::pair<std::size_t, std::size_t>> support_violation;  // flat event pair
    double min_pivot_or_eigenvalue = 0.0;
    bool valid() const { return support_ok && psd; }
};

template <class T>
CertificateCheck check_certificate(const CertificateMatrix<T>& M, const OrthogonalityGraph& g, double tol = 1e-9) {
    CertificateCheck c;
    const std::size_t n = M.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (M.events[i] >= g.size()) throw std::out_of_range("certificate event outside the graph");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (is_zero<T>(M.entries(i, j), is_exact_v<T> ? 0.0 : tol)) continue;
            if (!g.adjacent(M.events[i], M.events[j])) {
                c.support_ok = false;
                c.support_violation = std::make_pair(M.events[i], M.events[j]);
            }
        }
    }
    if constexpr (is_exact_v<T>) {
        auto rep = psd_ldlt(M.entries);
        c.psd = rep.psd;
        if (!rep.pivots.empty()) c.min_pivot_or_eigenvalue = *std::min_element(rep.pivots.begin(), rep.pivots.end());
    } else {
        if (!M.entries.symmetric()) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < i; ++j)
                    if (std::abs(M.entries(i, j) - M.entries(j, i)) > tol)
                        throw std::invalid_argument("certificate matrix is not symmetric");
        }
        if (n > 0) {
            Eigen::MatrixXd e(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) e(i, j) = M.entries(i, j);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
            c.min_pivot_or_eigenvalue = es.eigenvalues().minCoeff();
            c.psd = c.min_pivot_or_eigenvalue >= -tol;
        }
    }
    return c;
}

template <class T>
bool is_valid_certificate(const CertificateMatrix<T>& M, const OrthogonalityGraph& g, double tol = 1e-9) {
    return check_certificate(M, g, tol).valid();
}

template <class T>
json certificate_to_json(const CertificateMatrix<T>& M) {
    json entries = json::array();
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = i; j < M.size(); ++j)
            if (!is_zero<T>(M.entries(i, j), 0.0)) entries.push_back(json::array({i, j, scalar_to_json(M.entries(i, j))}));
    return json{{"events", M.events}, {"entries", entries}};
}

template <class T>
CertificateMatrix<T> certificate_from_json(const json& j) {
    try {
        auto events = j.at("events").get<std::vector<std::size_t>>();
        Matrix<T> m(events.size(), events.size());
        for (const auto& e : j.at("entries")) {
            auto i = e.at(0).get<std::size_t>(), k = e.at(1).get<std::size_t>();
            if (i >= events.size() || k >= events.size()) throw ParseError("certificate entry index out of range");
            T v = scalar_from_json<T>(e.at(2));
            m(i, k) = v;
            m(k, i) = v;
        }
        return CertificateMatrix<T>(std::move(events), std::move(m));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad certificate: ") + e.what());
    }
}

}  // namespace qbell
