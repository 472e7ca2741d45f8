#pragma once

#include "qbell/scalar.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qbell {

// Small dense row-major matrix usable with exact rationals.
template <class T>
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, const T& fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool operator==(const Matrix&) const = default;

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }
    bool square() const { return rows == cols; }
    bool symmetric() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = i + 1; j < cols; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }
};

template <class T>
std::size_t rank(Matrix<T> m, double tol = 1e-9) {
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
        std::size_t piv = m.rows;
        if constexpr (is_exact_v<T>) {
            for (std::size_t i = r; i < m.rows; ++i)
                if (sgn(m(i, c)) != 0) {
                    piv = i;
                    break;
                }
        } else {
            double best = tol;
            for (std::size_t i = r; i < m.rows; ++i)
                if (std::abs(m(i, c)) > best) {
                    best = std::abs(m(i, c));
                    piv = i;
                }
        }
        if (piv == m.rows) continue;
        for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(r, j), m(piv, j));
        for (std::size_t i = r + 1; i < m.rows; ++i) {
            if (is_zero<T>(m(i, c), 0.0)) continue;
            T f = m(i, c) / m(r, c);
            for (std::size_t j = c; j < m.cols; ++j) m(i, j) -= f * m(r, j);
        }
        ++r;
    }
    return r;
}

struct PsdReport {
    bool psd = true;
    bool definite = true;
    // Position (in the original indexing) where a negative pivot or an inconsistent null direction showed up.
    std::optional<std::size_t> failure_index;
    std::vector<double> pivots;
};

// Symmetric elimination with diagonal pivoting. A negative pivot, or a zero remaining diagonal with a
// nonzero off-diagonal in its row, proves the matrix is not PSD.
template <class T>
PsdReport psd_ldlt(const Matrix<T>& input, double tol = 0.0) {
    if (!input.square()) throw std::invalid_argument("psd check needs a square matrix");
    if (!input.symmetric()) {
        bool ok = true;
        if constexpr (!is_exact_v<T>) {
            ok = true;
            for (std::size_t i = 0; i < input.rows; ++i)
                for (std::size_t j = 0; j < i; ++j)
                    if (std::abs(input(i, j) - input(j, i)) > tol) ok = false;
        } else {
            ok = false;
        }
        if (!ok) throw std::invalid_argument("psd check needs a symmetric matrix");
    }
    Matrix<T> a = input;
    const std::size_t n = a.rows;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<bool> done(n, false);
    PsdReport rep;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t p = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            if (p == n || a(i, i) > a(p, p)) p = i;
        }
        const T piv = a(p, p);
        if (is_negative<T>(piv, tol)) {
            rep.psd = rep.definite = false;
            rep.failure_index = p;
            rep.pivots.push_back(to_double(piv));
            return rep;
        }
        if (!is_positive<T>(piv, tol)) {
            // Largest remaining diagonal is zero: the remaining block must vanish.
            rep.definite = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (done[i]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (done[j] || i == j) continue;
                    if (!is_zero<T>(a(i, j), tol)) {
                        rep.psd = false;
                        rep.failure_index = i;
                        return rep;
                    }
                }
                rep.pivots.push_back(to_double(a(i, i)));
            }
            return rep;
        }
        rep.pivots.push_back(to_double(piv));
        done[p] = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || is_zero<T>(a(i, p), 0.0)) continue;
            T f = a(i, p) / piv;
            for (std::size_t j = 0; j < n; ++j) {
                if (done[j]) continue;
                a(i, j) -= f * a(p, j);
            }
        }
    }
    return rep;
}

}  // namespace qbell
