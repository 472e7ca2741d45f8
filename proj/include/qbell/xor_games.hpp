#pragma once

#include "qbell/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

using SignVector = std::vector<int>;
using IntMatrix = Matrix<long long>;

inline void check_sign_vector(const SignVector& v) {
    for (int e : v)
        if (e != 1 && e != -1) throw std::invalid_argument("sign vector entries must be +1 or -1");
}

// v_j alternates blocks of 2^{r-j} entries, +1 first; the first 2^r rows list every pattern lexicographically.
inline std::vector<SignVector> lexicographic_vectors(int r, std::size_t rows) {
    if (r < 1) throw std::invalid_argument("r >= 1 required");
    if (r > 30 || (std::size_t(1) << r) > rows) throw std::invalid_argument("2^r exceeds the row count");
    std::vector<SignVector> out;
    for (int j = 1; j <= r; ++j) {
        const std::size_t block = std::size_t(1) << (r - j);
        SignVector v(rows);
        for (std::size_t i = 0; i < rows; ++i) v[i] = (i / block) % 2 == 0 ? 1 : -1;
        out.push_back(std::move(v));
    }
    return out;
}

inline constexpr std::size_t kMaxGeneralPositionVectors = 20;

// For every I, the entrywise product of (1 + v_j) over j in I and (1 - v_j) over j not in I is nonzero.
inline bool general_position_check(const std::vector<SignVector>& R) {
    if (R.empty()) return true;
    if (R.size() > kMaxGeneralPositionVectors) throw std::invalid_argument("general position check capped at 20 vectors");
    const std::size_t rows = R[0].size();
    for (const auto& v : R) {
        if (v.size() != rows) throw std::invalid_argument("sign vectors differ in length");
        check_sign_vector(v);
    }
    const std::size_t r = R.size();
    for (std::uint32_t I = 0; I < (1u << r); ++I) {
        bool nonzero = false;
        for (std::size_t i = 0; i < rows && !nonzero; ++i) {
            bool row_ok = true;
            for (std::size_t j = 0; j < r && row_ok; ++j) {
                const int want = (I >> j) & 1 ? 1 : -1;  // 1 + v vanishes unless v = 1, 1 - v unless v = -1
                row_ok = R[j][i] == want;
            }
            nonzero = row_ok;
        }
        if (!nonzero) return false;
    }
    return true;
}

// Sign of the inner product, 0 on ties.
inline int star(const SignVector& ri, const SignVector& rj) {
    if (ri.size() != rj.size()) throw std::invalid_argument("star needs equal lengths");
    long long s = 0;
    for (std::size_t t = 0; t < ri.size(); ++t) s += static_cast<long long>(ri[t]) * rj[t];
    return s > 0 ? 1 : (s < 0 ? -1 : 0);
}

// i-1 in binary (k bits, most significant first), 0 -> +1 and 1 -> -1. i is 1-based.
inline SignVector tilde(std::size_t i, int k) {
    SignVector v(static_cast<std::size_t>(k), 1);
    for (int b = 0; b < k; ++b) v[std::size_t(b)] = ((i - 1) >> (k - 1 - b)) & 1 ? -1 : 1;
    return v;
}

inline constexpr int kMaxGameK = 12;

// Entry (i,j) = (1, i~_k) star (-1, j~_k).
inline IntMatrix build_game(int k) {
    if (k < 2 || k > kMaxGameK) throw std::invalid_argument("game family needs 2 <= k <= 12");
    const std::size_t n = std::size_t(1) << k;
    IntMatrix g(n, n);
    std::vector<SignVector> alice, bob;
    for (std::size_t i = 1; i <= n; ++i) {
        auto t = tilde(i, k);
        SignVector a{1}, b{-1};
        a.insert(a.end(), t.begin(), t.end());
        b.insert(b.end(), t.begin(), t.end());
        alice.push_back(std::move(a));
        bob.push_back(std::move(b));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = star(alice[i], bob[j]);
    return g;
}

// Alice's input i reads row i of the stacked vectors, Bob's input j reads row m + j.
inline IntMatrix game_from_vectors(const std::vector<SignVector>& R) {
    if (R.empty()) throw std::invalid_argument("no vectors");
    const std::size_t rows = R[0].size();
    if (rows % 2) throw std::invalid_argument("row count must be even");
    const std::size_t m = rows / 2;
    auto row = [&](std::size_t i) {
        SignVector r;
        for (const auto& v : R) r.push_back(v.at(i));
        return r;
    };
    IntMatrix g(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) g(i, j) = star(row(i), row(m + j));
    return g;
}

inline IntMatrix submatrix(const IntMatrix& m, std::size_t r0, std::size_t c0, std::size_t n) {
    if (r0 + n > m.rows || c0 + n > m.cols) throw std::out_of_range("block outside matrix");
    IntMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = m(r0 + i, c0 + j);
    return out;
}

// Top-left and top-right x by x corners.
inline IntMatrix corner(const IntMatrix& g, std::size_t x) { return submatrix(g, 0, 0, x); }
inline IntMatrix corner_bar(const IntMatrix& g, std::size_t x) { return submatrix(g, 0, g.cols - x, x); }

struct BlockReport {
    bool ok = true;
    std::string where;  // first failing block, empty when ok
    int depth = 0;      // recursion levels checked for the A and B ladders
};

namespace detail {

inline bool fail(BlockReport& r, std::string where) {
    if (r.ok) {
        r.ok = false;
        r.where = std::move(where);
    }
    return false;
}

// A_{2^j}: diagonal quadrants equal (recursing into them), off-diagonal quadrants are corners of small.
inline bool check_a_ladder(const IntMatrix& a, const IntMatrix& small, int level, BlockReport& rep) {
    const std::size_t n = a.rows;
    if (n == 1) return a(0, 0) == 1 ? true : fail(rep, "A_1 at level " + std::to_string(level));
    const std::size_t h = n / 2;
    const auto expect = corner(small, h);
    if (!(submatrix(a, 0, h, h) == expect) || !(submatrix(a, h, 0, h) == expect))
        return fail(rep, "A_" + std::to_string(n) + " off-diagonal quadrant");
    const auto top = submatrix(a, 0, 0, h);
    if (!(submatrix(a, h, h, h) == top)) return fail(rep, "A_" + std::to_string(n) + " diagonal quadrants differ");
    rep.depth = std::max(rep.depth, level + 1);
    return check_a_ladder(top, small, level + 1, rep);
}

// B_{2^j}: diagonal quadrants are top-right corners of small, off-diagonal quadrants equal (recursing).
inline bool check_b_ladder(const IntMatrix& b, const IntMatrix& small, int level, BlockReport& rep) {
    const std::size_t n = b.rows;
    if (n == 1) return b(0, 0) == -1 ? true : fail(rep, "B_1 at level " + std::to_string(level));
    const std::size_t h = n / 2;
    const auto expect = corner_bar(small, h);
    if (!(submatrix(b, 0, 0, h) == expect) || !(submatrix(b, h, h, h) == expect))
        return fail(rep, "B_" + std::to_string(n) + " diagonal quadrant");
    const auto off = submatrix(b, 0, h, h);
    if (!(submatrix(b, h, 0, h) == off)) return fail(rep, "B_" + std::to_string(n) + " off-diagonal quadrants differ");
    rep.depth = std::max(rep.depth, level + 1);
    return check_b_ladder(off, small, level + 1, rep);
}

}  // namespace detail

// 4x4 block layout with G_{2^{k-2}} off the diagonals, equal A blocks on the diagonal, equal B blocks on the
// anti-diagonal, then the recursive A and B ladders down to A_1 = (1), B_1 = (-1).
inline BlockReport verify_block_structure(const IntMatrix& g, int k) {
    if (k < 4 || k > kMaxGameK) throw std::invalid_argument("block structure is stated for k >= 4");
    const std::size_t n = std::size_t(1) << k, q = n / 4;
    if (g.rows != n || g.cols != n) throw std::invalid_argument("game matrix size does not match k");
    BlockReport rep;
    const auto small = build_game(k - 2);
    const auto a = submatrix(g, 0, 0, q), b = submatrix(g, 0, 3 * q, q);
    for (std::size_t I = 0; I < 4; ++I)
        for (std::size_t J = 0; J < 4; ++J) {
            const auto blk = submatrix(g, I * q, J * q, q);
            const bool diag = I == J, anti = I + J == 3;
            const IntMatrix& want = diag ? a : (anti ? b : small);
            if (!(blk == want)) {
                detail::fail(rep, "block (" + std::to_string(I + 1) + "," + std::to_string(J + 1) + ")");
                return rep;
            }
        }
    if (!detail::check_a_ladder(a, small, 0, rep)) return rep;
    detail::check_b_ladder(b, small, 0, rep);
    return rep;
}

// Unnormalized Sylvester matrix, entries +-1.
inline IntMatrix hadamard(int k) {
    if (k < 0 || k > kMaxGameK) throw std::invalid_argument("hadamard order out of range");
    const std::size_t n = std::size_t(1) << k;
    IntMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = std::popcount(i & j) % 2 ? -1 : 1;
    return h;
}

inline int log2_exact(std::size_t n) {
    if (n == 0 || (n & (n - 1))) throw std::invalid_argument("size is not a power of two");
    return std::countr_zero(n);
}

// H M H with exact integers, via the fast Walsh-Hadamard transform on rows then columns.
inline IntMatrix hadamard_conjugate(const IntMatrix& m) {
    if (!m.square()) throw std::invalid_argument("square matrix required");
    const std::size_t n = m.rows;
    log2_exact(n);
    IntMatrix out = m;
    auto fwht = [n](auto&& at) {
        for (std::size_t len = 1; len < n; len <<= 1)
            for (std::size_t i = 0; i < n; i += 2 * len)
                for (std::size_t j = i; j < i + len; ++j) {
                    long long u = at(j), v = at(j + len);
                    at(j) = u + v;
                    at(j + len) = u - v;
                }
    };
    for (std::size_t r = 0; r < n; ++r) fwht([&](std::size_t c) -> long long& { return out(r, c); });
    for (std::size_t c = 0; c < n; ++c) fwht([&](std::size_t r) -> long long& { return out(r, c); });
    return out;
}

inline bool is_diagonal_in_hadamard_basis(const IntMatrix& m) {
    const auto d = hadamard_conjugate(m);
    for (std::size_t i = 0; i < d.rows; ++i)
        for (std::size_t j = 0; j < d.cols; ++j)
            if (i != j && d(i, j) != 0) return false;
    return true;
}

inline constexpr std::size_t kMaxClassicalInputs = 24;

// max over a, b in {+-1} of a^T G b. The outer player is enumerated up to a global sign flip; the inner
// player answers with the sign of each column sum.
inline long long classical_bias(const IntMatrix& g) {
    const bool transpose = g.rows > g.cols;
    const std::size_t outer = transpose ? g.cols : g.rows, inner = transpose ? g.rows : g.cols;
    auto at = [&](std::size_t o, std::size_t i) { return transpose ? g(i, o) : g(o, i); };
    if (outer == 0) return 0;
    if (outer > kMaxClassicalInputs) throw std::invalid_argument("classical bias enumeration capped at 24 inputs");
    long long best = 0;
    const std::uint64_t half = std::uint64_t(1) << (outer - 1);
    for (std::uint64_t mask = 0; mask < half; ++mask) {
        long long v = 0;
        for (std::size_t i = 0; i < inner; ++i) {
            long long col = 0;
            for (std::size_t o = 0; o < outer; ++o) col += (mask >> o) & 1 ? -at(o, i) : at(o, i);
            v += std::llabs(col);
        }
        best = std::max(best, v);
    }
    return best;
}

inline Eigen::MatrixXd to_eigen(const IntMatrix& m) {
    Eigen::MatrixXd out(Eigen::Index(m.rows), Eigen::Index(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(Eigen::Index(i), Eigen::Index(j)) = double(m(i, j));
    return out;
}

}  // namespace qbell
