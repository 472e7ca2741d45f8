#pragma once

#include "qbell/scalar.hpp"

#include <stdexcept>
#include <vector>

namespace qbell {

template <class T>
struct ConvexFeasibility {
    bool feasible = false;
    std::vector<T> weights;  // one per point, when feasible
    // When infeasible: y with y·(p,1) <= 0 for every point p and y·(target,1) > 0.
    std::vector<T> separating;
    T margin = T(0);
};

// Is target a convex combination of points?  Phase-I simplex with Bland's rule on a dense tableau.
template <class T>
ConvexFeasibility<T> convex_combination(const std::vector<std::vector<T>>& points, const std::vector<T>& target,
                                        double tol = 1e-9) {
    if (points.empty()) throw std::invalid_argument("empty point list");
    const std::size_t n = target.size();
    for (const auto& p : points)
        if (p.size() != n) throw std::invalid_argument("point dimension mismatch");
    const std::size_t m = n + 1;           // coordinates plus the sum-to-one row
    const std::size_t nv = points.size();  // structural columns
    const std::size_t width = nv + m + 1;  // + artificials + rhs
    const double eps = is_exact_v<T> ? 0.0 : tol;

    std::vector<T> tab(m * width, T(0));
    auto at = [&](std::size_t r, std::size_t c) -> T& { return tab[r * width + c]; };
    std::vector<int> flip(m, 1);
    for (std::size_t r = 0; r < m; ++r) {
        T rhs = r < n ? target[r] : T(1);
        if (is_negative<T>(rhs, 0.0)) flip[r] = -1;
        for (std::size_t j = 0; j < nv; ++j) at(r, j) = r < n ? points[j][r] : T(1);
        at(r, width - 1) = rhs;
        if (flip[r] < 0) {
            for (std::size_t j = 0; j < nv; ++j) at(r, j) = -at(r, j);
            at(r, width - 1) = -rhs;
        }
        at(r, nv + r) = T(1);
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t r = 0; r < m; ++r) basis[r] = nv + r;

    auto reduced_cost = [&](std::size_t j) {
        // Cost 1 on artificials, 0 on structurals.
        T rc = j >= nv ? T(1) : T(0);
        for (std::size_t r = 0; r < m; ++r)
            if (basis[r] >= nv) rc -= at(r, j);
        return rc;
    };

    for (std::size_t iter = 0;; ++iter) {
        if (iter > 100000) throw std::runtime_error("simplex iteration limit");
        std::size_t enter = width;
        for (std::size_t j = 0; j < nv; ++j) {
            bool in_basis = false;
            for (auto b : basis) in_basis = in_basis || b == j;
            if (in_basis) continue;
            if (is_negative<T>(reduced_cost(j), eps)) {
                enter = j;
                break;
            }
        }
        if (enter == width) break;
        std::size_t leave = m;
        T best(0);
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_positive<T>(at(r, enter), eps)) continue;
            T ratio = at(r, width - 1) / at(r, enter);
            if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
                leave = r;
                best = ratio;
            }
        }
        if (leave == m) throw std::runtime_error("phase-I unbounded, which cannot happen");
        T piv = at(leave, enter);
        for (std::size_t c = 0; c < width; ++c) at(leave, c) /= piv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == leave || is_zero<T>(at(r, enter), 0.0)) continue;
            T f = at(r, enter);
            for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
        }
        basis[leave] = enter;
    }

    ConvexFeasibility<T> out;
    T infeas(0);
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= nv) infeas += at(r, width - 1);
    if (!is_positive<T>(infeas, eps)) {
        out.feasible = true;
        out.weights.assign(nv, T(0));
        for (std::size_t r = 0; r < m; ++r)
            if (basis[r] < nv) out.weights[basis[r]] = at(r, width - 1);
        return out;
    }
    out.separating.assign(m, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        T y(0);
        for (std::size_t r = 0; r < m; ++r)
            if (basis[r] >= nv) y += at(r, nv + i);
        out.separating[i] = flip[i] < 0 ? T(-y) : y;
    }
    out.margin = infeas;
    return out;
}

}  // namespace qbell
