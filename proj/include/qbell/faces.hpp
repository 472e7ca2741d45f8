#pragma once

#include "qbell/box.hpp"
#include "qbell/box_io.hpp"
#include "qbell/linalg.hpp"
#include "qbell/lp.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <vector>

namespace qbell {

struct PrNeighbor {
    DeterministicStrategy strategy;  // (a0, a1) and (b0, b1)
    int violated_x = 0, violated_y = 0;
};

inline bool pr_constraint_holds(int k, int x, int y, int a, int b) { return ((b - a) % k + k) % k == (x * y) % k; }

// Deterministic boxes meeting exactly three of the four constraints (b-a) mod k = xy, ordered by the
// (x,y,a,b) event of the violated setting.
inline std::vector<PrNeighbor> pr_neighbor_strategies(int k, double cap = kDefaultEnumerationCap) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (double(k) * k * k * k > cap) throw std::length_error("neighbor enumeration exceeds cap");
    std::vector<std::pair<std::array<int, 4>, PrNeighbor>> found;
    for (int a0 = 0; a0 < k; ++a0)
        for (int a1 = 0; a1 < k; ++a1)
            for (int b0 = 0; b0 < k; ++b0)
                for (int b1 = 0; b1 < k; ++b1) {
                    int a[2] = {a0, a1}, b[2] = {b0, b1};
                    int ok = 0, vx = -1, vy = -1;
                    for (int x = 0; x < 2; ++x)
                        for (int y = 0; y < 2; ++y) {
                            if (pr_constraint_holds(k, x, y, a[x], b[y]))
                                ++ok;
                            else
                                vx = x, vy = y;
                        }
                    if (ok != 3) continue;
                    PrNeighbor n{{{a0, a1}, {b0, b1}}, vx, vy};
                    found.push_back({{vx, vy, a[vx], b[vy]}, n});
                }
    std::sort(found.begin(), found.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    std::vector<PrNeighbor> out;
    for (auto& f : found) out.push_back(f.second);
    return out;
}

template <class T>
std::vector<Box<T>> pr_neighbors(int k, double cap = kDefaultEnumerationCap) {
    BellScenario s(2, 2, k, k);
    std::vector<Box<T>> out;
    for (const auto& n : pr_neighbor_strategies(k, cap)) out.push_back(deterministic_box<T>(s, n.strategy));
    return out;
}

template <class T>
struct FaceSpec {
    int k = 2;
    std::vector<int> neighbors;
    std::vector<T> weights;  // weights[0] is the PR^(k) weight c_NS

    const T& c_ns() const { return weights.at(0); }
    int dimension() const { return int(neighbors.size()); }

    void validate(double tol = 1e-12) const {
        if (k < 2) throw std::invalid_argument("face spec: k must be >= 2");
        if (weights.size() != neighbors.size() + 1)
            throw std::invalid_argument("face spec: need one weight for PR plus one per neighbor");
        std::set<int> seen;
        for (int id : neighbors) {
            if (id < 0 || id >= 4 * k) throw std::invalid_argument("face spec: neighbor id out of range");
            if (!seen.insert(id).second) throw std::invalid_argument("face spec: duplicate neighbor id");
        }
        T total(0);
        for (const auto& w : weights) {
            if (is_negative<T>(w, tol)) throw std::invalid_argument("face spec: negative weight");
            total += w;
        }
        if (!approx_equal<T>(total, T(1), tol)) throw std::invalid_argument("face spec: weights do not sum to 1");
    }
};

template <class T>
Box<T> face_box(const FaceSpec<T>& spec) {
    spec.validate();
    auto all = pr_neighbors<T>(spec.k);
    std::vector<Box<T>> boxes{pr_box<T>(spec.k)};
    for (int id : spec.neighbors) boxes.push_back(all[id]);
    return mix(boxes, spec.weights);
}

template <class T>
int face_dimension(const FaceSpec<T>& spec) {
    spec.validate();
    if (spec.neighbors.empty()) return 0;
    auto all = pr_neighbors<Rational>(spec.k);
    auto pr = pr_box<Rational>(spec.k);
    Matrix<Rational> diff(spec.neighbors.size(), pr.size());
    for (std::size_t r = 0; r < spec.neighbors.size(); ++r)
        for (std::size_t c = 0; c < pr.size(); ++c) diff(r, c) = all[spec.neighbors[r]][c] - pr[c];
    return int(rank(diff));
}

template <class T>
json face_spec_to_json(const FaceSpec<T>& spec) {
    json w = json::array();
    for (const auto& v : spec.weights) w.push_back(scalar_to_json(v));
    return json{{"k", spec.k}, {"neighbors", spec.neighbors}, {"weights", w}};
}

template <class T>
FaceSpec<T> face_spec_from_json(const json& j) {
    FaceSpec<T> spec;
    try {
        spec.k = j.at("k").get<int>();
        spec.neighbors = j.at("neighbors").get<std::vector<int>>();
        for (const auto& w : j.at("weights")) spec.weights.push_back(scalar_from_json<T>(w));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad face spec: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("bad face spec: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return spec;
}

// Dimension of the smallest face of the no-signaling polytope containing the box: the
// affine dimension of boxes supported on the same events that satisfy normalization and no-signaling.
template <class T>
std::size_t ns_face_dimension(const Box<T>& box, double tol = 1e-12) {
    const auto& s = box.scenario;
    std::vector<std::size_t> support;
    for (std::size_t e = 0; e < box.size(); ++e)
        if (!is_zero<T>(box.probs[e], tol)) support.push_back(e);
    std::vector<std::vector<Rational>> rows;
    auto row_of = [&](auto coeff) {
        std::vector<Rational> r(support.size());
        for (std::size_t j = 0; j < support.size(); ++j) r[j] = coeff(EventIndex::from_flat(s, support[j]));
        rows.push_back(std::move(r));
    };
    for (int x = 0; x < s.ma; ++x)
        for (int y = 0; y < s.mb; ++y)
            row_of([&](const EventIndex& e) { return Rational(e.x == x && e.y == y ? 1 : 0); });
    for (int x = 0; x < s.ma; ++x)
        for (int a = 0; a < s.ka; ++a)
            for (int y = 1; y < s.mb; ++y)
                row_of([&](const EventIndex& e) {
                    if (e.x != x || e.a != a) return Rational(0);
                    return Rational(e.y == 0 ? 1 : (e.y == y ? -1 : 0));
                });
    for (int y = 0; y < s.mb; ++y)
        for (int b = 0; b < s.kb; ++b)
            for (int x = 1; x < s.ma; ++x)
                row_of([&](const EventIndex& e) {
                    if (e.y != y || e.b != b) return Rational(0);
                    return Rational(e.x == 0 ? 1 : (e.x == x ? -1 : 0));
                });
    Matrix<Rational> m(rows.size(), support.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < support.size(); ++j) m(i, j) = rows[i][j];
    return support.size() - rank(m);
}

template <class T>
struct MembershipResult {
    bool inside = false;
    std::vector<T> weights;     // per vertex when inside
    std::vector<T> separating;  // per event, plus a trailing constant, when outside
    T margin = T(0);
};

template <class T>
MembershipResult<T> local_membership(const Box<T>& box, const std::vector<Box<T>>& vertices, double tol = 1e-9) {
    if (vertices.empty()) throw std::invalid_argument("local_membership: empty vertex list");
    std::vector<std::vector<T>> pts;
    for (const auto& v : vertices) {
        if (!(v.scenario == box.scenario)) throw std::invalid_argument("local_membership: scenario mismatch");
        pts.push_back(v.probs);
    }
    auto r = convex_combination(pts, box.probs, tol);
    return {r.feasible, r.weights, r.separating, r.margin};
}

}  // namespace qbell
