#include "qbell/chain.hpp"
#include "qbell/exclusion.hpp"
#include "qbell/faces.hpp"
#include "qbell/report.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace qbell;

namespace {

FaceSpec<Rational> uniform_face(int k, std::vector<int> ids, Rational c) {
    FaceSpec<Rational> f;
    f.k = k;
    f.weights = {c};
    for (std::size_t i = 0; i < ids.size(); ++i) f.weights.push_back((1 - c) / Rational(long(ids.size())));
    f.neighbors = std::move(ids);
    return f;
}

int satisfied_constraints(const Box<Rational>& box, int k) {
    int n = 0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    if (box(a, b, x, y) == 1 && pr_constraint_holds(k, x, y, a, b)) ++n;
    return n;
}

}  // namespace

TEST(PrNeighbors, CountIsFourK) {
    for (int k = 2; k <= 6; ++k) EXPECT_EQ(pr_neighbors<Rational>(k).size(), std::size_t(4 * k)) << "k=" << k;
}

TEST(PrNeighbors, EachViolatesExactlyOneConstraint) {
    for (int k = 2; k <= 4; ++k)
        for (const auto& n : pr_neighbors<Rational>(k)) EXPECT_EQ(satisfied_constraints(n, k), 3);
}

TEST(PrNeighbors, IdsOrderedByViolatedConstraint) {
    auto ns = pr_neighbor_strategies(3);
    for (std::size_t i = 1; i < ns.size(); ++i) {
        auto key = [](const PrNeighbor& n) {
            return std::tuple(n.violated_x, n.violated_y, n.strategy.alice[std::size_t(n.violated_x)],
                              n.strategy.bob[std::size_t(n.violated_y)]);
        };
        EXPECT_LT(key(ns[i - 1]), key(ns[i]));
    }
}

TEST(PrNeighbors, CapIsEnforced) { EXPECT_THROW(pr_neighbors<Rational>(4, 100), std::length_error); }

TEST(FaceBox, ZeroDimensionalFaceIsPr) {
    EXPECT_EQ(face_box(uniform_face(2, {}, Rational(1))), pr_box<Rational>(2));
    EXPECT_EQ(face_box(uniform_face(3, {}, Rational(1))), pr_box<Rational>(3));
}

// Every one-dimensional face of PR(2): under the canonical chains exactly one adjacent pair drops to c_NS.
TEST(FaceBox, OneDimensionalFaceHasOneUnsaturatedPair) {
    AnalyticExcluder ex(2);
    for (int id = 0; id < 8; ++id) {
        auto box = face_box(FaceSpec<Rational>{2, {id}, {make_rational(7, 10), make_rational(3, 10)}});
        bool found = false;
        for (const auto& ch : ex.chains5()) {
            if (std::any_of(ch.elements.begin(), ch.elements.end(), [](const auto& e) { return e.size() != 1; }))
                continue;
            auto s = element_sums(ch, box);
            int unsat = 0;
            Rational low(1);
            for (std::size_t i = 0; i < 5; ++i) {
                Rational q = s[i] + s[(i + 1) % 5];
                if (q != 1) {
                    ++unsat;
                    low = q;
                }
            }
            if (unsat == 1) {
                EXPECT_EQ(low, make_rational(7, 10));
                found = true;
            }
        }
        EXPECT_TRUE(found) << "neighbor " << id;
    }
}

TEST(FaceBox, AllNeighborsInteriorIsNoSignaling) {
    for (int k = 2; k <= 4; ++k) {
        std::vector<int> all(static_cast<std::size_t>(4 * k), 0);
        std::iota(all.begin(), all.end(), 0);
        auto box = face_box(uniform_face(k, all, make_rational(1, 5)));
        EXPECT_TRUE(validate_no_signaling(box).ok);
        EXPECT_NO_THROW(check_box(box));
    }
}

TEST(FaceBox, InvalidWeightsRejected) {
    EXPECT_THROW(face_box(FaceSpec<Rational>{2, {0}, {make_rational(1, 2), make_rational(1, 3)}}),
                 std::invalid_argument);
    EXPECT_THROW(face_box(FaceSpec<Rational>{2, {0}, {make_rational(3, 2), make_rational(-1, 2)}}),
                 std::invalid_argument);
    EXPECT_THROW(face_box(FaceSpec<Rational>{2, {8}, {make_rational(1, 2), make_rational(1, 2)}}),
                 std::invalid_argument);
    EXPECT_THROW(face_box(FaceSpec<Rational>{2, {1, 1}, {make_rational(1, 2), make_rational(1, 4), make_rational(1, 4)}}),
                 std::invalid_argument);
    EXPECT_THROW(face_box(FaceSpec<Rational>{2, {0, 1}, {Rational(1)}}), std::invalid_argument);
}

TEST(FaceDimension, Examples) {
    EXPECT_EQ(face_dimension(uniform_face(2, {}, Rational(1))), 0);
    EXPECT_EQ(face_dimension(uniform_face(2, {0, 1, 2, 3, 4, 5, 6, 7}, make_rational(1, 2))), 8);
    std::vector<int> all12(12, 0);
    std::iota(all12.begin(), all12.end(), 0);
    EXPECT_EQ(face_dimension(uniform_face(3, all12, make_rational(1, 2))), 12);
}

// Simplex property: any neighbor subset is affinely independent together with PR^(k).
TEST(FaceDimension, EqualsCardinalityOnRandomSubsets) {
    std::mt19937_64 rng(11);
    for (int k = 2; k <= 4; ++k)
        for (int t = 0; t < 20; ++t) {
            std::vector<int> all(static_cast<std::size_t>(4 * k), 0);
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng);
            const int d = int(rng() % std::uint64_t(4 * k + 1));
            all.resize(std::size_t(d));
            std::sort(all.begin(), all.end());
            auto spec = sample_face_spec(k, all, rng);
            EXPECT_EQ(face_dimension(spec), d);
        }
}

TEST(NsFaceDimension, MatchesNeighborCount) {
    std::mt19937_64 rng(5);
    for (int d = 0; d <= 4; ++d)
        for (const auto& ids : subsets_of_size(8, d)) {
            if (rng() % 4) continue;
            EXPECT_EQ(ns_face_dimension(face_box(sample_face_spec(2, ids, rng))), std::size_t(d));
        }
}

TEST(LocalMembership, Examples) {
    BellScenario s(2, 2, 2, 2);
    auto verts = enumerate_local_deterministic<Rational>(s);
    auto u = local_membership(uniform_box<Rational>(s), verts);
    ASSERT_TRUE(u.inside);
    Rational total(0);
    for (const auto& w : u.weights) {
        EXPECT_GE(w, 0);
        total += w;
    }
    EXPECT_EQ(total, 1);

    auto pr = local_membership(pr_box<Rational>(2), verts);
    EXPECT_FALSE(pr.inside);
    ASSERT_EQ(pr.separating.size(), s.events() + 1);
    // The separating functional is positive on PR and nonpositive on every vertex.
    auto eval = [&](const Box<Rational>& b) {
        Rational v = pr.separating.back();
        for (std::size_t i = 0; i < s.events(); ++i) v += pr.separating[i] * b[i];
        return v;
    };
    EXPECT_GT(eval(pr_box<Rational>(2)), 0);
    for (const auto& v : verts) EXPECT_LE(eval(v), 0);
}

TEST(LocalMembership, ZeroWeightOnPrRecoversMixture) {
    BellScenario s(2, 2, 2, 2);
    auto verts = enumerate_local_deterministic<Rational>(s);
    FaceSpec<Rational> f{2, {1, 4, 6}, {Rational(0), make_rational(1, 2), make_rational(1, 3), make_rational(1, 6)}};
    auto box = face_box(f);
    auto r = local_membership(box, verts);
    ASSERT_TRUE(r.inside);
    auto rebuilt = mix(verts, r.weights);
    EXPECT_EQ(rebuilt, box);
}

TEST(LocalMembership, EmptyVertexListThrows) {
    EXPECT_THROW(local_membership(pr_box<Rational>(2), {}), std::invalid_argument);
}

// Faces up to dimension 4k-4 with c_NS > 0 are nonlocal.
TEST(LocalMembership, FaceBoxesAreOutsideK2) {
    BellScenario s(2, 2, 2, 2);
    auto verts = enumerate_local_deterministic<Rational>(s);
    for (int d = 0; d <= 4; ++d)
        for (const auto& ids : subsets_of_size(8, d))
            for (auto c : {make_rational(1, 10), make_rational(1, 2), make_rational(9, 10)})
                EXPECT_FALSE(local_membership(face_box(uniform_face(2, ids, d == 0 ? Rational(1) : c)), verts).inside);
}

TEST(LocalMembership, FaceBoxesAreOutsideK3) {
    BellScenario s(2, 2, 3, 3);
    auto verts = enumerate_local_deterministic<Rational>(s);
    std::mt19937_64 rng(9);
    for (int d : {0, 3, 8}) {
        auto subsets = subsets_of_size(12, d);
        for (int t = 0; t < 3; ++t) {
            auto ids = subsets[rng() % subsets.size()];
            EXPECT_FALSE(local_membership(face_box(sample_face_spec(3, ids, rng)), verts).inside);
        }
    }
}

// The midpoint of two neighbors cannot be written using the remaining neighbors.
TEST(LocalMembership, NeighborMidpointNeedsBothNeighbors) {
    auto ns = pr_neighbors<Rational>(2);
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) {
            auto mid = mix<Rational>({ns[i], ns[j]}, {make_rational(1, 2), make_rational(1, 2)});
            std::vector<Box<Rational>> others;
            for (int l = 0; l < 8; ++l)
                if (l != i && l != j) others.push_back(ns[l]);
            others.push_back(pr_box<Rational>(2));
            EXPECT_FALSE(local_membership(mid, others).inside) << i << "," << j;
        }
}

TEST(FaceSpecJson, RoundTrip) {
    std::mt19937_64 rng(2);
    auto spec = sample_face_spec(3, {0, 4, 7, 11}, rng);
    auto back = face_spec_from_json<Rational>(face_spec_to_json(spec));
    EXPECT_EQ(back.k, spec.k);
    EXPECT_EQ(back.neighbors, spec.neighbors);
    EXPECT_EQ(back.weights, spec.weights);
    EXPECT_EQ(face_box(back), face_box(spec));
}

TEST(FaceSpecJson, RejectsBadWeights) {
    json j{{"k", 2}, {"neighbors", {0}}, {"weights", {"1/2", "1/3"}}};
    EXPECT_ANY_THROW(face_spec_from_json<Rational>(j));
}

TEST(SampleFaceSpec, WeightsAreValid) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        auto f = sample_face_spec(2, {0, 2, 5}, rng);
        EXPECT_NO_THROW(f.validate(0.0));
        EXPECT_GE(f.c_ns(), make_rational(1, 20));
        EXPECT_LE(f.c_ns(), make_rational(19, 20));
    }
}

TEST(Subsets, CountsAndOrder) {
    EXPECT_EQ(subsets_of_size(8, 4).size(), 70u);
    EXPECT_EQ(subsets_of_size(12, 0).size(), 1u);
    EXPECT_TRUE(subsets_of_size(3, 4).empty());
    auto s = subsets_of_size(5, 2);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}
