#include "qbell/exclusion.hpp"
#include "qbell/sdp.hpp"
#include "qbell/selftest.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qbell;

namespace {

constexpr double kPi = std::numbers::pi;

PlanarModel perturbed(const PlanarModel& m, std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    auto out = m;
    for (auto& t : out.theta_a) t += u(rng);
    for (auto& t : out.theta_b) t += u(rng);
    return out;
}

}  // namespace

TEST(Correlators, ChshModelTable) {
    auto E = correlators_from_model(chsh_model());
    const double h = std::sqrt(2.0) / 2;
    EXPECT_NEAR(E(0, 0), h, 1e-15);
    EXPECT_NEAR(E(0, 1), -h, 1e-15);
    EXPECT_NEAR(E(1, 0), h, 1e-15);
    EXPECT_NEAR(E(1, 1), h, 1e-15);
}

TEST(Correlators, EqualAndOrthogonalAngles) {
    PlanarModel m({0.3, 1.1}, {0.3, 1.1 + kPi / 2});
    auto E = correlators_from_model(m);
    EXPECT_NEAR(E(0, 0), 1, 1e-15);
    EXPECT_NEAR(E(1, 1), 0, 1e-15);
}

TEST(Correlators, TwoRoutesAgreeOnRandomModels) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int t = 0; t < 50; ++t) {
        const int m = 2 + int(rng() % 5);
        std::vector<double> a, b;
        for (int i = 0; i < m; ++i) {
            a.push_back(ang(rng));
            b.push_back(ang(rng));
        }
        PlanarModel model(a, b);
        auto c = correlators_closed_form(model), e = correlators_by_expectation(model);
        for (std::size_t i = 0; i < c.values.size(); ++i) EXPECT_NEAR(c.values[i], e.values[i], 1e-12);
    }
}

TEST(PlanarModel, ObservablesAreUnitaryInvolutions) {
    auto m = equal_spacing_model(4);
    for (int i = 0; i < 4; ++i) {
        Mat2 a = m.alice(i);
        EXPECT_LT((a * a - Mat2::Identity()).norm(), 1e-15);
        EXPECT_LT((a - a.adjoint()).norm(), 1e-15);
    }
    EXPECT_THROW(PlanarModel({0.1}, {0.2}), std::invalid_argument);
    EXPECT_THROW(PlanarModel({0.1, 0.2}, {0.2}), std::invalid_argument);
}

TEST(AngleTable, InvertsCosine) {
    auto E = correlators_from_model(equal_spacing_model(3));
    auto al = angle_table(E);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            EXPECT_NEAR(std::cos(al(x, y)), E(x, y), 1e-15);
            EXPECT_GE(al(x, y), 0);
            EXPECT_LE(al(x, y), kPi);
        }
}

TEST(Boundary, ChshPointIsOnBoundary) {
    auto al = angle_table(correlators_from_model(chsh_model()));
    EXPECT_NEAR(al(0, 0) + al(1, 0), kPi / 2, 1e-15);
    EXPECT_NEAR(al(0, 1) - al(1, 1), kPi / 2, 1e-15);
    EXPECT_NEAR(boundary_residual(al), 0, 1e-12);
}

TEST(Boundary, EqualSpacingIsOnBoundary) {
    for (int m = 2; m <= 6; ++m) {
        auto al = angle_table(correlators_from_model(equal_spacing_model(m)));
        for (int i = 0; i < m; ++i) EXPECT_NEAR(al(i, i), kPi / (2 * m), 1e-12);
        EXPECT_NEAR(al(0, m - 1), kPi - kPi / (2 * m), 1e-12);
        EXPECT_LT(std::abs(boundary_residual(al)), 1e-12) << "m=" << m;
    }
}

TEST(Boundary, RandomAnglesAreOffBoundary) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(0, kPi);
    int off = 0;
    for (int t = 0; t < 20; ++t) {
        PlanarModel m({ang(rng), ang(rng), ang(rng)}, {ang(rng), ang(rng), ang(rng)});
        off += std::abs(boundary_residual(angle_table(correlators_from_model(m)))) > 1e-6;
    }
    EXPECT_EQ(off, 20);
}

// Saturation of the upper and lower angle bounds between Alice's vectors.
TEST(Boundary, AngleBoundsSaturate) {
    for (int m = 2; m <= 6; ++m) {
        auto model = equal_spacing_model(m);
        auto al = angle_table(correlators_from_model(model));
        for (int i = 0; i + 1 < m; ++i)
            EXPECT_NEAR(vector_angle(model.theta_a[i], model.theta_a[i + 1]), al(i, i) + al(i + 1, i), 1e-10);
        EXPECT_NEAR(vector_angle(model.theta_a[m - 1], model.theta_a[0]), std::abs(al(m - 1, m - 1) - al(0, m - 1)),
                    1e-10);
    }
}

TEST(Tlm, ChshPivotConvention) {
    auto E = correlators_from_model(chsh_model());
    EXPECT_NEAR(tlm_residual(E, 0, 1, 1), 0, 1e-12);
    EXPECT_GT(std::abs(tlm_residual(E, 0, 1, -1)), 1);
    EXPECT_GT(std::abs(tlm_residual(E, 0, 0, 1)), 0.1);
}

TEST(Tlm, ZeroAndDeterministicTables) {
    CorrelatorTable<double> Z(2, 2);
    EXPECT_NEAR(tlm_residual(Z, 1, 1, 1), -kPi, 1e-15);
    EXPECT_NEAR(tlm_residual(Z, 1, 1, -1), kPi, 1e-15);
    CorrelatorTable<double> one(2, 2);
    one.values = {1, 1, 1, 1};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(tlm_residual(one, i, j, 1), 0, 1e-15);
}

TEST(Tlm, RejectsBadArguments) {
    CorrelatorTable<double> Z(2, 2), Z3(3, 3);
    EXPECT_THROW(tlm_residual(Z3, 0, 0, 1), std::invalid_argument);
    EXPECT_THROW(tlm_residual(Z, 0, 0, 0), std::invalid_argument);
    EXPECT_THROW(tlm_residual(Z, 2, 0, 1), std::invalid_argument);
}

TEST(Chain, UnitWeightsGiveChshAndChained) {
    auto w2 = WeightedChain::unit(2);
    EXPECT_DOUBLE_EQ(classical_chain_max(w2), 2);
    EXPECT_NEAR(chain_value(correlators_from_model(chsh_model()), w2), 2 * std::sqrt(2.0), 1e-12);
    auto w3 = WeightedChain::unit(3);
    EXPECT_DOUBLE_EQ(classical_chain_max(w3), 4);
    EXPECT_NEAR(chain_value(correlators_from_model(equal_spacing_model(3)), w3), 6 * std::cos(kPi / 6), 1e-12);
    EXPECT_DOUBLE_EQ(chain_value(CorrelatorTable<double>(3, 3), w3), 0);
}

// Independent oracle: full 2^{2m} enumeration of deterministic +-1 assignments.
TEST(Chain, ClassicalMaxMatchesFullEnumeration) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 2);
    for (int m = 2; m <= 5; ++m)
        for (int t = 0; t < 5; ++t) {
            WeightedChain w{m, {}, {}, u(rng)};
            for (int i = 0; i < m; ++i) w.diag.push_back(u(rng));
            for (int i = 0; i + 1 < m; ++i) w.sub.push_back(u(rng));
            double best = -1e9;
            for (unsigned long mask = 0; mask < (1ul << (2 * m)); ++mask) {
                CorrelatorTable<double> E(m, m);
                for (int x = 0; x < m; ++x)
                    for (int y = 0; y < m; ++y) {
                        const double a = (mask >> x) & 1 ? -1 : 1, b = (mask >> (m + y)) & 1 ? -1 : 1;
                        E(x, y) = a * b;
                    }
                best = std::max(best, chain_value(E, w));
            }
            EXPECT_NEAR(classical_chain_max(w), best, 1e-12);
        }
}

TEST(Chain, CapsAndValidation) {
    EXPECT_THROW(classical_chain_max(WeightedChain::unit(13)), std::invalid_argument);
    auto w = WeightedChain::unit(3);
    w.sub[0] = 0;
    EXPECT_THROW(w.validate(), std::invalid_argument);
    EXPECT_THROW(chain_value(CorrelatorTable<double>(2, 2), WeightedChain::unit(3)), std::invalid_argument);
}

TEST(BoundaryWeights, EqualSpacingAndChsh) {
    for (int m = 2; m <= 6; ++m) {
        auto w = boundary_weights(angle_table(correlators_from_model(equal_spacing_model(m))));
        const double want = 1 / std::sin(kPi / (2 * m));
        for (double c : w.diag) EXPECT_NEAR(c, want, 1e-9);
        for (double c : w.sub) EXPECT_NEAR(c, want, 1e-9);
        EXPECT_NEAR(w.corner, want, 1e-9);
    }
    auto w = boundary_weights(angle_table(correlators_from_model(chsh_model())));
    EXPECT_NEAR(w.corner, std::sqrt(2.0), 1e-12);
}

TEST(BoundaryWeights, DegenerateAngleThrows) {
    PlanarModel m({0, 1}, {0, 2});
    EXPECT_THROW(boundary_weights(angle_table(correlators_from_model(m))), std::invalid_argument);
}

TEST(BoundaryWeights, StrictlyBeatClassical) {
    for (int m = 2; m <= 6; ++m) {
        auto model = equal_spacing_model(m);
        auto E = correlators_from_model(model);
        auto w = boundary_weights(angle_table(E)).normalized();
        EXPECT_GT(chain_value(E, w) - classical_chain_max(w), 0.01) << "m=" << m;
    }
}

// The boundary point maximizes the tangent functional locally.
TEST(BoundaryWeights, LocalMaximality) {
    std::mt19937_64 rng(19);
    for (int m = 2; m <= 6; ++m) {
        auto model = equal_spacing_model(m);
        auto E = correlators_from_model(model);
        auto w = boundary_weights(angle_table(E));
        const double top = chain_value(E, w);
        for (int t = 0; t < 200; ++t)
            EXPECT_LE(chain_value(correlators_from_model(perturbed(model, rng, 0.05)), w), top + 1e-12);
    }
}

TEST(ControlOperators, ChshModelGivesPaulis) {
    auto c = control_operators(chsh_model());
    EXPECT_LT((c.za - pauli_z()).norm(), 1e-12);
    EXPECT_LT((c.xa - pauli_x()).norm(), 1e-12);
    EXPECT_LT(unitarity_residual(c.zb), 1e-12);
    EXPECT_LT(unitarity_residual(c.xb), 1e-12);
}

TEST(ControlOperators, DegenerateDenominatorThrows) {
    // alpha_12 == alpha_11.
    PlanarModel m({0, 1}, {0.4, -0.4});
    EXPECT_THROW(control_operators(m), std::invalid_argument);
}

TEST(SelfTest, BoundaryModelsPassAllConditions) {
    for (int m = 2; m <= 6; ++m) {
        auto r = verify_self_test_conditions(equal_spacing_model(m));
        EXPECT_LT(r.max_residual(), 1e-10) << "m=" << m;
        EXPECT_NEAR(r.zz, 1, 1e-10);
        EXPECT_NEAR(r.xx, 1, 1e-10);
        EXPECT_LT(r.unitarity, 1e-10);
    }
}

TEST(SelfTest, ChshAnticommutatorsVanish) {
    auto r = verify_self_test_conditions(chsh_model());
    EXPECT_LT(r.anti_a, 1e-15);
    EXPECT_LT(r.anti_b, 1e-15);
}

TEST(SelfTest, OffBoundaryModelFails) {
    // Shifts that keep the angles interleaved stay on the boundary; this one moves B_1 below A_1.
    auto model = equal_spacing_model(3);
    model.theta_b[0] = model.theta_a[0] - 0.1;
    EXPECT_GT(std::abs(boundary_residual(angle_table(correlators_from_model(model)))), 0.01);
    EXPECT_GT(verify_self_test_conditions(model).max_residual(), 0.01);
}

TEST(Isometry, BoundaryFidelityIsOne) {
    EXPECT_NEAR(swap_isometry_fidelity(chsh_model()), 1, 1e-12);
    for (int m = 2; m <= 6; ++m) EXPECT_GE(swap_isometry_fidelity(equal_spacing_model(m)), 1 - 1e-9) << m;
}

TEST(Isometry, ProductStateLosesFidelity) {
    Vec4 prod = Vec4::Zero();
    prod(0) = 1;
    EXPECT_LT(swap_isometry_fidelity(chsh_model(), prod), 0.99);
}

TEST(Isometry, IsAnIsometry) {
    auto phi = swap_isometry(control_operators(equal_spacing_model(4)));
    EXPECT_LT((phi.adjoint() * phi - MatXc::Identity(16, 16)).norm(), 1e-10);
}

TEST(Isometry, PushforwardOfMeasurements) {
    for (int m = 2; m <= 6; ++m) EXPECT_LT(pushforward_residual(equal_spacing_model(m)), 1e-9) << m;
}

TEST(Isometry, NearestUnitaryRegularizes) {
    Mat2 a;
    a << 1.1, 0.2, 0.2, -0.9;
    auto u = nearest_unitary(a);
    EXPECT_LT(unitarity_residual(u), 1e-12);
    EXPECT_LT((nearest_unitary(u) - u).norm(), 1e-12);
}

TEST(Hardy, ZeroConditionsHold) {
    auto h = hardy_model(0.5, 0.9);
    EXPECT_NEAR(hardy_probability(h, 0, 0, 0, 0), 0, 1e-15);
    EXPECT_NEAR(hardy_probability(h, 0, 1, 1, 0), 0, 1e-15);
    EXPECT_NEAR(hardy_probability(h, 1, 0, 0, 1), 0, 1e-15);
    auto box = hardy_box(h);
    EXPECT_TRUE(validate_no_signaling(box, 1e-12).ok);
    EXPECT_NO_THROW(check_box(box));
}

// Optimum of the Hardy probability over real two-qubit models: (5 sqrt 5 - 11) / 2.
TEST(Hardy, OptimalProbability) {
    auto h = hardy_optimal_model();
    EXPECT_NEAR(hardy_probability(h, 0, 0, 1, 1), (5 * std::sqrt(5.0) - 11) / 2, 1e-10);
    // A coarse grid never beats the optimizer.
    for (int i = 1; i < 40; ++i)
        for (int j = 1; j < 40; ++j)
            EXPECT_LE(hardy_probability(hardy_model(kPi / 2 * i / 40, kPi / 2 * j / 40), 0, 0, 1, 1),
                      hardy_probability(h, 0, 0, 1, 1) + 1e-12);
}

TEST(Hardy, BoxIsNotExcluded) {
    auto box = hardy_box(hardy_optimal_model());
    EXPECT_FALSE(exclude_by_analytic(box).excluded);
    EXPECT_LE(solve_certificate_sdp(box, build_orthogonality_graph(box.scenario)).sdp.value, 1e-6);
}
