#include "qbell/box.hpp"
#include "qbell/box_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qbell;

namespace {

const BellScenario k222(2, 2, 2, 2);

Relabeling random_relabeling(const BellScenario& s, std::mt19937& rng) {
    auto r = Relabeling::identity(s);
    std::shuffle(r.alice_inputs.begin(), r.alice_inputs.end(), rng);
    std::shuffle(r.bob_inputs.begin(), r.bob_inputs.end(), rng);
    for (auto& p : r.alice_outputs) std::shuffle(p.begin(), p.end(), rng);
    for (auto& p : r.bob_outputs) std::shuffle(p.begin(), p.end(), rng);
    return r;
}

}  // namespace

TEST(Scenario, RejectsSmallFields) {
    EXPECT_THROW(BellScenario(1, 2, 2, 2), std::invalid_argument);
    EXPECT_THROW(BellScenario(2, 2, 2, 1), std::invalid_argument);
}

TEST(Scenario, FlatIndexIsBijective) {
    BellScenario s(2, 3, 3, 2);
    for (std::size_t f = 0; f < s.events(); ++f) {
        auto e = EventIndex::from_flat(s, f);
        EXPECT_EQ(s.index(e.x, e.y, e.a, e.b), f);
        EXPECT_EQ(EventIndex::make(s, e.x, e.y, e.a, e.b).flat, f);
    }
    EXPECT_THROW(EventIndex::from_flat(s, s.events()), std::out_of_range);
}

TEST(Rational, MakeRationalCanonicalizes) {
    auto r = make_rational(2, 4);
    EXPECT_EQ(r.get_num(), 1);
    EXPECT_EQ(r.get_den(), 2);
    EXPECT_EQ(make_rational(-3, -6), make_rational(1, 2));
    EXPECT_THROW(make_rational(1, 0), std::invalid_argument);
}

TEST(Rational, ParseDecimalsAndFractions) {
    EXPECT_EQ(parse_rational("0.125"), make_rational(1, 8));
    EXPECT_EQ(parse_rational(" 6/4 "), make_rational(3, 2));
    EXPECT_EQ(parse_rational("-2"), Rational(-2));
    EXPECT_THROW(parse_rational("1e-3"), std::invalid_argument);
    EXPECT_THROW(parse_rational(""), std::invalid_argument);
}

TEST(NoSignaling, PrAndUniformPass) {
    EXPECT_TRUE(validate_no_signaling(pr_box<Rational>(2)).ok);
    EXPECT_TRUE(validate_no_signaling(uniform_box<Rational>(k222)).ok);
}

TEST(NoSignaling, OneSidedBoxReportsViolation) {
    auto box = Box<Rational>::zeros(k222);
    box(0, 0, 0, 0) = 1;  // x=0: b=0 surely
    box(0, 1, 1, 0) = 1;  // x=1: b=1 surely, so Bob's marginal at y=0 depends on x
    box(0, 0, 0, 1) = 1;
    box(0, 0, 1, 1) = 1;
    auto r = validate_no_signaling(box);
    ASSERT_FALSE(r.ok);
    bool found = false;
    for (const auto& v : r.violations)
        found = found || (v.varying == SignalingViolation::Party::alice_input && v.fixed_input == 0 && v.input1 == 0 &&
                          v.input2 == 1);
    EXPECT_TRUE(found);
}

TEST(Deterministic, Counts) {
    EXPECT_EQ(enumerate_local_deterministic<Rational>(k222).size(), 16u);
    EXPECT_EQ(enumerate_local_deterministic<Rational>(BellScenario(2, 2, 3, 3)).size(), 81u);
    EXPECT_EQ(enumerate_local_deterministic<Rational>(BellScenario(3, 3, 2, 2)).size(), 64u);
    EXPECT_THROW(enumerate_local_deterministic<Rational>(BellScenario(2, 2, 3, 3), 80), std::length_error);
}

TEST(Deterministic, AreNoSignalingWithUnitCorrelators) {
    for (const auto& d : enumerate_local_deterministic<Rational>(k222)) {
        EXPECT_TRUE(validate_no_signaling(d).ok);
        EXPECT_NO_THROW(check_box(d));
        for (const auto& e : correlators_of(d).values) EXPECT_TRUE(e == 1 || e == -1);
    }
}

TEST(PrBox, SupportAndValues) {
    auto p2 = pr_box<Rational>(2);
    int nz = 0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const bool on = ((a ^ b) == (x * y));
                    EXPECT_EQ(p2(a, b, x, y), on ? make_rational(1, 2) : Rational(0));
                    nz += on;
                }
    EXPECT_EQ(nz, 8);
    auto p3 = pr_box<Rational>(3);
    int nz3 = 0;
    for (const auto& v : p3.probs) {
        if (v != 0) {
            EXPECT_EQ(v, make_rational(1, 3));
            ++nz3;
        }
    }
    EXPECT_EQ(nz3, 12);
    EXPECT_TRUE(validate_no_signaling(p3).ok);
    EXPECT_THROW(pr_box<Rational>(1), std::invalid_argument);
}

TEST(Relabeling, IdentityAndInvolution) {
    auto pr = pr_box<Rational>(2);
    EXPECT_EQ(apply_relabeling(pr, Relabeling::identity(k222)), pr);
    auto swap = Relabeling::identity(k222);
    swap.alice_inputs = {1, 0};
    EXPECT_EQ(apply_relabeling(apply_relabeling(pr, swap), swap), pr);
    auto flip = Relabeling::identity(k222);
    flip.alice_outputs[0] = {1, 0};
    auto other = apply_relabeling(pr, flip);
    EXPECT_FALSE(other == pr);
    EXPECT_TRUE(validate_no_signaling(other).ok);
}

TEST(Relabeling, GroupActionProperty) {
    std::mt19937 rng(7);
    BellScenario s(2, 2, 3, 3);
    auto pr = pr_box<Rational>(3);
    for (int t = 0; t < 50; ++t) {
        auto r1 = random_relabeling(s, rng), r2 = random_relabeling(s, rng);
        EXPECT_EQ(apply_relabeling(apply_relabeling(pr, r1), r2), apply_relabeling(pr, r1.then(r2)));
        EXPECT_EQ(apply_relabeling(apply_relabeling(pr, r1), r1.inverse()), pr);
        EXPECT_TRUE(validate_no_signaling(apply_relabeling(pr, r1)).ok);
    }
}

TEST(Relabeling, DimensionMismatchThrows) {
    EXPECT_THROW(apply_relabeling(pr_box<Rational>(2), Relabeling::identity(BellScenario(2, 2, 3, 3))),
                 std::invalid_argument);
}

TEST(Mix, Examples) {
    auto pr = pr_box<Rational>(2);
    EXPECT_EQ(mix<Rational>({pr}, {Rational(1)}), pr);
    auto m = mix<Rational>({pr, uniform_box<Rational>(k222)}, {make_rational(1, 2), make_rational(1, 2)});
    for (const auto& v : m.probs) EXPECT_TRUE(v == make_rational(3, 8) || v == make_rational(1, 8));
    EXPECT_THROW(mix<Rational>({pr, pr}, {make_rational(3, 5), make_rational(1, 2)}), std::invalid_argument);
}

TEST(Correlators, PrAndZero) {
    auto E = correlators_of(pr_box<Rational>(2));
    EXPECT_EQ(E(0, 0), 1);
    EXPECT_EQ(E(0, 1), 1);
    EXPECT_EQ(E(1, 0), 1);
    EXPECT_EQ(E(1, 1), -1);
    CorrelatorTable<Rational> Z(2, 2);
    EXPECT_EQ(box_of_correlators(Z), uniform_box<Rational>(k222));
}

TEST(Correlators, TsirelsonLift) {
    const double h = 1 / std::sqrt(2.0);
    CorrelatorTable<double> E(2, 2);
    E.values = {h, h, h, -h};
    auto box = box_of_correlators(E);
    for (double v : box.probs) {
        const bool ok = std::abs(v - (1 + h) / 4) < 1e-15 || std::abs(v - (1 - h) / 4) < 1e-15;
        EXPECT_TRUE(ok);
    }
    EXPECT_TRUE(validate_no_signaling(box).ok);
    auto back = correlators_of(box);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(back.values[i], E.values[i], 1e-15);
}

TEST(Correlators, RejectsOutOfRange) {
    CorrelatorTable<Rational> E(2, 2);
    E(0, 0) = make_rational(3, 2);
    EXPECT_THROW(box_of_correlators(E), std::invalid_argument);
    EXPECT_THROW(correlators_of(pr_box<Rational>(3)), std::invalid_argument);
}

TEST(Correlators, LinearUnderMixing) {
    std::mt19937 rng(3);
    auto dets = enumerate_local_deterministic<Rational>(k222);
    for (int t = 0; t < 20; ++t) {
        std::vector<Box<Rational>> boxes{pr_box<Rational>(2), dets[rng() % 16], dets[rng() % 16]};
        long g1 = 1 + rng() % 9, g2 = 1 + rng() % 9, g3 = 1 + rng() % 9;
        std::vector<Rational> w{make_rational(g1, g1 + g2 + g3), make_rational(g2, g1 + g2 + g3),
                                make_rational(g3, g1 + g2 + g3)};
        auto lhs = correlators_of(mix(boxes, w));
        for (int i = 0; i < 4; ++i) {
            Rational rhs(0);
            for (int j = 0; j < 3; ++j) rhs += w[j] * correlators_of(boxes[j]).values[i];
            EXPECT_EQ(lhs.values[i], rhs);
        }
    }
}

TEST(BoxIo, RationalRoundTrip) {
    auto pr = pr_box<Rational>(3);
    auto any = parse_box(serialize_box(pr));
    ASSERT_TRUE(std::holds_alternative<Box<Rational>>(any));
    EXPECT_EQ(std::get<Box<Rational>>(any), pr);
}

TEST(BoxIo, FloatRoundTripTo17Digits) {
    CorrelatorTable<double> E(2, 2);
    E.values = {0.3, -0.7, 1 / std::sqrt(3.0), 0.1};
    auto box = box_of_correlators(E);
    auto back = std::get<Box<double>>(parse_box(serialize_box(box)));
    EXPECT_EQ(back.probs, box.probs);
}

TEST(BoxIo, ExactThirds) {
    json j = box_to_json(uniform_box<Rational>(BellScenario(2, 2, 3, 3)));
    for (auto& v : j["probs"]) v = "1/9";
    auto b = std::get<Box<Rational>>(box_from_json(j));
    EXPECT_EQ(b[0], make_rational(1, 9));
}

TEST(BoxIo, Errors) {
    json j = box_to_json(pr_box<Rational>(2));
    json short_probs = j;
    short_probs["probs"].erase(short_probs["probs"].begin());
    EXPECT_THROW(box_from_json(short_probs), ParseError);
    json neg = j;
    neg["probs"][0] = "-1/2";
    neg["probs"][1] = "1";
    EXPECT_THROW(box_from_json(neg), ParseError);
    json bad_scen = j;
    bad_scen["scenario"]["ma"] = 1;
    EXPECT_THROW(box_from_json(bad_scen), ParseError);
    EXPECT_THROW(parse_box("{not json"), ParseError);
}
