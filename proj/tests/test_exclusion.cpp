#include "qbell/exclusion.hpp"
#include "qbell/report.hpp"
#include "qbell/selftest.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace qbell;

namespace {

FaceSpec<Rational> load_face(const std::string& name) {
    std::ifstream in(std::string(QBELL_SAMPLES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return face_spec_from_json<Rational>(json::parse(ss.str()));
}

Relabeling random_relabeling(const BellScenario& s, std::mt19937_64& rng) {
    auto r = Relabeling::identity(s);
    std::shuffle(r.alice_inputs.begin(), r.alice_inputs.end(), rng);
    std::shuffle(r.bob_inputs.begin(), r.bob_inputs.end(), rng);
    for (auto& p : r.alice_outputs) std::shuffle(p.begin(), p.end(), rng);
    for (auto& p : r.bob_outputs) std::shuffle(p.begin(), p.end(), rng);
    return r;
}

}  // namespace

TEST(AnalyticExcluder, RejectsSmallK) { EXPECT_THROW(AnalyticExcluder(1), std::invalid_argument); }

TEST(AnalyticExcluder, PrUsesM0) {
    auto r = exclude_by_analytic(pr_box<Rational>(2));
    ASSERT_TRUE(r.excluded);
    EXPECT_EQ(template_name(*r.tmpl), "M0");
    EXPECT_EQ(r.value, make_rational(1, 40));
    ASSERT_TRUE(r.closed_form.has_value());
    EXPECT_EQ(*r.closed_form, r.value);
    ASSERT_TRUE(r.certificate.has_value());
    EXPECT_TRUE(is_valid_certificate(*r.certificate, build_orthogonality_graph(BellScenario(2, 2, 2, 2))));
}

TEST(AnalyticExcluder, PrCopiesFoundUnderRelabeling) {
    BellScenario s(2, 2, 2, 2);
    auto pr = pr_box<Rational>(2);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 8; ++t) {
        auto rep = exclude_by_analytic(apply_relabeling(pr, random_relabeling(s, rng)));
        EXPECT_TRUE(rep.excluded);
        EXPECT_EQ(rep.value, make_rational(1, 40));
    }
}

TEST(AnalyticExcluder, NonPrScenarioReportsNote) {
    auto r = exclude_by_analytic(uniform_box<Rational>(BellScenario(3, 2, 2, 2)));
    EXPECT_FALSE(r.excluded);
    EXPECT_FALSE(r.note.empty());
}

TEST(AnalyticExcluder, LocalBoxesNeverFire) {
    BellScenario s(2, 2, 2, 2);
    for (const auto& d : enumerate_local_deterministic<Rational>(s)) EXPECT_FALSE(exclude_by_analytic(d).excluded);
    EXPECT_FALSE(exclude_by_analytic(uniform_box<Rational>(s)).excluded);
}

TEST(AnalyticExcluder, ZeroPrWeightNeverFires) {
    FaceSpec<Rational> f{2, {1, 4}, {Rational(0), make_rational(1, 2), make_rational(1, 2)}};
    EXPECT_FALSE(exclude_by_analytic(face_box(f)).excluded);
}

// Every face of NS(2,2,2) of dimension <= 4 is excluded, with the closed form reproducing the value exactly.
TEST(AnalyticExcluder, AllK2FacesExcluded) {
    std::mt19937_64 rng(17);
    AnalyticExcluder ex(2);
    for (int d = 0; d <= 4; ++d)
        for (const auto& ids : subsets_of_size(8, d)) {
            auto spec = sample_face_spec(2, ids, rng);
            auto r = ex.run(face_box(spec));
            ASSERT_TRUE(r.excluded) << face_spec_to_json(spec).dump();
            EXPECT_GT(r.value, 0);
            if (r.closed_form) {
                EXPECT_EQ(*r.closed_form, r.value);
            }
        }
}

TEST(AnalyticExcluder, FloatModeAgreesOnPr) {
    auto r = exclude_by_analytic(pr_box<double>(2));
    ASSERT_TRUE(r.excluded);
    EXPECT_NEAR(r.value, 0.025, 1e-12);
}

TEST(SampleFaces, K3Dimension6) {
    auto spec = load_face("face_k3_d6.json");
    auto r = AnalyticExcluder(3).run(face_box(spec));
    ASSERT_TRUE(r.excluded);
    EXPECT_EQ(template_name(*r.tmpl), "M21_k");
    EXPECT_EQ(r.value, make_rational(23, 72));
}

TEST(SampleFaces, K2Dimension4) {
    auto spec = load_face("face_k2_d4.json");
    auto r = AnalyticExcluder(2).run(face_box(spec));
    ASSERT_TRUE(r.excluded);
    EXPECT_EQ(template_name(*r.tmpl), "M22c");
    EXPECT_EQ(r.value, make_rational(243, 625));
}

TEST(SampledFaces, K3LowDimensionsExcluded) {
    std::mt19937_64 rng(23);
    AnalyticExcluder ex(3);
    for (int d : {0, 1, 2, 3, 4, 5}) {
        auto subsets = subsets_of_size(12, d);
        for (int t = 0; t < 5; ++t) {
            auto spec = sample_face_spec(3, subsets[rng() % subsets.size()], rng);
            auto r = ex.run(face_box(spec));
            EXPECT_TRUE(r.excluded) << face_spec_to_json(spec).dump();
            if (r.excluded && r.closed_form) {
                EXPECT_EQ(*r.closed_form, r.value);
            }
        }
    }
}

TEST(SampledFaces, K4LowDimensionsExcluded) {
    std::mt19937_64 rng(29);
    AnalyticExcluder ex(4);
    for (int d : {0, 2, 4}) {
        auto subsets = subsets_of_size(16, d);
        for (int t = 0; t < 3; ++t) {
            auto spec = sample_face_spec(4, subsets[rng() % subsets.size()], rng);
            auto r = ex.run(face_box(spec));
            EXPECT_TRUE(r.excluded) << face_spec_to_json(spec).dump();
        }
    }
}

TEST(SampledFaces, ReportedCertificateReproducesValue) {
    std::mt19937_64 rng(31);
    AnalyticExcluder ex(3);
    for (const auto& ids : {std::vector<int>{0, 5}, std::vector<int>{1, 4, 9}}) {
        auto box = face_box(sample_face_spec(3, ids, rng));
        auto r = ex.run(box);
        ASSERT_TRUE(r.excluded);
        ASSERT_TRUE(r.certificate.has_value());
        EXPECT_EQ(certificate_value(*r.certificate, box), r.value);
    }
}

TEST(RunExclude, MethodNames) {
    for (auto m : {Method::analytic, Method::sdp, Method::both}) EXPECT_EQ(method_from_name(method_name(m)), m);
    EXPECT_THROW(method_from_name("npa"), std::invalid_argument);
}

TEST(RunExclude, PrBothRoutesAgree) {
    auto out = run_exclude(pr_box<Rational>(2), Method::both);
    EXPECT_TRUE(out.excluded);
    EXPECT_TRUE(out.decided);
    EXPECT_EQ(out.report["value"], "1/40");
    EXPECT_TRUE(out.report["sdp"]["verified"].get<bool>());
    EXPECT_FALSE(out.report.contains("routes_disagree"));
    EXPECT_TRUE(out.report.contains("certificate"));
}

TEST(RunExclude, UniformIsDecidedLocal) {
    auto out = run_exclude(uniform_box<Rational>(BellScenario(2, 2, 2, 2)), Method::both);
    EXPECT_FALSE(out.excluded);
    EXPECT_TRUE(out.decided);
    EXPECT_TRUE(out.report["sdp"]["lp_local"].get<bool>());
}

TEST(RunExclude, TsirelsonIsUndecidedUnderSdp) {
    const double h = 1 / std::sqrt(2.0);
    CorrelatorTable<double> E(2, 2);
    E.values = {h, h, h, -h};
    auto out = run_exclude(box_of_correlators(E), Method::sdp);
    EXPECT_FALSE(out.excluded);
    EXPECT_FALSE(out.decided);
    EXPECT_FALSE(out.report["sdp"]["lp_local"].get<bool>());
}

TEST(RunExclude, AnalyticMissIsDecided) {
    auto out = run_exclude(uniform_box<Rational>(BellScenario(2, 2, 2, 2)), Method::analytic);
    EXPECT_FALSE(out.excluded);
    EXPECT_TRUE(out.decided);
    EXPECT_FALSE(out.report.contains("sdp"));
}

TEST(LpLocal, SkipsLargeScenarios) {
    EXPECT_FALSE(lp_local(uniform_box<double>(BellScenario(5, 5, 4, 4))).has_value());
    EXPECT_EQ(lp_local(pr_box<Rational>(2)), std::optional<bool>(false));
}
