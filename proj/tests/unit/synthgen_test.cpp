#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "permsel/synthgen.hpp"

using namespace permsel;

TEST(Design, FullFactorialIsLexicographic) {
    const auto d = build_design(2, 3, 9, 0);
    ASSERT_EQ(d.rows.size(), 9u);
    const std::vector<double> lv{0.5, 1.0, 1.5};
    for (std::size_t t = 0; t < 9; ++t) {
        EXPECT_DOUBLE_EQ(d.rows[t][0], lv[t / 3]);
        EXPECT_DOUBLE_EQ(d.rows[t][1], lv[t % 3]);
    }
}

TEST(Design, DefaultShapeHasDistinctRows) {
    const auto d = build_design(6, 3, 250, 17);
    ASSERT_EQ(d.rows.size(), 250u);
    std::set<std::vector<double>> uniq(d.rows.begin(), d.rows.end());
    EXPECT_EQ(uniq.size(), 250u);
    for (const auto& row : d.rows)
        for (double c : row) EXPECT_TRUE(c == 0.5 || c == 1.0 || c == 1.5);
    EXPECT_EQ(build_design(6, 3, 250, 17).rows, d.rows);
    EXPECT_NE(build_design(6, 3, 250, 18).rows, d.rows);
}

TEST(Design, ExhaustedSpace) {
    try {
        build_design(2, 2, 5, 0);
        FAIL() << "expected an error";
    } catch (const ArgumentError& e) {
        EXPECT_STREQ(e.what(), "design space exhausted (4 < 5)");
    }
}

TEST(Signature, GaussianPeak) {
    ComponentSignature sig{{{10.0, 2.0, 1.0}}, 20};
    const auto v = signature_vector(sig);
    EXPECT_DOUBLE_EQ(v[10], 1.0);
    EXPECT_NEAR(v[12], std::exp(-0.5), 1e-15);
    EXPECT_NEAR(v[12], 0.6065, 1e-4);
    ComponentSignature twice{{{10.0, 2.0, 1.0}, {10.0, 2.0, 1.0}}, 20};
    const auto w = signature_vector(twice);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(w[i], 2.0 * v[i]);
}

TEST(Signature, Validation) {
    EXPECT_THROW(signature_vector({{}, 10}), ArgumentError);
    EXPECT_THROW(signature_vector({{{10.0, 1.0, 1.0}}, 10}), ArgumentError);
    EXPECT_THROW(signature_vector({{{1.0, 0.0, 1.0}}, 10}), ArgumentError);
}

TEST(Synthesize, NoiselessIdentityAndLinearity) {
    const std::vector<std::vector<double>> sigs{signature_vector({{{3.0, 1.5, 2.0}}, 8})};
    auto rng = detail::make_stream(1, {});
    const std::vector<double> one{1.0}, two{2.0};
    const auto a = synthesize_sample(one, sigs, 3, 0.0, rng);
    const auto b = synthesize_sample(two, sigs, 3, 0.0, rng);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t v = 0; v < 8; ++v) {
            EXPECT_DOUBLE_EQ(a[r][v], sigs[0][v]);
            EXPECT_DOUBLE_EQ(b[r][v], 2.0 * a[r][v]);
        }
    EXPECT_THROW(synthesize_sample(one, sigs, 3, -1.0, rng), ArgumentError);
}

TEST(Synthesize, SameStreamSameOutput) {
    const std::vector<std::vector<double>> sigs{signature_vector({{{3.0, 1.5, 2.0}}, 8})};
    const std::vector<double> c{1.0};
    auto r1 = detail::make_stream(9, {4});
    auto r2 = detail::make_stream(9, {4});
    EXPECT_EQ(synthesize_sample(c, sigs, 5, 0.1, r1), synthesize_sample(c, sigs, 5, 0.1, r2));
}

TEST(Synthesize, NoiselessSpectraAreLinear) {
    GeneratorConfig cfg;
    cfg.n_samples = 40;
    cfg.noise_sigma = 0.0;
    const auto g = generate_dataset(cfg);
    std::vector<std::vector<double>> sv;
    for (const auto& s : g.signatures) sv.push_back(signature_vector(s));
    for (std::size_t i = 0; i < g.samples.n_samples(); ++i)
        for (std::size_t v = 0; v < cfg.n_vars; ++v) {
            double want = 0.0;
            for (std::size_t k = 0; k < sv.size(); ++k) want += g.samples.response(i, k) * sv[k][v];
            EXPECT_NEAR(g.samples.measurement(i, 0, v), want, 1e-12);
        }
}

TEST(Generate, DefaultShape) {
    const auto g = generate_dataset({});
    EXPECT_EQ(g.samples.n_samples(), 250u);
    EXPECT_EQ(g.samples.n_reps(), 5u);
    EXPECT_EQ(g.samples.n_vars(), 130u);
    EXPECT_EQ(g.samples.n_responses(), 6u);
    // Auto signatures: roughly 40 informative variables, at least 30% left out.
    EXPECT_GE(g.ground_truth.size(), 30u);
    EXPECT_LE(g.ground_truth.size(), 50u);
    EXPECT_LE(g.ground_truth.size(), 91u);
    for (const auto& s : g.signatures) {
        ASSERT_EQ(s.peaks.size(), 2u);
        for (const auto& p : s.peaks) EXPECT_NEAR(p.width, 3.0, 1.0);
    }
}

TEST(Generate, ResponsesAreDesign) {
    GeneratorConfig cfg;
    cfg.n_samples = 30;
    const auto g = generate_dataset(cfg);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(g.samples.response(i, k), g.design.rows[i][k]);
}

TEST(Generate, ZeroNoiseRepsIdentical) {
    GeneratorConfig cfg;
    cfg.n_samples = 20;
    cfg.noise_sigma = 0.0;
    const auto g = generate_dataset(cfg);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t r = 1; r < 5; ++r)
            for (std::size_t v = 0; v < 130; ++v)
                EXPECT_EQ(g.samples.measurement(i, r, v), g.samples.measurement(i, 0, v));
}

TEST(Generate, FlatSignaturesHaveNoGroundTruth) {
    GeneratorConfig cfg;
    cfg.n_samples = 9;
    cfg.n_components = 2;
    cfg.n_vars = 20;
    cfg.signatures = {{{{5.0, 1.0, 0.0}}, 20}, {{{9.0, 1.0, 0.0}}, 20}};
    EXPECT_TRUE(generate_dataset(cfg).ground_truth.empty());
}

TEST(Generate, SinglePeaksGiveContiguousTruth) {
    GeneratorConfig cfg;
    cfg.n_samples = 9;
    cfg.n_components = 2;
    cfg.n_vars = 60;
    cfg.signatures = {{{{20.0, 2.0, 1.0}}, 60}, {{{22.0, 3.0, 0.5}}, 60}};
    const auto gt = generate_dataset(cfg).ground_truth;
    ASSERT_FALSE(gt.empty());
    EXPECT_EQ(gt.back() - gt.front() + 1, gt.size());
}

TEST(Generate, Deterministic) {
    GeneratorConfig cfg;
    cfg.n_samples = 25;
    cfg.seed = 8;
    const auto a = generate_dataset(cfg);
    const auto b = generate_dataset(cfg);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.ground_truth, b.ground_truth);
    cfg.seed = 9;
    EXPECT_FALSE(generate_dataset(cfg).samples == a.samples);
}
