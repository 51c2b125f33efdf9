#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "permsel/multiplicity.hpp"

using namespace permsel;

namespace {

PValueMatrix column_matrix(const std::vector<std::vector<double>>& cols) {
    PValueMatrix m;
    m.n_vars = cols.size();
    const std::size_t np = cols.front().size();
    for (std::size_t p = 0; p < np; ++p) m.pairs.push_back({0, p + 1});
    m.values.resize(np * m.n_vars);
    for (std::size_t v = 0; v < m.n_vars; ++v)
        for (std::size_t p = 0; p < np; ++p) m.at(p, v) = cols[v][p];
    return m;
}

SignificanceCounts counts_of(std::vector<std::size_t> c) {
    SignificanceCounts s;
    s.counts = std::move(c);
    return s;
}

// Direct definition: q_i = min over j with p_j >= p_i of m p_j / rank_j.
std::vector<double> bh_oracle(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) {
        double best = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (p[j] < p[i]) continue;
            std::size_t rank = 0;
            for (std::size_t t = 0; t < m; ++t) rank += p[t] <= p[j];
            best = std::min(best, static_cast<double>(m) * p[j] / static_cast<double>(rank));
        }
        q[i] = best;
    }
    return q;
}

}  // namespace

TEST(BH, HandComputedVectors) {
    const auto a = bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05});
    for (double q : a) EXPECT_NEAR(q, 0.05, 1e-12);
    const auto b = bh_adjust(std::vector<double>{0.005, 0.009, 0.05, 0.2});
    EXPECT_NEAR(b[0], 0.018, 1e-12);
    EXPECT_NEAR(b[1], 0.018, 1e-12);
    EXPECT_NEAR(b[2], 0.2 / 3.0, 1e-12);
    EXPECT_NEAR(b[3], 0.2, 1e-12);
    const std::vector<double> same(7, 0.3);
    EXPECT_EQ(bh_adjust(same), same);
}

TEST(BH, RejectsOutOfRange) {
    EXPECT_THROW(bh_adjust(std::vector<double>{0.0, 0.5}), ArgumentError);
    EXPECT_THROW(bh_adjust(std::vector<double>{1.5}), ArgumentError);
    EXPECT_THROW(bh_adjust(std::vector<double>{std::nan("")}), ArgumentError);
}

TEST(BH, Properties) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    for (int t = 0; t < 40; ++t) {
        std::vector<double> p(1 + t % 25);
        for (auto& x : p) x = t % 3 == 0 ? std::ceil(u(rng) * 10) / 10 : u(rng);  // some ties
        const auto q = bh_adjust(p);
        const auto oracle = bh_oracle(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(q[i], oracle[i], 1e-15);
            EXPECT_GE(q[i], p[i]);
            EXPECT_LE(q[i], 1.0);
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[i] <= p[j]) {
                    EXPECT_LE(q[i], q[j]);
                }
        }
        std::vector<std::size_t> perm(p.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> pp(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) pp[i] = p[perm[i]];
        const auto qq = bh_adjust(pp);
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(qq[i], q[perm[i]]);
    }
}

TEST(BH, EmpiricalFdrUnderNull) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double fdp = 0.0;
    const int sims = 500;
    std::vector<double> p(1000);
    for (int s = 0; s < sims; ++s) {
        for (auto& x : p) x = 1.0 - u(rng);  // (0, 1]
        const auto q = bh_adjust(p);
        // All nulls: FDP is 1 whenever anything is rejected.
        fdp += std::any_of(q.begin(), q.end(), [](double x) { return x <= 0.05; }) ? 1.0 : 0.0;
    }
    EXPECT_LE(fdp / sims, 0.07);
}

TEST(AdjustMatrix, Modes) {
    const auto raw = column_matrix({{0.01, 0.02, 0.03, 0.04, 0.05}});
    const auto adj = adjust_matrix(raw);
    EXPECT_EQ(adj.kind, PValueKind::adjusted);
    for (double q : adj.values) EXPECT_NEAR(q, 0.05, 1e-12);
    EXPECT_THROW(adjust_matrix(adj), ArgumentError);

    const auto ones = column_matrix({{1, 1, 1}, {1, 1, 1}});
    EXPECT_EQ(adjust_matrix(ones).values, ones.values);

    const std::vector<double> col{0.001, 0.01, 0.2, 0.03, 0.004};
    const auto dup = column_matrix({col, col});
    const auto per = adjust_matrix(dup, FdrFamily::per_variable);
    const auto glob = adjust_matrix(dup, FdrFamily::global);
    EXPECT_EQ(glob.family, FdrFamily::global);
    for (std::size_t t = 0; t < per.values.size(); ++t) EXPECT_GE(glob.values[t], per.values[t]);
}

TEST(Counts, Examples) {
    auto m = column_matrix({{0.01, 0.04, 0.2}, {1, 1, 1}, {0.05, 0.06, 1}});
    m.kind = PValueKind::adjusted;
    const auto c = significance_counts(m, 0.05);
    EXPECT_EQ(c.counts, (std::vector<std::size_t>{2, 0, 1}));
    EXPECT_EQ(c.n_pairs, 3u);
    m.kind = PValueKind::raw;
    EXPECT_THROW(significance_counts(m, 0.05), ArgumentError);
}

TEST(Cutoff, SelectExamples) {
    const auto c = counts_of({10, 5, 7});
    EXPECT_EQ(select_by_cutoff(c, 7).selected, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(select_by_cutoff(c, 0).selected, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_TRUE(select_by_cutoff(counts_of({3, 3, 3}), 4).selected.empty());
}

TEST(Cutoff, Antitone) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> d(0, 20);
    for (int t = 0; t < 30; ++t) {
        std::vector<std::size_t> cv(40);
        for (auto& x : cv) x = d(rng);
        const auto c = counts_of(cv);
        for (std::size_t lo = 0; lo <= 21; ++lo) {
            const auto a = select_by_cutoff(c, lo).selected;
            const auto b = select_by_cutoff(c, lo + 1).selected;
            EXPECT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
        }
    }
}

TEST(Cutoff, TargetSize) {
    const auto c = counts_of({9, 7, 7, 2});
    EXPECT_EQ(cutoff_for_target_size(c, 2), 7u);
    EXPECT_EQ(select_by_cutoff(c, 7).selected, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(cutoff_for_target_size(counts_of({5, 4, 3}), 1), 5u);
    EXPECT_EQ(cutoff_for_target_size(counts_of({0, 0}), 1), 0u);
    EXPECT_THROW(cutoff_for_target_size(c, 0), ArgumentError);
    EXPECT_THROW(cutoff_for_target_size(c, 5), ArgumentError);

    // Scan oracle: largest cutoff whose selection has at least k variables.
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> d(0, 12);
    for (int t = 0; t < 30; ++t) {
        std::vector<std::size_t> cv(15);
        for (auto& x : cv) x = d(rng);
        const auto cc = counts_of(cv);
        for (std::size_t k = 1; k <= 15; ++k) {
            std::size_t want = 0;
            for (std::size_t cut = 0; cut <= 13; ++cut)
                if (select_by_cutoff(cc, cut).selected.size() >= k) want = cut;
            EXPECT_EQ(cutoff_for_target_size(cc, k), want);
        }
    }
}

TEST(Cutoff, NearestRankPercentile) {
    const auto c = counts_of({5, 1, 4, 2, 3});
    EXPECT_EQ(percentile_cutoff(c, 0.5), 3u);
    EXPECT_EQ(percentile_cutoff(c, 0.9), 5u);
    EXPECT_EQ(percentile_cutoff(c, 0.2), 1u);
    EXPECT_EQ(percentile_cutoff(c, 1.0), 5u);
}

TEST(Bands, Examples) {
    SelectionResult s;
    s.selected = {3, 4, 5, 9, 10};
    EXPECT_EQ(contiguous_bands(s), (std::vector<Band>{{3, 5}, {9, 10}}));
    s.selected = {};
    EXPECT_TRUE(contiguous_bands(s).empty());
    s.selected = {0, 2, 4};
    EXPECT_EQ(contiguous_bands(s), (std::vector<Band>{{0, 0}, {2, 2}, {4, 4}}));
}

TEST(Bands, RoundTripAndMinimal) {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution coin(0.4);
    for (int t = 0; t < 50; ++t) {
        SelectionResult s;
        for (std::size_t v = 0; v < 60; ++v)
            if (coin(rng)) s.selected.push_back(v);
        const auto bands = contiguous_bands(s);
        std::vector<std::size_t> back;
        for (std::size_t b = 0; b < bands.size(); ++b) {
            EXPECT_LE(bands[b].start, bands[b].end);
            if (b > 0) {
                EXPECT_GT(bands[b].start, bands[b - 1].end + 1);
            }
            for (auto v = bands[b].start; v <= bands[b].end; ++v) back.push_back(v);
        }
        EXPECT_EQ(back, s.selected);
    }
}
