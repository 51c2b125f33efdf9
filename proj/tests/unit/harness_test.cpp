#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "permsel/harness.hpp"

using namespace permsel;
namespace fs = std::filesystem;

namespace {

ConfigMap small_settings() {
    return {{"n_samples", "40"}, {"n_components", "4"}, {"n_vars", "30"},
            {"noise_sigma", "1e-3"}, {"threads", "1"}, {"seed", "5"}};
}

PipelineConfig small_config(ConfigMap extra = {}) {
    auto m = small_settings();
    for (auto& [k, v] : extra) m[k] = v;
    return make_pipeline_config(m);
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("permsel_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::size_t>> selections_for(const SampleSet& samples,
                                                     const PipelineConfig& cfg) {
    const auto data = prepare(samples, cfg.split_fraction, cfg.split_seed);
    const auto sel = compute_selections(data, cfg, compute_pvalues(data, cfg));
    std::vector<std::vector<std::size_t>> out;
    for (const auto& e : sel.strategies) out.push_back(e.selection.selected);
    return out;
}

}  // namespace

TEST(Config, ParsesCommentsAndOverrides) {
    std::istringstream in("# header\nalpha = 0.1  # trailing\n\n  seed=3\nalpha = 0.2\n");
    const auto m = parse_config(in);
    EXPECT_EQ(m.at("alpha"), "0.2");
    EXPECT_EQ(m.at("seed"), "3");
    std::istringstream bad("just words\n");
    EXPECT_THROW(parse_config(bad), ArgumentError);
}

TEST(Config, BuildsPipelineConfig) {
    const auto cfg = make_pipeline_config({{"alpha", "0.1"},
                                           {"fdr_family", "global"},
                                           {"cutoffs", "3, 5"},
                                           {"perm_mode", "monte_carlo"},
                                           {"perm_n", "500"},
                                           {"signature.1", "10:2:1; 40:3:0.5"},
                                           {"n_components", "1"},
                                           {"n_samples", "3"}});
    EXPECT_EQ(cfg.alpha, 0.1);
    EXPECT_EQ(cfg.family, FdrFamily::global);
    EXPECT_EQ(cfg.cutoffs, (std::vector<std::size_t>{3, 5}));
    EXPECT_EQ(cfg.perm.kind, PermutationMode::Kind::monte_carlo);
    EXPECT_EQ(cfg.perm.n_perm, 500u);
    ASSERT_EQ(cfg.generate->signatures.size(), 1u);
    EXPECT_EQ(cfg.generate->signatures[0].peaks[1].center, 40.0);
    EXPECT_THROW(make_pipeline_config({{"no_such_key", "1"}}), ArgumentError);
    EXPECT_THROW(make_pipeline_config({{"alpha", "1.5"}}), ArgumentError);
    EXPECT_THROW(make_pipeline_config({{"alpha", "abc"}}), ArgumentError);
}

TEST(Pipeline, StructuralContract) {
    const auto cfg = small_config();
    const auto rep = run_pipeline(cfg);
    std::vector<std::string> ids;
    for (const auto& e : rep.strategies) ids.push_back(e.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"npc_p50", "npc_p75", "npc_p90", "npc_matched", "lasso"}));
    EXPECT_EQ(rep.baseline.id, "all");
    EXPECT_EQ(rep.baseline.selection.selected.size(), 30u);
    EXPECT_EQ(rep.dataset.n_train, 30u);
    EXPECT_EQ(rep.dataset.n_pairs, 435u);
    for (const auto& e : rep.strategies) {
        EXPECT_GE(e.mae, 0.0);
        std::size_t covered = 0;
        for (const auto& b : e.bands) covered += b.end - b.start + 1;
        EXPECT_EQ(covered, e.selection.selected.size());
    }
    // Matched NPC holds at least as many variables as Lasso (ties may add more).
    const auto& lasso = rep.strategies[4].selection.selected;
    EXPECT_GE(rep.strategies[3].selection.selected.size(), std::max<std::size_t>(lasso.size(), 1));
}

TEST(Pipeline, Deterministic) {
    const auto cfg = small_config();
    const auto a = to_json(run_pipeline(cfg), false).dump();
    const auto b = to_json(run_pipeline(cfg), false).dump();
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.find("timing"), std::string::npos);
}

TEST(Pipeline, NoiselessInformativeVariablesSaturate) {
    const auto cfg = small_config({{"noise_sigma", "0"}});
    const auto rep = run_pipeline(cfg);
    ASSERT_FALSE(rep.ground_truth.empty());
    // Every pair has distinct design rows, so every informative variable
    // separates every pair.
    for (auto v : rep.ground_truth) EXPECT_EQ(rep.counts.counts[v], rep.dataset.n_pairs) << v;
}

TEST(Pipeline, CustomCutoffs) {
    const auto rep = run_pipeline(small_config({{"cutoffs", "0,100"}}));
    ASSERT_EQ(rep.strategies.size(), 3u);
    EXPECT_EQ(rep.strategies[0].id, "npc_c0");
    EXPECT_EQ(rep.strategies[0].selection.selected.size(), 30u);
    EXPECT_EQ(rep.strategies[1].id, "npc_c100");
}

TEST(Pipeline, StageTaggedErrors) {
    auto cfg = small_config();
    cfg.generate.reset();
    cfg.data_path = "/nonexistent/data.csv";
    try {
        run_pipeline(cfg);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "load");
        EXPECT_NE(std::string(e.what()).find("/nonexistent/data.csv"), std::string::npos);
    }
}

TEST(Pipeline, PersistsPvaluesAndReusesThem) {
    const auto dir = scratch_dir("reuse");
    auto cfg = small_config({{"out", dir.string()}});
    const auto first = run_pipeline(cfg);
    ASSERT_TRUE(fs::exists(dir / "pvalues.csv"));
    auto again = small_config({{"pvalues", (dir / "pvalues.csv").string()}});
    const auto second = run_pipeline(again);
    EXPECT_EQ(second.counts.counts, first.counts.counts);
    fs::remove_all(dir);
}

TEST(Pipeline, ValidationRowsDoNotLeak) {
    const auto cfg = small_config();
    const auto samples = load_data(cfg).samples;
    const auto split = split_train_validation(samples, cfg.split_fraction, cfg.split_seed);
    std::vector<double> m = samples.measurements();
    const std::size_t block = samples.n_reps() * samples.n_vars();
    for (auto i : split.validation_indices)
        for (std::size_t t = 0; t < block; ++t) m[i * block + t] = -1000.0 + 3.0 * static_cast<double>(t);
    const SampleSet mutated(samples.sample_ids(), samples.n_reps(), samples.n_vars(),
                            samples.n_responses(), m, samples.response_values());
    EXPECT_EQ(selections_for(samples, cfg), selections_for(mutated, cfg));
}

TEST(Compare, SortedWithBaselineLargest) {
    const auto rows = compare_strategies(small_config());
    ASSERT_GE(rows.size(), 3u);
    for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_LE(rows[r - 1].n_selected, rows[r].n_selected);
    EXPECT_EQ(rows.back().n_selected, 30u);
}

TEST(Compare, EmptySelectionScoresInterceptOnly) {
    const auto cfg = small_config();
    const auto data = prepare(load_data(cfg).samples, cfg.split_fraction, cfg.split_seed);
    auto e = detail::make_entry("none", SelectionResult{});
    score_entry(e, data, cfg.ridge);
    Eigen::MatrixXd pred(data.y_valid.rows(), data.y_valid.cols());
    pred.rowwise() = data.y_train.colwise().mean();
    EXPECT_NEAR(e.mae, mae(pred, data.y_valid), 1e-12);
}

TEST(Report, EmitsExpectedFiles) {
    const auto dir = scratch_dir("emit");
    auto rep = run_pipeline(small_config());
    rep.strategies.resize(2);
    const auto files = emit_report(rep, dir.string());
    EXPECT_EQ(files.size(), 6u);
    for (const char* name : {"report.json", "counts.csv", "mae_vs_k.csv", "selection_map.csv",
                             "selection_npc_p50.csv", "selection_npc_p75.csv"})
        EXPECT_TRUE(fs::exists(dir / name)) << name;

    // Selection CSV length matches the reported size.
    std::ifstream sel(dir / "selection_npc_p75.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(sel, line)) ++lines;
    EXPECT_EQ(lines - 1, rep.strategies[1].selection.selected.size());

    const auto before = slurp(dir / "selection_map.csv");
    std::map<std::string, std::string> contents;
    for (const auto& f : files) contents[f.string()] = slurp(f);
    emit_report(rep, dir.string());
    for (const auto& f : files) EXPECT_EQ(slurp(f), contents[f.string()]) << f;
    EXPECT_NE(before.find("variable,npc_p50,npc_p75"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Report, UnwritableDirectoryNamesPath) {
    const auto rep = run_pipeline(small_config());
    const auto blocker = scratch_dir("blocker");
    { std::ofstream(blocker.string()) << "x"; }
    try {
        emit_report(rep, (blocker / "sub").string());
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos) << e.what();
    }
    fs::remove_all(blocker);
}
