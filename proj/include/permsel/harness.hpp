#pragma once

// End-to-end pipeline: data -> split -> pairwise permutation p-values ->
// BH adjustment -> significance counts -> count-cutoff selections, plus the
// multivariate Lasso baseline; every selection is scored by a Ridge model fitted
// on training rows and evaluated by validation MAE.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "permsel/datamodel.hpp"
#include "permsel/detail/csv.hpp"
#include "permsel/error.hpp"
#include "permsel/linmod.hpp"
#include "permsel/multiplicity.hpp"
#include "permsel/permtest.hpp"
#include "permsel/synthgen.hpp"

namespace permsel {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Flat `key = value` settings; later assignments override earlier ones.
using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config(std::istream& in, const std::string& origin = "config") {
    ConfigMap out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ArgumentError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(body.substr(0, eq));
        if (key.empty())
            throw ArgumentError(origin + ":" + std::to_string(line_no) + ": empty key");
        out[std::string(key)] = std::string(detail::trim(body.substr(eq + 1)));
    }
    return out;
}

inline ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

struct PipelineConfig {
    // Exactly one data source: generator settings, or a CSV path.
    std::optional<GeneratorConfig> generate = GeneratorConfig{};
    std::optional<std::string> data_path;
    std::optional<std::string> pvalues_path;  // reuse a persisted raw matrix

    double split_fraction = 0.75;
    std::uint64_t split_seed = 1;

    PermutationMode perm = PermutationMode::exact();
    std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit;
    std::size_t threads = 0;  // 0 = all hardware threads

    FdrFamily family = FdrFamily::per_variable;
    double alpha = 0.05;
    std::vector<std::size_t> cutoffs;  // empty = auto

    LassoSelectOptions lasso;
    RidgeOptions ridge;

    std::string out_dir;
    bool write_pvalues = true;

    void validate() const {
        if (generate.has_value() == data_path.has_value())
            throw ArgumentError("exactly one data source (generator or data path) is required");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
        if (!(split_fraction > 0.0 && split_fraction < 1.0))
            throw ArgumentError("split_fraction must lie in (0, 1)");
    }
};

namespace detail {

inline std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline double to_real(const std::string& key, const std::string& v) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) throw ArgumentError("config '" + key + "': not a number: " + v);
    return *d;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
    const auto d = parse_int(v);
    if (!d || *d < 0)
        throw ArgumentError("config '" + key + "': not a nonnegative integer: " + v);
    return static_cast<std::uint64_t>(*d);
}

inline std::vector<double> to_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (auto f : split_fields(v)) out.push_back(to_real(key, std::string(trim(f))));
    return out;
}

// "center:width:height; center:width:height"
inline std::vector<Peak> to_peaks(const std::string& key, const std::string& v) {
    std::vector<Peak> peaks;
    for (auto item : split_fields(v, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto parts = split_fields(item, ':');
        if (parts.size() != 3)
            throw ArgumentError("config '" + key + "': peaks are center:width:height");
        peaks.push_back({to_real(key, std::string(trim(parts[0]))),
                         to_real(key, std::string(trim(parts[1]))),
                         to_real(key, std::string(trim(parts[2])))});
    }
    return peaks;
}

}  // namespace detail

// Builds a PipelineConfig from settings. `seed` seeds every stage unless a
// stage-specific seed key is also present.
inline PipelineConfig make_pipeline_config(const ConfigMap& m) {
    using namespace detail;
    PipelineConfig cfg;
    GeneratorConfig gen;
    std::map<std::size_t, std::vector<Peak>> sig_peaks;
    bool explicit_auto = false;

    std::optional<std::uint64_t> seed;
    if (auto it = m.find("seed"); it != m.end()) seed = to_count("seed", it->second);
    if (seed) {
        gen.seed = *seed;
        cfg.split_seed = *seed;
        cfg.perm.seed = *seed;
        cfg.lasso.seed = *seed;
        cfg.ridge.seed = *seed;
    }

    for (const auto& [key, value] : m) {
        if (key == "seed") continue;
        else if (key == "data") cfg.data_path = value;
        else if (key == "pvalues") cfg.pvalues_path = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "n_samples") gen.n_samples = to_count(key, value);
        else if (key == "n_components") gen.n_components = to_count(key, value);
        else if (key == "n_levels") gen.n_levels = to_count(key, value);
        else if (key == "n_reps") gen.n_reps = to_count(key, value);
        else if (key == "n_vars") gen.n_vars = to_count(key, value);
        else if (key == "noise_sigma") gen.noise_sigma = to_real(key, value);
        else if (key == "levels") gen.levels = to_reals(key, value);
        else if (key == "gen_seed") gen.seed = to_count(key, value);
        else if (key == "signatures") {
            if (lower(value) != "auto")
                throw ArgumentError("config 'signatures': only 'auto' is accepted; "
                                    "use signature.<k> keys for explicit peaks");
            explicit_auto = true;
        } else if (key.rfind("signature.", 0) == 0) {
            const auto k = parse_int(key.substr(10));
            if (!k || *k < 1) throw ArgumentError("config '" + key + "': bad component number");
            sig_peaks[static_cast<std::size_t>(*k)] = to_peaks(key, value);
        }
        else if (key == "split_fraction") cfg.split_fraction = to_real(key, value);
        else if (key == "split_seed") cfg.split_seed = to_count(key, value);
        else if (key == "perm_mode") {
            const auto v = lower(value);
            if (v == "exact") cfg.perm.kind = PermutationMode::Kind::exact;
            else if (v == "monte_carlo") cfg.perm.kind = PermutationMode::Kind::monte_carlo;
            else throw ArgumentError("config 'perm_mode': expected exact or monte_carlo");
        }
        else if (key == "perm_n") cfg.perm.n_perm = to_count(key, value);
        else if (key == "perm_seed") cfg.perm.seed = to_count(key, value);
        else if (key == "exhaustive_limit") cfg.exhaustive_limit = to_count(key, value);
        else if (key == "threads") cfg.threads = to_count(key, value);
        else if (key == "fdr_family") {
            const auto v = lower(value);
            if (v == "per_variable") cfg.family = FdrFamily::per_variable;
            else if (v == "global") cfg.family = FdrFamily::global;
            else throw ArgumentError("config 'fdr_family': expected per_variable or global");
        }
        else if (key == "alpha") cfg.alpha = to_real(key, value);
        else if (key == "cutoffs") {
            cfg.cutoffs.clear();
            if (lower(value) != "auto")
                for (auto f : split_fields(value))
                    cfg.cutoffs.push_back(to_count(key, std::string(trim(f))));
        }
        else if (key == "lasso_n_lambda") cfg.lasso.n_lambda = to_count(key, value);
        else if (key == "lasso_min_ratio") cfg.lasso.min_ratio = to_real(key, value);
        else if (key == "lasso_folds") cfg.lasso.k_folds = to_count(key, value);
        else if (key == "lasso_seed") cfg.lasso.seed = to_count(key, value);
        else if (key == "ridge_n_lambda") cfg.ridge.n_lambda = to_count(key, value);
        else if (key == "ridge_max_scale") cfg.ridge.max_scale = to_real(key, value);
        else if (key == "ridge_min_ratio") cfg.ridge.min_ratio = to_real(key, value);
        else if (key == "ridge_folds") cfg.ridge.k_folds = to_count(key, value);
        else if (key == "ridge_seed") cfg.ridge.seed = to_count(key, value);
        else if (key == "write_pvalues") {
            const auto v = lower(value);
            if (v != "true" && v != "false")
                throw ArgumentError("config 'write_pvalues': expected true or false");
            cfg.write_pvalues = v == "true";
        }
        else throw ArgumentError("unknown config key '" + key + "'");
    }

    if (!sig_peaks.empty()) {
        if (explicit_auto) throw ArgumentError("signatures = auto conflicts with signature.<k> keys");
        if (sig_peaks.size() != gen.n_components || sig_peaks.rbegin()->first != gen.n_components)
            throw ArgumentError("signature.<k> keys must cover components 1.." +
                                std::to_string(gen.n_components));
        for (auto& [k, peaks] : sig_peaks)
            gen.signatures.push_back(ComponentSignature{std::move(peaks), gen.n_vars});
    }
    if (cfg.data_path) cfg.generate.reset();
    else cfg.generate = gen;
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct StrategyEntry {
    std::string id;
    SelectionResult selection;
    std::vector<Band> bands;
    double mae = 0.0;
    std::vector<double> ridge_lambdas;
};

struct DatasetFingerprint {
    std::size_t n_samples = 0, n_reps = 0, n_vars = 0, n_responses = 0;
    std::size_t n_train = 0, n_validation = 0, n_pairs = 0;
    std::string source;  // "generated" or the CSV path
    std::uint64_t gen_seed = 0, split_seed = 0, perm_seed = 0, lasso_seed = 0, ridge_seed = 0;
    double noise_sigma = 0.0;
};

struct Report {
    DatasetFingerprint dataset;
    std::vector<StrategyEntry> strategies;  // requested strategies, in order
    StrategyEntry baseline;                 // all variables
    SignificanceCounts counts;
    std::vector<std::size_t> ground_truth;  // empty for ingested data
    FdrFamily family = FdrFamily::per_variable;
    double alpha = 0.05;
    PermutationMode perm;
    std::vector<std::pair<std::string, double>> timing;  // seconds, excluded from determinism
};

struct CompareRow {
    std::string strategy;
    std::size_t n_selected = 0;
    double mae = 0.0;
};

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

struct LoadedData {
    SampleSet samples;
    std::vector<std::size_t> ground_truth;
};

// Training/validation views used by every downstream stage.
struct PreparedData {
    TrainValidationSplit split;
    SampleSet train;
    SampleSet validation;
    Eigen::MatrixXd x_train, y_train;  // averaged repetitions
    Eigen::MatrixXd x_valid, y_valid;
};

struct Selections {
    SignificanceCounts counts;
    std::vector<StrategyEntry> strategies;  // selection and bands filled, no MAE yet
};

inline LoadedData load_data(const PipelineConfig& cfg) {
    if (cfg.data_path) {
        std::ifstream in(*cfg.data_path);
        if (!in) throw std::runtime_error("cannot open data file '" + *cfg.data_path + "'");
        return {ingest_samples(in), {}};
    }
    auto gen = generate_dataset(*cfg.generate);
    return {std::move(gen.samples), std::move(gen.ground_truth)};
}

inline PreparedData prepare(const SampleSet& samples, double fraction, std::uint64_t seed) {
    auto split = split_train_validation(samples, fraction, seed);
    auto train = subset_samples(samples, split.train_indices);
    auto valid = subset_samples(samples, split.validation_indices);
    PreparedData d{std::move(split), train, valid, {}, {}, {}, {}};
    d.x_train = average_repetitions(d.train).values;
    d.y_train = d.train.response_matrix();
    d.x_valid = average_repetitions(d.validation).values;
    d.y_valid = d.validation.response_matrix();
    return d;
}

inline PValueMatrix load_pvalue_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open p-value matrix '" + path + "'");
    return read_pvalue_matrix(in);
}

namespace detail {

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

inline void write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::runtime_error("cannot create output directory '" + dir + "'");
}

inline StrategyEntry make_entry(std::string id, SelectionResult sel) {
    StrategyEntry e;
    e.id = std::move(id);
    e.bands = contiguous_bands(sel);
    e.selection = std::move(sel);
    return e;
}

}  // namespace detail

// All selections from training data only: NPC at each cutoff and the
// multivariate Lasso. The p-value matrix is computed unless supplied.
inline Selections compute_selections(const PreparedData& data, const PipelineConfig& cfg,
                                     const PValueMatrix& raw) {
    Selections out;
    auto adj = detail::run_stage("fdr", [&] { return adjust_matrix(raw, cfg.family); });
    out.counts = detail::run_stage("fdr", [&] { return significance_counts(adj, cfg.alpha); });

    auto lasso = detail::run_stage("lasso", [&] {
        const auto stdz = fit_standardizer(data.x_train);
        return multivariate_lasso_select(stdz.apply(data.x_train), data.y_train, cfg.lasso);
    });

    return detail::run_stage("select", [&] {
        const std::size_t nv = out.counts.counts.size();
        if (cfg.cutoffs.empty()) {
            const std::pair<const char*, double> pct[] = {
                {"npc_p50", 0.50}, {"npc_p75", 0.75}, {"npc_p90", 0.90}};
            for (const auto& [id, q] : pct)
                out.strategies.push_back(detail::make_entry(
                    id, select_by_cutoff(out.counts, percentile_cutoff(out.counts, q))));
            const std::size_t k = std::clamp<std::size_t>(lasso.selected.size(), 1, nv);
            out.strategies.push_back(detail::make_entry(
                "npc_matched", select_by_cutoff(out.counts, cutoff_for_target_size(out.counts, k))));
        } else {
            for (auto c : cfg.cutoffs)
                out.strategies.push_back(
                    detail::make_entry("npc_c" + std::to_string(c), select_by_cutoff(out.counts, c)));
        }
        out.strategies.push_back(detail::make_entry("lasso", std::move(lasso)));
        return std::move(out);
    });
}

inline PValueMatrix compute_pvalues(const PreparedData& data, const PipelineConfig& cfg) {
    return detail::run_stage("permtest", [&] {
        if (cfg.pvalues_path) {
            auto m = load_pvalue_matrix(*cfg.pvalues_path);
            if (m.n_vars != data.train.n_vars() ||
                m.n_pairs() != all_pairs(data.train.n_samples()).size())
                throw DataError("p-value matrix shape does not match the training set");
            return m;
        }
        return pairwise_pvalue_matrix(data.train, cfg.perm, cfg.threads, cfg.exhaustive_limit);
    });
}

// Ridge on the training rows restricted to the selection; validation MAE.
inline void score_entry(StrategyEntry& e, const PreparedData& data, const RidgeOptions& opt) {
    const auto fit = fit_ridge_model(data.x_train, data.y_train, e.selection.selected, opt);
    e.ridge_lambdas = fit.lambdas;
    e.mae = mae(predict(fit, data.x_valid), data.y_valid);
}

inline Report run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    Report rep;
    auto tick = clock::now();
    auto lap = [&](const char* name) {
        const auto now = clock::now();
        rep.timing.emplace_back(name, std::chrono::duration<double>(now - tick).count());
        tick = now;
    };

    auto loaded = detail::run_stage("load", [&] { return load_data(cfg); });
    lap("load");
    auto data = detail::run_stage(
        "split", [&] { return prepare(loaded.samples, cfg.split_fraction, cfg.split_seed); });
    lap("split");

    if (!cfg.out_dir.empty()) detail::run_stage("report", [&] { detail::ensure_dir(cfg.out_dir); });
    auto raw = compute_pvalues(data, cfg);
    lap("permtest");
    if (!cfg.out_dir.empty() && cfg.write_pvalues && !cfg.pvalues_path)
        detail::run_stage("report", [&] {
            detail::write_file(std::filesystem::path(cfg.out_dir) / "pvalues.csv",
                               [&](std::ostream& o) { write_pvalue_matrix(o, raw); });
        });

    auto sel = compute_selections(data, cfg, raw);
    lap("selection");
    if (!cfg.out_dir.empty())
        detail::run_stage("report", [&] {
            detail::write_file(std::filesystem::path(cfg.out_dir) / "counts.csv",
                               [&](std::ostream& o) { write_counts(o, sel.counts); });
        });

    detail::run_stage("ridge", [&] {
        for (auto& e : sel.strategies) score_entry(e, data, cfg.ridge);
        SelectionResult all;
        all.method.kind = SelectionMethod::Kind::all;
        all.n_vars_total = data.train.n_vars();
        for (std::size_t v = 0; v < all.n_vars_total; ++v) all.selected.push_back(v);
        rep.baseline = detail::make_entry("all", std::move(all));
        score_entry(rep.baseline, data, cfg.ridge);
    });
    lap("ridge");

    const auto& s = loaded.samples;
    rep.dataset = {s.n_samples(), s.n_reps(), s.n_vars(), s.n_responses(),
                   data.train.n_samples(), data.validation.n_samples(), raw.n_pairs(),
                   cfg.data_path ? *cfg.data_path : std::string("generated"),
                   cfg.generate ? cfg.generate->seed : 0, cfg.split_seed, cfg.perm.seed,
                   cfg.lasso.seed, cfg.ridge.seed,
                   cfg.generate ? cfg.generate->noise_sigma : 0.0};
    rep.strategies = std::move(sel.strategies);
    rep.counts = std::move(sel.counts);
    rep.ground_truth = std::move(loaded.ground_truth);
    rep.family = cfg.family;
    rep.alpha = cfg.alpha;
    rep.perm = cfg.perm;
    return rep;
}

// (strategy, n_selected, MAE) for every strategy plus the baseline, sorted
// by n_selected; ties keep report order.
inline std::vector<CompareRow> compare_strategies(const Report& rep) {
    std::vector<CompareRow> rows;
    for (const auto& e : rep.strategies) rows.push_back({e.id, e.selection.selected.size(), e.mae});
    rows.push_back({rep.baseline.id, rep.baseline.selection.selected.size(), rep.baseline.mae});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompareRow& a, const CompareRow& b) { return a.n_selected < b.n_selected; });
    return rows;
}

inline std::vector<CompareRow> compare_strategies(const PipelineConfig& cfg) {
    return compare_strategies(run_pipeline(cfg));
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const StrategyEntry& e) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    switch (e.selection.method.kind) {
        case SelectionMethod::Kind::npc:
            j["method"] = "npc";
            j["cutoff"] = e.selection.method.cutoff;
            break;
        case SelectionMethod::Kind::lasso:
            j["method"] = "lasso";
            j["lasso_lambdas"] = e.selection.method.lambdas;
            break;
        case SelectionMethod::Kind::all:
            j["method"] = "all";
            break;
    }
    j["n_selected"] = e.selection.selected.size();
    j["selected"] = e.selection.selected;
    auto bands = nlohmann::ordered_json::array();
    for (const auto& b : e.bands) bands.push_back({b.start, b.end});
    j["bands"] = std::move(bands);
    j["n_bands"] = e.bands.size();
    j["ridge_lambdas"] = e.ridge_lambdas;
    j["validation_mae"] = e.mae;
    return j;
}

inline nlohmann::ordered_json to_json(const Report& r, bool with_timing = true) {
    nlohmann::ordered_json j;
    const auto& d = r.dataset;
    j["dataset"] = {{"source", d.source},
                    {"n_samples", d.n_samples},
                    {"n_reps", d.n_reps},
                    {"n_vars", d.n_vars},
                    {"n_responses", d.n_responses},
                    {"n_train", d.n_train},
                    {"n_validation", d.n_validation},
                    {"n_pairs", d.n_pairs},
                    {"noise_sigma", d.noise_sigma},
                    {"seeds",
                     {{"generator", d.gen_seed},
                      {"split", d.split_seed},
                      {"permutation", d.perm_seed},
                      {"lasso_cv", d.lasso_seed},
                      {"ridge_cv", d.ridge_seed}}}};
    nlohmann::ordered_json perm;
    if (r.perm.kind == PermutationMode::Kind::exact) {
        perm["mode"] = "exact";
    } else {
        perm["mode"] = "monte_carlo";
        perm["n_perm"] = r.perm.n_perm;
    }
    j["settings"] = {{"permutation", perm},
                     {"fdr_family", to_string(r.family)},
                     {"alpha", r.alpha},
                     {"lasso_objective", "(1/(2n)) ||y - Xb||^2 + lambda ||b||_1"},
                     {"ridge_objective", "||y - Xb||^2 + lambda ||b||^2"}};
    auto strategies = nlohmann::ordered_json::array();
    for (const auto& e : r.strategies) strategies.push_back(to_json(e));
    j["strategies"] = std::move(strategies);
    j["baseline"] = to_json(r.baseline);
    j["counts"] = r.counts.counts;
    if (!r.ground_truth.empty()) j["ground_truth"] = r.ground_truth;
    if (with_timing) {
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& [name, sec] : r.timing) t[name] = sec;
        j["timing_seconds"] = std::move(t);
    }
    return j;
}

// File-name-safe strategy id.
inline std::string selection_file_name(const std::string& id) {
    std::string s = id;
    for (auto& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
    return "selection_" + s + ".csv";
}

// report.json, selection_<strategy>.csv per strategy, counts.csv,
// mae_vs_k.csv (strategy,n_selected,mae) and selection_map.csv (variable x
// strategy 0/1 matrix).
inline std::vector<std::filesystem::path> emit_report(const Report& r, const std::string& out_dir) {
    namespace fs = std::filesystem;
    detail::ensure_dir(out_dir);
    const fs::path dir(out_dir);
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
        detail::write_file(dir / name, body);
        written.push_back(dir / name);
    };

    emit("report.json", [&](std::ostream& o) { o << to_json(r).dump(2) << '\n'; });
    for (const auto& e : r.strategies)
        emit(selection_file_name(e.id), [&](std::ostream& o) { write_selection(o, e.selection); });
    emit("counts.csv", [&](std::ostream& o) { write_counts(o, r.counts); });
    emit("mae_vs_k.csv", [&](std::ostream& o) {
        o << "strategy,n_selected,mae\n";
        for (const auto& row : compare_strategies(r))
            o << row.strategy << ',' << row.n_selected << ',' << detail::format_double(row.mae) << '\n';
    });
    emit("selection_map.csv", [&](std::ostream& o) {
        o << "variable";
        for (const auto& e : r.strategies) o << ',' << e.id;
        o << '\n';
        const std::size_t nv = r.dataset.n_vars;
        std::vector<std::vector<char>> mask;
        for (const auto& e : r.strategies) {
            mask.emplace_back(nv, 0);
            for (auto v : e.selection.selected)
                if (v < nv) mask.back()[v] = 1;
        }
        for (std::size_t v = 0; v < nv; ++v) {
            o << v;
            for (const auto& m : mask) o << ',' << (m[v] ? 1 : 0);
            o << '\n';
        }
    });
    return written;
}

}  // namespace permsel
