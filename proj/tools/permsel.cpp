// permsel command-line interface.
//
//   permsel generate  --out DIR                      synthetic data.csv + ground_truth.csv
//   permsel select    --data CSV --out DIR           p-values, counts, selections
//   permsel fit       --data CSV --selection CSV --out DIR   Ridge model.json
//   permsel evaluate  --data CSV --model JSON        validation MAE on stdout
//   permsel pipeline  --out DIR                      full run, report files
//   permsel compare                                  strategy,n_selected,mae on stdout
//
// Settings come from `--config FILE` (key = value lines) and are overridden by
// flags. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "permsel/permsel.hpp"

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string config;
    std::string seed;
    std::string out;
    std::string data;
    std::string threads;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "settings file (key = value lines)");
    cmd->add_option("--seed", f.seed, "master seed for every stage");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--data", f.data, "sample CSV (instead of generating data)");
    cmd->add_option("--threads", f.threads, "permutation-test workers (0 = all cores)");
    cmd->add_option("--set", f.sets, "override a setting: key=value (repeatable)");
}

permsel::ConfigMap settings(const CommonFlags& f) {
    permsel::ConfigMap m;
    if (!f.config.empty()) m = permsel::load_config_file(f.config);
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        m[std::string(permsel::detail::trim(kv.substr(0, eq)))] =
            std::string(permsel::detail::trim(kv.substr(eq + 1)));
    }
    if (!f.seed.empty()) m["seed"] = f.seed;
    if (!f.out.empty()) m["out"] = f.out;
    if (!f.data.empty()) m["data"] = f.data;
    if (!f.threads.empty()) m["threads"] = f.threads;
    return m;
}

permsel::PipelineConfig pipeline_config(const CommonFlags& f) {
    try {
        return permsel::make_pipeline_config(settings(f));
    } catch (const permsel::ArgumentError& e) {
        throw UsageError(e.what());
    }
}

std::string require_out(const permsel::PipelineConfig& cfg) {
    if (cfg.out_dir.empty()) throw UsageError("--out is required");
    return cfg.out_dir;
}

void write_to(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    permsel::detail::write_file(path, body);
    std::cerr << "wrote " << path.string() << '\n';
}

int cmd_generate(const CommonFlags& f) {
    auto cfg = pipeline_config(f);
    if (!cfg.generate) throw UsageError("generate does not take --data");
    const auto out = require_out(cfg);
    const auto gen = permsel::generate_dataset(*cfg.generate);
    permsel::detail::ensure_dir(out);
    write_to(std::filesystem::path(out) / "data.csv",
             [&](std::ostream& o) { permsel::write_samples(o, gen.samples); });
    write_to(std::filesystem::path(out) / "ground_truth.csv",
             [&](std::ostream& o) { permsel::write_ground_truth(o, gen.ground_truth); });
    return 0;
}

int cmd_select(const CommonFlags& f) {
    auto cfg = pipeline_config(f);
    const auto out = require_out(cfg);
    const auto loaded = permsel::detail::run_stage("load", [&] { return permsel::load_data(cfg); });
    const auto data = permsel::prepare(loaded.samples, cfg.split_fraction, cfg.split_seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto raw = permsel::compute_pvalues(data, cfg);
    std::cerr << "permutation stage: " << raw.n_pairs() << " pairs x " << raw.n_vars
              << " variables in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
              << " s\n";
    permsel::detail::ensure_dir(out);
    const std::filesystem::path dir(out);
    if (!cfg.pvalues_path)
        write_to(dir / "pvalues.csv", [&](std::ostream& o) { permsel::write_pvalue_matrix(o, raw); });
    const auto sel = permsel::compute_selections(data, cfg, raw);
    write_to(dir / "counts.csv", [&](std::ostream& o) { permsel::write_counts(o, sel.counts); });
    for (const auto& e : sel.strategies) {
        write_to(dir / permsel::selection_file_name(e.id),
                 [&](std::ostream& o) { permsel::write_selection(o, e.selection); });
        std::cout << e.id << ',' << e.selection.selected.size() << '\n';
    }
    return 0;
}

std::vector<std::size_t> read_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open selection file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> out;
    if (!permsel::detail::next_line(in, line, line_no) || permsel::detail::trim(line) != "variable")
        throw permsel::DataError("selection file '" + path + "' must start with a 'variable' header");
    while (permsel::detail::next_line(in, line, line_no)) {
        const auto v = permsel::detail::parse_int(line);
        if (!v || *v < 0)
            throw permsel::DataError("bad variable index in '" + path + "' at row " +
                                     std::to_string(line_no));
        out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

int cmd_fit(const CommonFlags& f, const std::string& selection_path) {
    auto cfg = pipeline_config(f);
    const auto out = require_out(cfg);
    const auto loaded = permsel::detail::run_stage("load", [&] { return permsel::load_data(cfg); });
    const auto data = permsel::prepare(loaded.samples, cfg.split_fraction, cfg.split_seed);
    std::vector<std::size_t> vars;
    if (selection_path.empty()) {
        for (std::size_t v = 0; v < data.train.n_vars(); ++v) vars.push_back(v);
    } else {
        vars = read_selection(selection_path);
    }
    for (auto v : vars)
        if (v >= data.train.n_vars())
            throw permsel::DataError("selected variable " + std::to_string(v) + " out of range");
    const auto fit = permsel::fit_ridge_model(data.x_train, data.y_train, vars, cfg.ridge);
    permsel::detail::ensure_dir(out);
    write_to(std::filesystem::path(out) / "model.json",
             [&](std::ostream& o) { o << permsel::to_json(fit).dump(2) << '\n'; });
    return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& model_path) {
    if (model_path.empty()) throw UsageError("--model is required");
    auto cfg = pipeline_config(f);
    std::ifstream in(model_path);
    if (!in) throw std::runtime_error("cannot open model file '" + model_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw permsel::DataError("model file '" + model_path + "': " + e.what());
    }
    const auto fit = permsel::model_from_json(j);
    const auto loaded = permsel::detail::run_stage("load", [&] { return permsel::load_data(cfg); });
    const auto data = permsel::prepare(loaded.samples, cfg.split_fraction, cfg.split_seed);
    const double err = permsel::mae(permsel::predict(fit, data.x_valid), data.y_valid);
    std::cout << "validation_mae," << permsel::detail::format_double(err) << '\n';
    return 0;
}

int cmd_pipeline(const CommonFlags& f) {
    auto cfg = pipeline_config(f);
    const auto out = require_out(cfg);
    const auto rep = permsel::run_pipeline(cfg);
    for (const auto& path : permsel::emit_report(rep, out)) std::cerr << "wrote " << path.string() << '\n';
    for (const auto& [stage, sec] : rep.timing) std::cerr << "timing " << stage << ' ' << sec << " s\n";
    return 0;
}

int cmd_compare(const CommonFlags& f) {
    auto cfg = pipeline_config(f);
    const auto rep = permsel::run_pipeline(cfg);
    if (!cfg.out_dir.empty()) permsel::emit_report(rep, cfg.out_dir);
    std::cout << "strategy,n_selected,mae\n";
    for (const auto& row : permsel::compare_strategies(rep))
        std::cout << row.strategy << ',' << row.n_selected << ','
                  << permsel::detail::format_double(row.mae) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permutation-test variable selection with Lasso and Ridge baselines"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string selection_path;
    std::string model_path;
    auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
    auto* sel = app.add_subcommand("select", "pairwise permutation tests and variable selection");
    auto* fit = app.add_subcommand("fit", "fit a Ridge model on a selection");
    auto* eval = app.add_subcommand("evaluate", "validation MAE of a fitted model");
    auto* pipe = app.add_subcommand("pipeline", "run the full pipeline and write a report");
    auto* cmp = app.add_subcommand("compare", "print the strategy comparison table");
    for (auto* c : {gen, sel, fit, eval, pipe, cmp}) add_common(c, flags);
    fit->add_option("--selection", selection_path, "selection CSV (default: all variables)");
    eval->add_option("--model", model_path, "model JSON written by fit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    }

    try {
        if (*gen) return cmd_generate(flags);
        if (*sel) return cmd_select(flags);
        if (*fit) return cmd_fit(flags, selection_path);
        if (*eval) return cmd_evaluate(flags, model_path);
        if (*pipe) return cmd_pipeline(flags);
        if (*cmp) return cmd_compare(flags);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
