#pragma once

// Synthetic design-of-experiments mixture spectra. Each component has a
// Gaussian-peak signature; a repetition of a sample is the
// concentration-weighted sum of signatures plus iid Gaussian noise.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "permsel/datamodel.hpp"
#include "permsel/detail/rng.hpp"
#include "permsel/error.hpp"

namespace permsel {

struct MixtureDesign {
    std::size_t n_components = 0;
    std::vector<std::vector<double>> levels;  // per component, ascending
    std::vector<std::vector<double>> rows;    // [sample][component]
    std::uint64_t seed = 0;
};

struct Peak {
    double center = 0.0;  // variable index, may be fractional
    double width = 1.0;
    double height = 1.0;
};

struct ComponentSignature {
    std::vector<Peak> peaks;
    std::size_t n_vars = 0;

    void validate() const {
        if (n_vars == 0) throw ArgumentError("signature n_vars must be > 0");
        if (peaks.empty()) throw ArgumentError("signature needs at least one peak");
        for (const auto& p : peaks) {
            if (!(p.center >= 0.0 && p.center < static_cast<double>(n_vars)))
                throw ArgumentError("peak center out of range [0, n_vars)");
            if (!(p.width > 0.0) || !std::isfinite(p.width))
                throw ArgumentError("peak width must be > 0");
            // Zero height is allowed so that flat signatures can be expressed.
            if (!(p.height >= 0.0) || !std::isfinite(p.height))
                throw ArgumentError("peak height must be >= 0");
        }
    }
};

struct GeneratorConfig {
    std::size_t n_samples = 250;
    std::size_t n_components = 6;
    std::size_t n_levels = 3;
    std::size_t n_reps = 5;
    std::size_t n_vars = 130;
    double noise_sigma = 1e-7;
    std::vector<ComponentSignature> signatures;  // empty means "auto"
    std::vector<double> levels;                  // empty means default_levels(n_levels)
    std::uint64_t seed = 1;
};

struct GeneratedData {
    SampleSet samples;
    std::vector<std::size_t> ground_truth;  // ascending informative variable indices
    MixtureDesign design;
    std::vector<ComponentSignature> signatures;
};

inline constexpr double kAutoWidthLo = 2.2;
inline constexpr double kAutoWidthHi = 2.6;
inline constexpr double kAutoOffsetStep = 0.15;

// 0.5, 1.0, 1.5, ... : positive and equispaced.
inline std::vector<double> default_levels(std::size_t n_levels) {
    std::vector<double> out(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) out[l] = 0.5 * static_cast<double>(l + 1);
    return out;
}

namespace detail {

inline std::uint64_t checked_pow(std::size_t base, std::size_t exp) {
    std::uint64_t r = 1;
    for (std::size_t e = 0; e < exp; ++e) {
        if (r > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        r *= base;
    }
    return r;
}

}  // namespace detail

// Full factorial in lexicographic order when n_samples equals the design-space
// size; otherwise a seeded uniform sample of distinct combinations, also
// listed in lexicographic order.
inline MixtureDesign build_design(std::size_t n_components, std::size_t n_levels,
                                  std::size_t n_samples, std::uint64_t seed,
                                  std::vector<double> levels = {}) {
    if (n_components == 0 || n_levels == 0 || n_samples == 0)
        throw ArgumentError("design needs n_components, n_levels, n_samples > 0");
    if (levels.empty()) levels = default_levels(n_levels);
    if (levels.size() != n_levels) throw ArgumentError("levels list length must equal n_levels");

    const auto space = detail::checked_pow(n_levels, n_components);
    if (n_samples > space)
        throw ArgumentError("design space exhausted (" + std::to_string(space) + " < " +
                            std::to_string(n_samples) + ")");

    std::vector<std::uint64_t> picks;
    picks.reserve(n_samples);
    if (n_samples == space) {
        for (std::uint64_t c = 0; c < space; ++c) picks.push_back(c);
    } else {
        // Floyd's sampling without replacement.
        auto rng = detail::make_stream(seed, {0xd0e});
        std::set<std::uint64_t> chosen;
        for (std::uint64_t j = space - n_samples; j < space; ++j) {
            const auto t = detail::uniform_index(rng, j + 1);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        picks.assign(chosen.begin(), chosen.end());
    }

    MixtureDesign d;
    d.n_components = n_components;
    d.levels.assign(n_components, levels);
    d.seed = seed;
    d.rows.reserve(n_samples);
    for (auto code : picks) {
        std::vector<double> row(n_components);
        for (std::size_t k = n_components; k-- > 0;) {
            row[k] = levels[code % n_levels];
            code /= n_levels;
        }
        d.rows.push_back(std::move(row));
    }
    return d;
}

inline std::vector<double> signature_vector(const ComponentSignature& sig) {
    sig.validate();
    std::vector<double> out(sig.n_vars, 0.0);
    for (const auto& p : sig.peaks) {
        const double two_w2 = 2.0 * p.width * p.width;
        for (std::size_t v = 0; v < sig.n_vars; ++v) {
            const double d = static_cast<double>(v) - p.center;
            out[v] += p.height * std::exp(-d * d / two_w2);
        }
    }
    return out;
}

// Two bands at 30% and 70% of the axis. Every component has one peak in each
// band. Widths, small center offsets and heights differ per component (and
// between the bands), so signatures are linearly independent and signed
// combinations of concentration differences stay away from zero, while
// adjacent variables remain strongly correlated.
inline std::vector<ComponentSignature> auto_signatures(std::size_t n_components,
                                                       std::size_t n_vars) {
    if (n_components == 0 || n_vars == 0)
        throw ArgumentError("auto signatures need n_components, n_vars > 0");
    const double band1 = 0.3 * static_cast<double>(n_vars);
    const double band2 = 0.7 * static_cast<double>(n_vars);
    const double mid = 0.5 * static_cast<double>(n_components - 1);
    const double denom = n_components == 1 ? 1.0 : static_cast<double>(n_components - 1);
    auto frac = [](double x) { return x - std::floor(x); };
    std::vector<ComponentSignature> sigs;
    sigs.reserve(n_components);
    for (std::size_t k = 0; k < n_components; ++k) {
        const double kk = static_cast<double>(k);
        const double off = (kk - mid) * kAutoOffsetStep;
        const double w1 = kAutoWidthLo + (kAutoWidthHi - kAutoWidthLo) * kk / denom;
        const double w2 = kAutoWidthHi - (kAutoWidthHi - kAutoWidthLo) * kk / denom;
        const double h1 = 0.6 + 0.8 * frac(0.5 + kk * 0.6180339887498949);
        const double h2 = 0.6 + 0.8 * frac(0.25 + kk * 0.4142135623730951);
        ComponentSignature s;
        s.n_vars = n_vars;
        s.peaks.push_back({band1 + off, w1, h1});
        s.peaks.push_back({band2 - off, w2, h2});
        sigs.push_back(std::move(s));
    }
    return sigs;
}

// One sample's repetitions [rep][variable]: sum_k conc_k * signature_k plus
// N(0, noise_sigma^2) per entry, drawn from rng in row-major order.
inline std::vector<std::vector<double>> synthesize_sample(
    std::span<const double> concentrations, std::span<const std::vector<double>> signatures,
    std::size_t n_reps, double noise_sigma, detail::Rng& rng) {
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw ArgumentError("noise_sigma must be finite and >= 0");
    if (concentrations.size() != signatures.size())
        throw ArgumentError("one concentration per signature required");
    if (signatures.empty()) throw ArgumentError("at least one signature required");
    const std::size_t n_vars = signatures.front().size();
    for (const auto& s : signatures)
        if (s.size() != n_vars) throw ArgumentError("signature lengths differ");

    std::vector<double> clean(n_vars, 0.0);
    for (std::size_t k = 0; k < signatures.size(); ++k)
        for (std::size_t v = 0; v < n_vars; ++v) clean[v] += concentrations[k] * signatures[k][v];

    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    std::vector<std::vector<double>> reps(n_reps, clean);
    if (noise_sigma > 0.0)
        for (auto& row : reps)
            for (auto& x : row) x += noise(rng);
    return reps;
}

// Variables where the summed signature exceeds 1e-3 of its maximum.
inline std::vector<std::size_t> informative_variables(
    std::span<const std::vector<double>> signatures) {
    if (signatures.empty()) return {};
    std::vector<double> total(signatures.front().size(), 0.0);
    for (const auto& s : signatures)
        for (std::size_t v = 0; v < total.size(); ++v) total[v] += s[v];
    double peak = 0.0;
    for (double t : total) peak = std::max(peak, t);
    std::vector<std::size_t> out;
    if (peak <= 0.0) return out;
    for (std::size_t v = 0; v < total.size(); ++v)
        if (total[v] > 1e-3 * peak) out.push_back(v);
    return out;
}

inline GeneratedData generate_dataset(const GeneratorConfig& cfg) {
    if (cfg.n_reps == 0 || cfg.n_vars == 0) throw ArgumentError("n_reps and n_vars must be > 0");
    if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma))
        throw ArgumentError("noise_sigma must be finite and >= 0");

    auto design = build_design(cfg.n_components, cfg.n_levels, cfg.n_samples, cfg.seed, cfg.levels);
    auto sigs = cfg.signatures.empty() ? auto_signatures(cfg.n_components, cfg.n_vars)
                                       : cfg.signatures;
    if (sigs.size() != cfg.n_components)
        throw ArgumentError("expected " + std::to_string(cfg.n_components) + " signatures, got " +
                            std::to_string(sigs.size()));
    std::vector<std::vector<double>> vecs;
    vecs.reserve(sigs.size());
    for (const auto& s : sigs) {
        if (s.n_vars != cfg.n_vars) throw ArgumentError("signature n_vars differs from config");
        vecs.push_back(signature_vector(s));
    }

    const std::size_t width = std::to_string(cfg.n_samples).size();
    std::vector<std::string> ids;
    std::vector<double> meas;
    std::vector<double> resp;
    meas.reserve(cfg.n_samples * cfg.n_reps * cfg.n_vars);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        std::ostringstream id;
        id << 'S' << std::setw(static_cast<int>(width)) << std::setfill('0') << i + 1;
        ids.push_back(id.str());
        // Per-sample substream: output does not depend on generation order.
        auto rng = detail::make_stream(cfg.seed, {0x5a3, i});
        for (auto& row :
             synthesize_sample(design.rows[i], vecs, cfg.n_reps, cfg.noise_sigma, rng))
            meas.insert(meas.end(), row.begin(), row.end());
        resp.insert(resp.end(), design.rows[i].begin(), design.rows[i].end());
    }

    auto truth = informative_variables(vecs);
    SampleSet samples(std::move(ids), cfg.n_reps, cfg.n_vars, cfg.n_components, std::move(meas),
                      std::move(resp));
    return GeneratedData{std::move(samples), std::move(truth), std::move(design), std::move(sigs)};
}

inline void write_ground_truth(std::ostream& out, std::span<const std::size_t> truth) {
    out << "variable\n";
    for (auto v : truth) out << v << '\n';
}

}  // namespace permsel
