#pragma once

// Benjamini-Hochberg adjustment, per-variable significance counts, and
// count-cutoff variable selection.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "permsel/error.hpp"
#include "permsel/permtest.hpp"

namespace permsel {

struct SignificanceCounts {
    std::vector<std::size_t> counts;  // [variable]
    double alpha = 0.05;
    FdrFamily family = FdrFamily::per_variable;
    std::size_t n_pairs = 0;
};

struct SelectionMethod {
    enum class Kind { npc, lasso, all };
    Kind kind = Kind::all;
    std::size_t cutoff = 0;       // npc
    std::vector<double> lambdas;  // lasso, one per response
};

struct SelectionResult {
    std::vector<std::size_t> selected;  // ascending, unique
    SelectionMethod method;
    std::size_t n_vars_total = 0;
};

// Inclusive run of consecutive variable indices.
struct Band {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const Band&, const Band&) = default;
};

inline const char* to_string(FdrFamily f) {
    return f == FdrFamily::per_variable ? "per_variable" : "global";
}

// Step-up BH adjusted p-values, returned in input order:
// q_(i) = min_{j >= i} min(1, m * p_(j) / j).
inline std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double x : p)
        if (!std::isfinite(x) || !(x > 0.0 && x <= 1.0))
            throw ArgumentError("p-values must lie in (0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> q(m);
    const double dm = static_cast<double>(m);
    double running = 1.0;
    for (std::size_t rank = m; rank > 0; --rank) {
        const std::size_t idx = order[rank - 1];
        running = std::min(running, dm * p[idx] / static_cast<double>(rank));
        // m * p / m can round below p.
        q[idx] = std::max(running, p[idx]);
    }
    return q;
}

inline PValueMatrix adjust_matrix(const PValueMatrix& raw,
                                  FdrFamily family = FdrFamily::per_variable) {
    if (raw.kind != PValueKind::raw) throw ArgumentError("p-value matrix is already adjusted");
    PValueMatrix adj = raw;
    adj.kind = PValueKind::adjusted;
    adj.family = family;
    if (family == FdrFamily::global) {
        adj.values = bh_adjust(raw.values);
        return adj;
    }
    const std::size_t np = raw.n_pairs();
    std::vector<double> column(np);
    for (std::size_t v = 0; v < raw.n_vars; ++v) {
        for (std::size_t p = 0; p < np; ++p) column[p] = raw.at(p, v);
        const auto q = bh_adjust(column);
        for (std::size_t p = 0; p < np; ++p) adj.at(p, v) = q[p];
    }
    return adj;
}

// counts[v] = #{pairs : adjusted p <= alpha}.
inline SignificanceCounts significance_counts(const PValueMatrix& adj, double alpha) {
    if (adj.kind != PValueKind::adjusted)
        throw ArgumentError("significance counting needs an adjusted p-value matrix");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    SignificanceCounts c;
    c.counts.assign(adj.n_vars, 0);
    c.alpha = alpha;
    c.family = adj.family;
    c.n_pairs = adj.n_pairs();
    for (std::size_t p = 0; p < adj.n_pairs(); ++p) {
        const auto row = adj.row(p);
        for (std::size_t v = 0; v < adj.n_vars; ++v) c.counts[v] += row[v] <= alpha ? 1 : 0;
    }
    return c;
}

// {v : counts[v] >= cutoff}; every variable tied at the boundary is kept.
inline SelectionResult select_by_cutoff(const SignificanceCounts& c, std::size_t cutoff) {
    SelectionResult s;
    s.method.kind = SelectionMethod::Kind::npc;
    s.method.cutoff = cutoff;
    s.n_vars_total = c.counts.size();
    for (std::size_t v = 0; v < c.counts.size(); ++v)
        if (c.counts[v] >= cutoff) s.selected.push_back(v);
    return s;
}

// Largest cutoff whose selection holds at least k variables.
inline std::size_t cutoff_for_target_size(const SignificanceCounts& c, std::size_t k) {
    if (k < 1 || k > c.counts.size())
        throw ArgumentError("target size must lie in [1, n_vars]");
    auto sorted = c.counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // The k-th largest count admits at least k variables, and any larger
    // cutoff admits fewer than k.
    return sorted[k - 1];
}

// Nearest-rank percentile of the counts: the ceil(q * n)-th smallest value.
inline std::size_t percentile_cutoff(const SignificanceCounts& c, double q) {
    if (c.counts.empty()) throw ArgumentError("no counts");
    if (!(q > 0.0 && q <= 1.0)) throw ArgumentError("percentile must lie in (0, 1]");
    auto sorted = c.counts;
    std::sort(sorted.begin(), sorted.end());
    const auto rank =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9));
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

inline std::vector<Band> contiguous_bands(const SelectionResult& sel) {
    std::vector<Band> bands;
    for (auto v : sel.selected) {
        if (!bands.empty() && bands.back().end + 1 == v)
            bands.back().end = v;
        else
            bands.push_back({v, v});
    }
    return bands;
}

inline void write_counts(std::ostream& out, const SignificanceCounts& c) {
    out << "variable,count\n";
    for (std::size_t v = 0; v < c.counts.size(); ++v) out << v << ',' << c.counts[v] << '\n';
}

inline void write_selection(std::ostream& out, const SelectionResult& s) {
    out << "variable\n";
    for (auto v : s.selected) out << v << '\n';
}

}  // namespace permsel
