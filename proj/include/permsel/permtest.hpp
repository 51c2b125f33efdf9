#pragma once

// Two-sample permutation tests with the difference-in-means statistic, and
// the (pair x variable) p-value matrix over all pairs of training samples.
//
// For each pair of samples (i, j) and each variable, the n_reps repetition
// values of sample i are tested against those of sample j by re-assigning
// repetition labels across the two groups. The two-sided p-value counts
// partitions whose |T| reaches |T_obs| within a relative tie tolerance.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "permsel/datamodel.hpp"
#include "permsel/detail/csv.hpp"
#include "permsel/detail/parallel.hpp"
#include "permsel/detail/rng.hpp"
#include "permsel/error.hpp"

namespace permsel {

inline constexpr std::uint64_t kDefaultExhaustiveLimit = 1'000'000;
inline constexpr std::size_t kMinMonteCarloPermutations = 100;

// Enumeration would exceed the exhaustive limit; use Monte Carlo instead.
class ExhaustiveLimitError : public NumericError {
public:
    using NumericError::NumericError;
};

struct TestStatistic {
    double value = 0.0;
};

struct PairId {
    std::size_t i = 0;
    std::size_t j = 0;
    friend bool operator==(const PairId&, const PairId&) = default;
};

enum class PValueKind { raw, adjusted };

// Family over which FDR adjustment was applied (meaningful once adjusted).
enum class FdrFamily { per_variable, global };

struct PermutationMode {
    enum class Kind { exact, monte_carlo };
    Kind kind = Kind::exact;
    std::size_t n_perm = 9999;  // monte_carlo only
    std::uint64_t seed = 0;     // monte_carlo only

    static PermutationMode exact() { return {}; }
    static PermutationMode monte_carlo(std::size_t n_perm, std::uint64_t seed) {
        return {Kind::monte_carlo, n_perm, seed};
    }
};

// Row-major [pair][variable]; pairs in lexicographic (i, j) order.
struct PValueMatrix {
    std::vector<PairId> pairs;
    std::size_t n_vars = 0;
    std::vector<double> values;
    PValueKind kind = PValueKind::raw;
    PermutationMode method;
    FdrFamily family = FdrFamily::per_variable;

    std::size_t n_pairs() const noexcept { return pairs.size(); }
    double at(std::size_t pair, std::size_t var) const { return values[pair * n_vars + var]; }
    double& at(std::size_t pair, std::size_t var) { return values[pair * n_vars + var]; }
    std::span<const double> row(std::size_t pair) const {
        return {values.data() + pair * n_vars, n_vars};
    }
};

inline double tie_tolerance(double t_obs) {
    return 1e-12 * std::max(1.0, std::abs(t_obs));
}

// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t t = 1; t <= k; ++t) {
        const std::uint64_t num = n - k + t;
        // r * num / t is exact at every step; guard the multiplication.
        const std::uint64_t g = std::gcd(r, t);
        const std::uint64_t rr = r / g;
        const std::uint64_t tt = t / g;
        const std::uint64_t nn = num / tt;
        if (rr > std::numeric_limits<std::uint64_t>::max() / nn)
            return std::numeric_limits<std::uint64_t>::max();
        r = rr * nn;
    }
    return r;
}

inline TestStatistic diff_means_stat(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("empty group in difference of means");
    double sa = 0.0;
    double sb = 0.0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    return {sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size())};
}

// Lexicographic walk over the n_a-element subsets of {0, ..., n_a + n_b - 1}
// (group A index sets). Starts at the identity assignment {0, ..., n_a - 1}.
class PartitionEnumerator {
public:
    PartitionEnumerator(std::size_t n_a, std::size_t n_b,
                        std::uint64_t limit = kDefaultExhaustiveLimit)
        : n_(n_a + n_b), idx_(n_a) {
        if (n_a == 0 || n_b == 0) throw ArgumentError("both groups need at least one element");
        count_ = binomial(n_, n_a);
        if (count_ > limit)
            throw ExhaustiveLimitError("exhaustive limit exceeded: C(" + std::to_string(n_) +
                                       ", " + std::to_string(n_a) + ") > " +
                                       std::to_string(limit) + "; use Monte Carlo");
        std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    }

    std::uint64_t count() const noexcept { return count_; }
    const std::vector<std::size_t>& current() const noexcept { return idx_; }

    // Advances to the next subset; false once the last one has been visited.
    bool next() {
        const std::size_t k = idx_.size();
        std::size_t pos = k;
        while (pos > 0 && idx_[pos - 1] == n_ - k + pos - 1) --pos;
        if (pos == 0) return false;
        ++idx_[pos - 1];
        for (std::size_t t = pos; t < k; ++t) idx_[t] = idx_[t - 1] + 1;
        return true;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> idx_;
    std::uint64_t count_ = 0;
};

inline PartitionEnumerator enumerate_partitions(std::size_t n_a, std::size_t n_b,
                                                std::uint64_t limit = kDefaultExhaustiveLimit) {
    return PartitionEnumerator(n_a, n_b, limit);
}

namespace detail {

// Precomputed group-A bitmasks for a fixed (n_a, n_b); the test kernel only
// needs subset sums, since with the pooled total S fixed,
// T = sum_A / n_a - (S - sum_A) / n_b.
class PartitionTable {
public:
    PartitionTable(std::size_t n_a, std::size_t n_b, std::uint64_t limit)
        : n_a_(n_a), n_b_(n_b), n_(n_a + n_b) {
        if (n_ > 62) throw ExhaustiveLimitError("group sizes too large for exhaustive enumeration");
        auto e = enumerate_partitions(n_a, n_b, limit);
        masks_.reserve(e.count());
        do {
            std::uint64_t m = 0;
            for (auto t : e.current()) m |= std::uint64_t{1} << t;
            masks_.push_back(m);
        } while (e.next());
        lo_bits_ = n_ / 2;
        hi_bits_ = n_ - lo_bits_;
        lo_.resize(std::size_t{1} << lo_bits_);
        hi_.resize(std::size_t{1} << hi_bits_);
    }

    std::size_t n_a() const noexcept { return n_a_; }
    std::size_t n_b() const noexcept { return n_b_; }
    std::size_t size() const noexcept { return masks_.size(); }

    // Number of partitions with |T| >= |T_obs| - tol over pooled = a ++ b.
    // Scratch state lives in the table, so each thread needs its own copy.
    std::uint64_t count_extreme(std::span<const double> pooled) {
        fill_sums(pooled.first(lo_bits_), lo_);
        fill_sums(pooled.subspan(lo_bits_), hi_);
        const double total = lo_.back() + hi_.back();
        const double ia = 1.0 / static_cast<double>(n_a_);
        const double ib = 1.0 / static_cast<double>(n_b_);
        const std::uint64_t lo_mask = (std::uint64_t{1} << lo_bits_) - 1;
        auto stat = [&](std::uint64_t m) {
            const double sa = lo_[m & lo_mask] + hi_[m >> lo_bits_];
            return sa * ia - (total - sa) * ib;
        };
        const double t_obs = stat(masks_.front());
        const double threshold = std::abs(t_obs) - tie_tolerance(t_obs);
        std::uint64_t hits = 0;
        for (auto m : masks_) hits += std::abs(stat(m)) >= threshold ? 1 : 0;
        return hits;
    }

private:
    static void fill_sums(std::span<const double> x, std::vector<double>& sums) {
        sums[0] = 0.0;
        for (std::size_t m = 1; m < sums.size(); ++m) {
            const auto low = static_cast<std::size_t>(std::countr_zero(m));
            sums[m] = sums[m & (m - 1)] + x[low];
        }
    }

    std::size_t n_a_, n_b_, n_;
    std::vector<std::uint64_t> masks_;
    std::size_t lo_bits_ = 0, hi_bits_ = 0;
    std::vector<double> lo_, hi_;
};

inline std::vector<double> pool(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline void check_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) throw ArgumentError("non-finite value in permutation test group");
}

inline double mc_pvalue(std::span<const double> pooled, std::size_t n_a, std::size_t n_perm,
                        Rng& rng, std::vector<std::size_t>& perm) {
    const std::size_t n = pooled.size();
    const std::size_t n_b = n - n_a;
    double total = 0.0;
    for (double x : pooled) total += x;
    const double ia = 1.0 / static_cast<double>(n_a);
    const double ib = 1.0 / static_cast<double>(n_b);
    double s_obs = 0.0;
    for (std::size_t t = 0; t < n_a; ++t) s_obs += pooled[t];
    const double t_obs = s_obs * ia - (total - s_obs) * ib;
    const double threshold = std::abs(t_obs) - tie_tolerance(t_obs);

    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t hits = 0;
    for (std::size_t b = 0; b < n_perm; ++b) {
        // Partial Fisher-Yates: the first n_a slots are a uniform random subset.
        double sa = 0.0;
        for (std::size_t t = 0; t < n_a; ++t) {
            const auto u = t + static_cast<std::size_t>(uniform_index(rng, n - t));
            std::swap(perm[t], perm[u]);
            sa += pooled[perm[t]];
        }
        const double t_perm = sa * ia - (total - sa) * ib;
        if (std::abs(t_perm) >= threshold) ++hits;
    }
    return static_cast<double>(1 + hits) / static_cast<double>(n_perm + 1);
}

}  // namespace detail

// Exact two-sided p-value over all C(n_a + n_b, n_a) partitions. Never below
// 1 / C(n_a + n_b, n_a) because the observed partition counts itself.
inline double exact_two_sample_pvalue(std::span<const double> a, std::span<const double> b,
                                      std::uint64_t limit = kDefaultExhaustiveLimit) {
    if (a.empty() || b.empty()) throw ArgumentError("empty group in permutation test");
    detail::check_finite(a);
    detail::check_finite(b);
    detail::PartitionTable table(a.size(), b.size(), limit);
    const auto pooled = detail::pool(a, b);
    return static_cast<double>(table.count_extreme(pooled)) / static_cast<double>(table.size());
}

// Monte Carlo p-value with the add-one correction (1 + hits) / (n_perm + 1).
inline double mc_two_sample_pvalue(std::span<const double> a, std::span<const double> b,
                                   std::size_t n_perm, detail::Rng& rng) {
    if (a.empty() || b.empty()) throw ArgumentError("empty group in permutation test");
    if (n_perm < kMinMonteCarloPermutations)
        throw ArgumentError("n_perm must be >= " + std::to_string(kMinMonteCarloPermutations));
    detail::check_finite(a);
    detail::check_finite(b);
    std::vector<std::size_t> perm;
    return detail::mc_pvalue(detail::pool(a, b), a.size(), n_perm, rng, perm);
}

inline std::vector<PairId> all_pairs(std::size_t n) {
    std::vector<PairId> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
    return pairs;
}

// Raw p-values for every training pair (i < j) and every variable. Rows are
// in lexicographic pair order; output is bit-identical for any n_threads
// (0 = all hardware threads).
inline PValueMatrix pairwise_pvalue_matrix(const SampleSet& train, const PermutationMode& mode,
                                           std::size_t n_threads = 0,
                                           std::uint64_t limit = kDefaultExhaustiveLimit) {
    const std::size_t n = train.n_samples();
    const std::size_t r = train.n_reps();
    const std::size_t nv = train.n_vars();
    if (n < 2) throw ArgumentError("pairwise testing needs at least 2 training samples");
    if (r < 2) throw ArgumentError("pairwise testing needs at least 2 repetitions per sample");
    if (mode.kind == PermutationMode::Kind::monte_carlo && mode.n_perm < kMinMonteCarloPermutations)
        throw ArgumentError("n_perm must be >= " + std::to_string(kMinMonteCarloPermutations));

    // [sample][variable][rep] so a group is a contiguous run.
    std::vector<double> blocks(n * nv * r);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t rep = 0; rep < r; ++rep) {
            const auto row = train.repetition(i, rep);
            for (std::size_t v = 0; v < nv; ++v) blocks[(i * nv + v) * r + rep] = row[v];
        }
    auto group = [&](std::size_t i, std::size_t v) {
        return std::span<const double>(blocks.data() + (i * nv + v) * r, r);
    };

    PValueMatrix out;
    out.pairs = all_pairs(n);
    out.n_vars = nv;
    out.values.assign(out.pairs.size() * nv, 1.0);
    out.kind = PValueKind::raw;
    out.method = mode;

    if (mode.kind == PermutationMode::Kind::exact) {
        const detail::PartitionTable proto(r, r, limit);
        detail::parallel_for(out.pairs.size(), n_threads, [&](std::size_t begin, std::size_t end) {
            auto table = proto;
            std::vector<double> pooled(2 * r);
            const double denom = static_cast<double>(table.size());
            for (std::size_t p = begin; p < end; ++p) {
                const auto [i, j] = out.pairs[p];
                for (std::size_t v = 0; v < nv; ++v) {
                    const auto a = group(i, v);
                    const auto b = group(j, v);
                    std::copy(a.begin(), a.end(), pooled.begin());
                    std::copy(b.begin(), b.end(), pooled.begin() + static_cast<std::ptrdiff_t>(r));
                    out.values[p * nv + v] =
                        static_cast<double>(table.count_extreme(pooled)) / denom;
                }
            }
        });
    } else {
        detail::parallel_for(out.pairs.size(), n_threads, [&](std::size_t begin, std::size_t end) {
            std::vector<double> pooled(2 * r);
            std::vector<std::size_t> perm;
            for (std::size_t p = begin; p < end; ++p) {
                const auto [i, j] = out.pairs[p];
                auto rng = detail::make_stream(mode.seed, {i, j});
                for (std::size_t v = 0; v < nv; ++v) {
                    const auto a = group(i, v);
                    const auto b = group(j, v);
                    std::copy(a.begin(), a.end(), pooled.begin());
                    std::copy(b.begin(), b.end(), pooled.begin() + static_cast<std::ptrdiff_t>(r));
                    out.values[p * nv + v] = detail::mc_pvalue(pooled, r, mode.n_perm, rng, perm);
                }
            }
        });
    }
    return out;
}

// CSV: header i,j,v1..vV, one row per pair.
inline void write_pvalue_matrix(std::ostream& out, const PValueMatrix& m) {
    out << "i,j";
    for (std::size_t v = 0; v < m.n_vars; ++v) out << ",v" << v + 1;
    out << '\n';
    for (std::size_t p = 0; p < m.n_pairs(); ++p) {
        out << m.pairs[p].i << ',' << m.pairs[p].j;
        for (double x : m.row(p)) out << ',' << detail::format_double(x);
        out << '\n';
    }
}

// Reads a matrix written by write_pvalue_matrix as raw exact-mode p-values.
inline PValueMatrix read_pvalue_matrix(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(in, line, line_no)) throw DataError("empty p-value matrix");
    const auto header = detail::split_fields(line);
    if (header.size() < 3 || detail::trim(header[0]) != "i" || detail::trim(header[1]) != "j")
        throw DataError("p-value matrix header must start with i,j");
    PValueMatrix m;
    m.n_vars = header.size() - 2;
    while (detail::next_line(in, line, line_no)) {
        const auto f = detail::split_fields(line);
        if (f.size() != header.size())
            throw DataError("ragged row at row " + std::to_string(line_no));
        const auto i = detail::parse_int(f[0]);
        const auto j = detail::parse_int(f[1]);
        if (!i || !j || *i < 0 || *j <= *i)
            throw DataError("bad pair index at row " + std::to_string(line_no));
        m.pairs.push_back({static_cast<std::size_t>(*i), static_cast<std::size_t>(*j)});
        for (std::size_t c = 2; c < f.size(); ++c) {
            const auto v = detail::parse_double(f[c]);
            if (!v || !(*v > 0.0 && *v <= 1.0))
                throw DataError("p-value outside (0, 1] at row " + std::to_string(line_no) +
                                ", column " + std::to_string(c + 1));
            m.values.push_back(*v);
        }
    }
    if (m.pairs.empty()) throw DataError("p-value matrix has no rows");
    return m;
}

}  // namespace permsel
