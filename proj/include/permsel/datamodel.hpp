#pragma once

// Core data containers: the repeated-measurement tensor, train/validation
// splits, repetition averaging, and the sample CSV format
//
//   sample_id,rep_id,y1,...,yR,x1,...,xV
//
// with responses repeated identically on every repetition row of a sample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "permsel/detail/csv.hpp"
#include "permsel/detail/rng.hpp"
#include "permsel/error.hpp"

namespace permsel {

// samples x repetitions x variables, plus one response vector per sample.
// Immutable after construction.
class SampleSet {
public:
    SampleSet(std::vector<std::string> sample_ids, std::size_t n_reps, std::size_t n_vars,
              std::size_t n_responses, std::vector<double> measurements,
              std::vector<double> responses)
        : ids_(std::move(sample_ids)),
          n_reps_(n_reps),
          n_vars_(n_vars),
          n_responses_(n_responses),
          measurements_(std::move(measurements)),
          responses_(std::move(responses)) {
        const std::size_t n = ids_.size();
        if (n == 0 || n_reps_ == 0 || n_vars_ == 0 || n_responses_ == 0)
            throw DataError("SampleSet dimensions must all be > 0");
        if (measurements_.size() != n * n_reps_ * n_vars_)
            throw DataError("measurement tensor size does not match dimensions");
        if (responses_.size() != n * n_responses_)
            throw DataError("response matrix size does not match dimensions");
        for (double x : measurements_)
            if (!std::isfinite(x)) throw DataError("non-finite measurement value");
        for (double y : responses_)
            if (!std::isfinite(y)) throw DataError("non-finite response value");
    }

    std::size_t n_samples() const noexcept { return ids_.size(); }
    std::size_t n_reps() const noexcept { return n_reps_; }
    std::size_t n_vars() const noexcept { return n_vars_; }
    std::size_t n_responses() const noexcept { return n_responses_; }

    double measurement(std::size_t sample, std::size_t rep, std::size_t var) const {
        return measurements_[(sample * n_reps_ + rep) * n_vars_ + var];
    }
    // All variables of one repetition row.
    std::span<const double> repetition(std::size_t sample, std::size_t rep) const {
        return {measurements_.data() + (sample * n_reps_ + rep) * n_vars_, n_vars_};
    }
    double response(std::size_t sample, std::size_t k) const {
        return responses_[sample * n_responses_ + k];
    }
    std::span<const double> responses(std::size_t sample) const {
        return {responses_.data() + sample * n_responses_, n_responses_};
    }

    const std::vector<std::string>& sample_ids() const noexcept { return ids_; }
    // Flat [sample][rep][variable] storage.
    const std::vector<double>& measurements() const noexcept { return measurements_; }
    const std::vector<double>& response_values() const noexcept { return responses_; }

    // Responses as an n_samples x n_responses matrix.
    Eigen::MatrixXd response_matrix() const {
        Eigen::MatrixXd y(n_samples(), n_responses_);
        for (std::size_t i = 0; i < n_samples(); ++i)
            for (std::size_t k = 0; k < n_responses_; ++k) y(i, k) = response(i, k);
        return y;
    }

    friend bool operator==(const SampleSet&, const SampleSet&) = default;

private:
    std::vector<std::string> ids_;
    std::size_t n_reps_;
    std::size_t n_vars_;
    std::size_t n_responses_;
    std::vector<double> measurements_;
    std::vector<double> responses_;
};

struct TrainValidationSplit {
    std::vector<std::size_t> train_indices;       // ascending
    std::vector<std::size_t> validation_indices;  // ascending
    std::uint64_t seed = 0;
};

// Per-sample mean over repetitions: [sample][variable].
struct AveragedMatrix {
    Eigen::MatrixXd values;
};

// ---------------------------------------------------------------------------
// CSV ingestion / emission
// ---------------------------------------------------------------------------

inline SampleSet ingest_samples(std::istream& in) {
    using detail::parse_double;
    using detail::parse_int;
    using detail::split_fields;
    using detail::trim;

    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(in, line, line_no)) throw DataError("empty input: no header row");

    const auto header = split_fields(line);
    if (header.size() < 4 || trim(header[0]) != "sample_id" || trim(header[1]) != "rep_id")
        throw DataError("header must start with sample_id,rep_id");
    std::size_t n_resp = 0;
    std::size_t n_vars = 0;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const auto name = trim(header[c]);
        if (name.empty()) throw DataError("empty column name in header");
        if (name.front() == 'y' && n_vars == 0)
            ++n_resp;
        else if (name.front() == 'x')
            ++n_vars;
        else
            throw DataError("unexpected header column '" + std::string(name) + "'");
    }
    if (n_resp == 0 || n_vars == 0)
        throw DataError("header needs at least one y column and one x column");
    const std::size_t width = 2 + n_resp + n_vars;

    struct Row {
        long long rep = 0;
        std::size_t line = 0;
        std::vector<double> y, x;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Row>> groups;

    while (detail::next_line(in, line, line_no)) {
        const auto fields = split_fields(line);
        if (fields.size() != width)
            throw DataError("ragged row at row " + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " columns, got " +
                            std::to_string(fields.size()));
        std::string id(trim(fields[0]));
        if (id.empty()) throw DataError("empty sample_id at row " + std::to_string(line_no));
        const auto rep = parse_int(fields[1]);
        if (!rep)
            throw DataError("non-numeric rep_id at row " + std::to_string(line_no) +
                            ", column 2");
        Row row;
        row.rep = *rep;
        row.line = line_no;
        row.y.reserve(n_resp);
        row.x.reserve(n_vars);
        for (std::size_t c = 2; c < width; ++c) {
            const auto v = parse_double(fields[c]);
            const auto where = " at row " + std::to_string(line_no) + ", column " +
                               std::to_string(c + 1);
            if (!v)
                throw DataError("non-numeric value '" + std::string(trim(fields[c])) + "'" +
                                where);
            if (!std::isfinite(*v)) throw DataError("non-finite value" + where);
            (c < 2 + n_resp ? row.y : row.x).push_back(*v);
        }
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(std::move(row));
    }
    if (order.empty()) throw DataError("empty input: no data rows");

    // Modal repetition count; smallest count wins ties.
    std::map<std::size_t, std::size_t> freq;
    for (const auto& id : order) ++freq[groups[id].size()];
    const auto modal = std::max_element(freq.begin(), freq.end(), [](auto& a, auto& b) {
                           return a.second < b.second;
                       })->first;

    std::vector<double> meas;
    std::vector<double> resp;
    meas.reserve(order.size() * modal * n_vars);
    resp.reserve(order.size() * n_resp);
    for (const auto& id : order) {
        auto& rows = groups[id];
        if (rows.size() != modal)
            throw DataError("inconsistent repetition count: sample '" + id + "' has " +
                            std::to_string(rows.size()) + ", expected " +
                            std::to_string(modal));
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.rep < b.rep; });
        for (std::size_t r = 1; r < rows.size(); ++r)
            if (rows[r].rep == rows[r - 1].rep)
                throw DataError("duplicate rep_id " + std::to_string(rows[r].rep) +
                                " for sample '" + id + "'");
        for (const auto& row : rows) {
            if (row.y != rows.front().y)
                throw DataError("responses differ between repetitions of sample '" + id +
                                "' at row " + std::to_string(row.line));
            meas.insert(meas.end(), row.x.begin(), row.x.end());
        }
        resp.insert(resp.end(), rows.front().y.begin(), rows.front().y.end());
    }
    return SampleSet(std::move(order), modal, n_vars, n_resp, std::move(meas), std::move(resp));
}

// Writes the CSV format read by ingest_samples; rep_id is 1-based. Values use
// the shortest round-trip representation, so ingest(emit(s)) == s.
inline void write_samples(std::ostream& out, const SampleSet& s) {
    out << "sample_id,rep_id";
    for (std::size_t k = 0; k < s.n_responses(); ++k) out << ",y" << k + 1;
    for (std::size_t v = 0; v < s.n_vars(); ++v) out << ",x" << v + 1;
    out << '\n';
    for (std::size_t i = 0; i < s.n_samples(); ++i) {
        for (std::size_t r = 0; r < s.n_reps(); ++r) {
            out << s.sample_ids()[i] << ',' << r + 1;
            for (double y : s.responses(i)) out << ',' << detail::format_double(y);
            for (double x : s.repetition(i, r)) out << ',' << detail::format_double(x);
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Splitting, subsetting, averaging
// ---------------------------------------------------------------------------

// Seeded uniform shuffle; the first floor(fraction * n) shuffled indices form
// the training set. Both index lists are returned sorted.
inline TrainValidationSplit split_train_validation(std::size_t n_samples, double fraction,
                                                   std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ArgumentError("split fraction must lie in (0, 1)");
    // The 1e-9 guard keeps products such as 0.7 * 10 from flooring to 6.
    const auto n_train =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_samples) + 1e-9));
    if (n_train < 2) throw ArgumentError("too few samples: training set would have < 2 samples");
    if (n_train >= n_samples) throw ArgumentError("too few samples: validation set would be empty");

    std::vector<std::size_t> idx(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) idx[i] = i;
    auto rng = detail::make_stream(seed, {0x5b1d});
    detail::shuffle(idx, rng);

    TrainValidationSplit split;
    split.seed = seed;
    split.train_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.validation_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.validation_indices.begin(), split.validation_indices.end());
    return split;
}

inline TrainValidationSplit split_train_validation(const SampleSet& s, double fraction,
                                                   std::uint64_t seed) {
    return split_train_validation(s.n_samples(), fraction, seed);
}

inline SampleSet subset_samples(const SampleSet& s, std::span<const std::size_t> indices) {
    if (indices.empty()) throw DataError("subset must contain at least one sample");
    std::vector<bool> seen(s.n_samples(), false);
    std::vector<std::string> ids;
    std::vector<double> meas;
    std::vector<double> resp;
    ids.reserve(indices.size());
    meas.reserve(indices.size() * s.n_reps() * s.n_vars());
    resp.reserve(indices.size() * s.n_responses());
    for (auto i : indices) {
        if (i >= s.n_samples())
            throw DataError("sample index " + std::to_string(i) + " out of range (n_samples = " +
                            std::to_string(s.n_samples()) + ")");
        if (seen[i]) throw DataError("duplicate sample index " + std::to_string(i));
        seen[i] = true;
        ids.push_back(s.sample_ids()[i]);
        for (std::size_t r = 0; r < s.n_reps(); ++r) {
            const auto row = s.repetition(i, r);
            meas.insert(meas.end(), row.begin(), row.end());
        }
        const auto y = s.responses(i);
        resp.insert(resp.end(), y.begin(), y.end());
    }
    return SampleSet(std::move(ids), s.n_reps(), s.n_vars(), s.n_responses(), std::move(meas),
                     std::move(resp));
}

inline AveragedMatrix average_repetitions(const SampleSet& s) {
    AveragedMatrix avg{Eigen::MatrixXd::Zero(s.n_samples(), s.n_vars())};
    const double inv = 1.0 / static_cast<double>(s.n_reps());
    for (std::size_t i = 0; i < s.n_samples(); ++i) {
        for (std::size_t r = 0; r < s.n_reps(); ++r) {
            const auto row = s.repetition(i, r);
            for (std::size_t v = 0; v < s.n_vars(); ++v) avg.values(i, v) += row[v];
        }
    }
    avg.values *= inv;
    return avg;
}

}  // namespace permsel
