#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sttf/matrix.hpp"

namespace sttf {

/// Uniformly sampled scalar count series (vehicles per interval).
struct TimeSeries {
    Vec values;
    int interval_minutes = 30;
    std::string start_label;  // optional timestamp of the first sample; empty = unset

    std::size_t size() const { return values.size(); }
};

struct SeriesSummary {
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

/// Series with its arithmetic mean removed; removed_mean restores the
/// original scale.
struct CenteredSeries {
    Vec values;
    double removed_mean = 0.0;
};

/// Supervised one-step-ahead samples: each feature matrix is lookback x
/// channel_count, each label is the value one step after the window.
struct WindowDataset {
    std::vector<Matrix> features;
    Vec labels;
    std::size_t lookback = 0;
    std::size_t channel_count = 0;

    std::size_t size() const { return features.size(); }
};

/// Reads one value column from a headed CSV, strictly: every row must parse
/// as a finite real. Throws std::runtime_error naming the offending row.
TimeSeries load_csv(const std::string& path, const std::string& value_column,
                    int interval_minutes);

SeriesSummary summarize(const TimeSeries& series);
std::string summary_report(const SeriesSummary& s);

CenteredSeries center(const TimeSeries& series);
CenteredSeries center(const Vec& values);

/// Inverse of center(): element-wise values + removed_mean.
Vec restore_mean(const CenteredSeries& series);

/// Chronological split, no shuffling. train gets round(train_fraction * n)
/// samples; both parts must keep at least min_part_length samples.
std::pair<TimeSeries, TimeSeries> split_train_test(const TimeSeries& series,
                                                   double train_fraction,
                                                   std::size_t min_part_length = 4);

/// Builds sliding-window samples. channels are K equal-length sequences;
/// sample i takes channel values at times i .. i+lookback-1 (row-major L x K)
/// and the label is labels_source at time i+lookback. Exactly N - lookback
/// samples come out; features never touch the label time.
WindowDataset build_windows(const std::vector<Vec>& channels,
                            const CenteredSeries& labels_source, std::size_t lookback);

}  // namespace sttf
