#pragma once

#include <string>
#include <vector>

#include "sttf/emd.hpp"
#include "sttf/matrix.hpp"
#include "sttf/metrics.hpp"
#include "sttf/neuralnet.hpp"
#include "sttf/timeseries.hpp"

namespace sttf::forecast {

/// Which span the decomposition sees. kFull decomposes the whole series once
/// before splitting; kCausal decomposes the training span for fitting and an
/// expanding prefix per test step, so no future sample ever enters a window.
enum class EmdScope { kFull, kCausal };

EmdScope emd_scope_from_string(const std::string& name);
std::string to_string(EmdScope scope);

struct FitConfig {
    double train_fraction = 2.0 / 3.0;
    std::size_t lookback = 3;
    bool use_emd = true;  // false trains the same network on raw windows
    bool include_residual_channel = true;
    EmdScope emd_scope = EmdScope::kFull;
    emd::EmdConfig emd;
    nn::TrainConfig train;
    metrics::ZeroPolicy zero_policy = metrics::ZeroPolicy::kSkip;
    std::string model_name = "STTF";
};

/// Trained network plus every piece of preprocessing state needed to map a
/// raw channel window to a vehicles-per-interval prediction.
struct SttfModel {
    nn::ModelParams net;
    double removed_mean = 0.0;
    Vec channel_scales;        // per-channel divisors, all > 0
    double label_scale = 1.0;  // divisor applied to centered labels
    std::size_t channel_count = 0;
    std::size_t lookback = 3;
    double train_fraction = 2.0 / 3.0;
    bool use_emd = true;
    bool include_residual_channel = true;
    EmdScope emd_scope = EmdScope::kFull;
    emd::EmdConfig emd_config;
};

struct FitResult {
    SttfModel model;
    metrics::EvalReport report;  // held-out test span, original scale
    nn::TrainResult training;
    std::vector<std::string> warnings;
};

/// The full pipeline: center on the whole-series mean, decompose, scale
/// channels by their training-span deviation, window, train, evaluate on the
/// chronological test span.
FitResult fit(const TimeSeries& series, const FitConfig& config);

/// Network output for one raw (unscaled) L x K channel window, rescaled and
/// with the removed mean added back.
double predict_next(const SttfModel& model, const Matrix& recent_channels);

/// Teacher-forced one-step evaluation: every window holds true observed
/// channel values. Metrics are computed on the original (uncentered) scale.
metrics::EvalReport evaluate_on_test(const SttfModel& model,
                                     const std::vector<Matrix>& raw_windows,
                                     std::span<const double> labels_original_scale,
                                     metrics::ZeroPolicy policy,
                                     const std::string& model_name = "STTF");

/// Raw channel matrix for a series under the model's configuration. For
/// kFull scope this decomposes the whole span once; windows can then be cut
/// anywhere. Channel count is adapted to the model's K (extra components
/// fold into the residual channel, missing ones are zero).
std::vector<Vec> build_channels(const SttfModel& model, const CenteredSeries& centered);

/// Test windows + original-scale labels for the span [split, n). Handles the
/// expanding-prefix re-decomposition that kCausal scope requires.
struct TestSet {
    std::vector<Matrix> windows;
    Vec labels;
};
TestSet build_test_set(const SttfModel& model, const TimeSeries& series);

/// Versioned JSON checkpoint; round-trips every tensor bit-exactly.
void save_checkpoint(const SttfModel& model, const std::string& path);
SttfModel load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const SttfModel& model);
SttfModel checkpoint_from_string(const std::string& text);

}  // namespace sttf::forecast
