#include "sttf/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sttf/io.hpp"

namespace sttf::forecast {

using nlohmann::json;

EmdScope emd_scope_from_string(const std::string& name) {
    if (name == "full") return EmdScope::kFull;
    if (name == "causal") return EmdScope::kCausal;
    throw std::invalid_argument("unknown emd scope: " + name);
}

std::string to_string(EmdScope scope) {
    return scope == EmdScope::kFull ? "full" : "causal";
}

namespace {

double population_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double scale_or_one(double s) { return s > 1e-12 ? s : 1.0; }

// Channel divisors are floored at a fraction of the label scale. Without the
// floor, near-flat slow components get amplified to unit variance and act as
// a time index the network memorizes; they then drift out of range on the
// test span and predictions degrade badly.
constexpr double kChannelScaleFloor = 0.05;

/// Reshape a decomposition into exactly k channels. Extra components fold
/// into the last channel, missing IMF slots are zero, so the channel sum is
/// preserved whenever the residual is included.
std::vector<Vec> adapt_channels(const emd::ImfSet& set, std::size_t k,
                                bool include_residual) {
    const std::size_t n = set.residual.size();
    std::vector<Vec> channels(k, Vec(n, 0.0));
    const std::size_t imf_slots = include_residual ? k - 1 : k;

    for (std::size_t i = 0; i < set.imfs.size(); ++i) {
        const std::size_t target = i < imf_slots ? i : k - 1;
        for (std::size_t t = 0; t < n; ++t) channels[target][t] += set.imfs[i][t];
    }
    if (include_residual)
        for (std::size_t t = 0; t < n; ++t) channels[k - 1][t] += set.residual[t];
    return channels;
}

std::vector<Vec> scaled_copy(const std::vector<Vec>& channels, const Vec& scales) {
    std::vector<Vec> out = channels;
    for (std::size_t c = 0; c < out.size(); ++c)
        for (double& v : out[c]) v /= scales[c];
    return out;
}

WindowDataset subset(const WindowDataset& ds, std::size_t begin, std::size_t end) {
    WindowDataset out;
    out.lookback = ds.lookback;
    out.channel_count = ds.channel_count;
    out.features.assign(ds.features.begin() + begin, ds.features.begin() + end);
    out.labels.assign(ds.labels.begin() + begin, ds.labels.begin() + end);
    return out;
}

CenteredSeries apply_stored_mean(const Vec& values, double removed_mean) {
    CenteredSeries centered;
    centered.removed_mean = removed_mean;
    centered.values.reserve(values.size());
    for (double v : values) centered.values.push_back(v - removed_mean);
    return centered;
}

std::size_t split_index(double train_fraction, std::size_t n) {
    return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
}

}  // namespace

std::vector<Vec> build_channels(const SttfModel& model, const CenteredSeries& centered) {
    if (!model.use_emd) return {centered.values};
    const emd::ImfSet set = emd::decompose(centered.values, model.emd_config);
    return adapt_channels(set, model.channel_count, model.include_residual_channel);
}

FitResult fit(const TimeSeries& series, const FitConfig& config) {
    const std::size_t n = series.size();
    const std::size_t lookback = config.lookback;
    if (lookback < 1) throw std::invalid_argument("fit: lookback must be >= 1");
    // Validates the split and fixes the boundary.
    split_train_test(series, config.train_fraction, lookback + 1);
    const std::size_t n_train = split_index(config.train_fraction, n);

    FitResult result;
    const CenteredSeries centered = center(series);

    SttfModel& model = result.model;
    model.removed_mean = centered.removed_mean;
    model.lookback = lookback;
    model.train_fraction = config.train_fraction;
    model.use_emd = config.use_emd;
    model.include_residual_channel = config.include_residual_channel;
    model.emd_scope = config.emd_scope;
    model.emd_config = config.emd;

    // Decompose; a degenerate decomposition (no IMFs) falls back to the raw
    // centered signal as a single channel.
    std::vector<Vec> train_channels;
    const bool causal = config.emd_scope == EmdScope::kCausal;
    const Vec train_values(centered.values.begin(), centered.values.begin() + n_train);
    if (config.use_emd) {
        const std::span<const double> emd_input =
            causal ? std::span<const double>(train_values)
                   : std::span<const double>(centered.values);
        const emd::ImfSet set = emd::decompose(emd_input, config.emd);
        if (set.imf_count() == 0) {
            result.warnings.push_back(
                "decomposition produced no components; falling back to the raw "
                "centered signal as a single channel");
            model.use_emd = false;
            train_channels = {causal ? train_values : centered.values};
        } else {
            train_channels = set.channels(config.include_residual_channel);
        }
    } else {
        train_channels = {causal ? train_values : centered.values};
    }
    model.channel_count = train_channels.size();

    // Per-channel scale from the training span only, floored at a fraction
    // of the overall label scale.
    model.label_scale = scale_or_one(
        population_std(std::span<const double>(centered.values).subspan(0, n_train)));
    model.channel_scales.resize(model.channel_count);
    for (std::size_t c = 0; c < model.channel_count; ++c) {
        const double dev = population_std(
            std::span<const double>(train_channels[c]).subspan(0, n_train));
        model.channel_scales[c] = std::max(dev, kChannelScaleFloor * model.label_scale);
    }

    // Windowed training set on the scaled channels and scaled centered labels.
    const std::vector<Vec> scaled = scaled_copy(train_channels, model.channel_scales);
    CenteredSeries label_source = causal
        ? apply_stored_mean(Vec(series.values.begin(), series.values.begin() + n_train),
                            model.removed_mean)
        : centered;
    for (double& v : label_source.values) v /= model.label_scale;

    const WindowDataset all = build_windows(scaled, label_source, lookback);
    const std::size_t n_train_windows = n_train - lookback;
    const WindowDataset train_set =
        causal ? all : subset(all, 0, n_train_windows);
    if (train_set.size() == 0) throw std::runtime_error("fit: no training windows");

    nn::TrainConfig train_config = config.train;
    result.training = nn::train(train_set, train_config);
    model.net = result.training.params;

    const TestSet test = build_test_set(model, series);
    result.report =
        evaluate_on_test(model, test.windows, test.labels, config.zero_policy,
                         config.model_name);
    return result;
}

double predict_next(const SttfModel& model, const Matrix& recent_channels) {
    if (recent_channels.rows() != model.lookback ||
        recent_channels.cols() != model.channel_count)
        throw std::invalid_argument("predict_next: window shape mismatch");
    Matrix scaled = recent_channels;
    for (std::size_t l = 0; l < scaled.rows(); ++l)
        for (std::size_t c = 0; c < scaled.cols(); ++c)
            scaled(l, c) /= model.channel_scales[c];
    const double raw = nn::model_forward(model.net, scaled);
    return raw * model.label_scale + model.removed_mean;
}

metrics::EvalReport evaluate_on_test(const SttfModel& model,
                                     const std::vector<Matrix>& raw_windows,
                                     std::span<const double> labels_original_scale,
                                     metrics::ZeroPolicy policy,
                                     const std::string& model_name) {
    if (raw_windows.empty()) throw std::invalid_argument("evaluate_on_test: empty test set");
    if (raw_windows.size() != labels_original_scale.size())
        throw std::invalid_argument("evaluate_on_test: window/label count mismatch");

    metrics::PredictionSet ps;
    ps.y_true.assign(labels_original_scale.begin(), labels_original_scale.end());
    ps.y_pred.reserve(raw_windows.size());
    for (const auto& window : raw_windows) ps.y_pred.push_back(predict_next(model, window));
    return metrics::make_report(model_name, ps, policy, true);
}

TestSet build_test_set(const SttfModel& model, const TimeSeries& series) {
    const std::size_t n = series.size();
    const std::size_t n_train = split_index(model.train_fraction, n);
    const std::size_t lookback = model.lookback;
    if (n_train < lookback + 1 || n - n_train < 1)
        throw std::runtime_error("build_test_set: split leaves no usable test span");

    const CenteredSeries centered = apply_stored_mean(series.values, model.removed_mean);
    TestSet out;
    out.labels.assign(series.values.begin() + n_train, series.values.end());

    if (model.emd_scope == EmdScope::kFull || !model.use_emd) {
        const std::vector<Vec> channels = build_channels(model, centered);
        for (std::size_t label_time = n_train; label_time < n; ++label_time) {
            Matrix window(lookback, model.channel_count);
            for (std::size_t l = 0; l < lookback; ++l)
                for (std::size_t c = 0; c < model.channel_count; ++c)
                    window(l, c) = channels[c][label_time - lookback + l];
            out.windows.push_back(std::move(window));
        }
        return out;
    }

    // Causal scope: re-decompose the expanding prefix [0, label_time) so a
    // test window never sees a sample at or beyond its label time.
    for (std::size_t label_time = n_train; label_time < n; ++label_time) {
        const std::span<const double> prefix(centered.values.data(), label_time);
        const emd::ImfSet set = emd::decompose(prefix, model.emd_config);
        const std::vector<Vec> channels =
            adapt_channels(set, model.channel_count, model.include_residual_channel);
        Matrix window(lookback, model.channel_count);
        for (std::size_t l = 0; l < lookback; ++l)
            for (std::size_t c = 0; c < model.channel_count; ++c)
                window(l, c) = channels[c][label_time - lookback + l];
        out.windows.push_back(std::move(window));
    }
    return out;
}

namespace {

json emd_config_to_json(const emd::EmdConfig& config) {
    return json{{"max_sift_iters", config.max_sift_iters},
                {"zero_mean_tol", config.zero_mean_tol},
                {"max_imfs", config.max_imfs},
                {"boundary", emd::to_string(config.boundary)}};
}

emd::EmdConfig emd_config_from_json(const json& j) {
    emd::EmdConfig config;
    config.max_sift_iters = j.at("max_sift_iters").get<int>();
    config.zero_mean_tol = j.at("zero_mean_tol").get<double>();
    config.max_imfs = j.at("max_imfs").get<int>();
    config.boundary = emd::boundary_policy_from_string(j.at("boundary").get<std::string>());
    return config;
}

}  // namespace

std::string checkpoint_to_string(const SttfModel& model) {
    const nn::ModelDims dims = model.net.dims();
    json j{
        {"format", "sttf-checkpoint"},
        {"format_version", 1},
        {"preprocessing",
         {{"removed_mean", model.removed_mean},
          {"channel_scales", model.channel_scales},
          {"label_scale", model.label_scale},
          {"channel_count", model.channel_count},
          {"lookback", model.lookback},
          {"train_fraction", model.train_fraction},
          {"use_emd", model.use_emd},
          {"include_residual_channel", model.include_residual_channel},
          {"emd_scope", to_string(model.emd_scope)},
          {"emd", emd_config_to_json(model.emd_config)}}},
        {"network",
         {{"dims",
           {{"input", dims.input},
            {"hidden", dims.hidden},
            {"score", dims.score},
            {"dense", dims.dense}}},
          {"rng_seed", model.net.rng_seed},
          {"parameters", model.net.flatten()}}}};
    return j.dump(2) + "\n";
}

SttfModel checkpoint_from_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "sttf-checkpoint")
        throw std::runtime_error("not a checkpoint file");
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version");

    SttfModel model;
    const json& pre = j.at("preprocessing");
    model.removed_mean = pre.at("removed_mean").get<double>();
    model.channel_scales = pre.at("channel_scales").get<Vec>();
    model.label_scale = pre.at("label_scale").get<double>();
    model.channel_count = pre.at("channel_count").get<std::size_t>();
    model.lookback = pre.at("lookback").get<std::size_t>();
    model.train_fraction = pre.at("train_fraction").get<double>();
    model.use_emd = pre.at("use_emd").get<bool>();
    model.include_residual_channel = pre.at("include_residual_channel").get<bool>();
    model.emd_scope = emd_scope_from_string(pre.at("emd_scope").get<std::string>());
    model.emd_config = emd_config_from_json(pre.at("emd"));

    const json& net = j.at("network");
    nn::ModelDims dims;
    dims.input = net.at("dims").at("input").get<std::size_t>();
    dims.hidden = net.at("dims").at("hidden").get<std::size_t>();
    dims.score = net.at("dims").at("score").get<std::size_t>();
    dims.dense = net.at("dims").at("dense").get<std::size_t>();
    model.net = nn::ModelParams::zeros(dims);
    model.net.rng_seed = net.at("rng_seed").get<std::uint64_t>();
    const Vec flat = net.at("parameters").get<Vec>();
    model.net.unflatten(flat);
    return model;
}

void save_checkpoint(const SttfModel& model, const std::string& path) {
    atomic_write_file(path, checkpoint_to_string(model));
}

SttfModel load_checkpoint(const std::string& path) {
    return checkpoint_from_string(read_file(path));
}

}  // namespace sttf::forecast
