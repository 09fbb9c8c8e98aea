#include "sttf/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "sttf/baselines.hpp"
#include "sttf/emd.hpp"
#include "sttf/forecaster.hpp"
#include "sttf/io.hpp"
#include "sttf/metrics.hpp"
#include "sttf/timeseries.hpp"

namespace sttf::cli {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kReportFooter =
    "Metric values are specific to this dataset, split, and configuration; "
    "they are not expected to match externally published figures.";

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, ptr};
}

std::filesystem::path out_path(const RunConfig& config, const std::string& name) {
    return std::filesystem::path(config.out_dir) / name;
}

void write_manifest(const RunConfig& config, const std::string& command) {
    json j{{"tool", "sttf"},
           {"version", kToolVersion},
           {"command", command},
           {"seed", config.seed},
           {"config_hash", config_hash(config)},
           {"config", json::parse(config_to_json_string(config))}};
    atomic_write_file(out_path(config, "manifest_" + command + ".json").string(),
                      j.dump(2) + "\n");
}

TimeSeries load_series(const RunConfig& config) {
    if (config.data_path.empty()) throw std::invalid_argument("--data is required");
    TimeSeries series =
        load_csv(config.data_path, config.value_column, config.interval_minutes);
    std::cout << "loaded " << config.data_path << ": "
              << summary_report(summarize(series)) << "\n";
    return series;
}

emd::EmdConfig emd_config_of(const RunConfig& config) {
    emd::EmdConfig e;
    e.max_sift_iters = config.emd_max_sift_iters;
    e.zero_mean_tol = config.emd_zero_mean_tol;
    e.max_imfs = config.emd_max_imfs;
    e.boundary = emd::boundary_policy_from_string(config.emd_boundary);
    return e;
}

forecast::FitConfig fit_config_of(const RunConfig& config, bool use_emd,
                                  const std::string& model_name) {
    forecast::FitConfig f;
    f.train_fraction = config.train_fraction;
    f.lookback = config.lookback;
    f.use_emd = use_emd;
    f.include_residual_channel = config.include_residual_channel;
    f.emd_scope = forecast::emd_scope_from_string(config.emd_scope);
    f.emd = emd_config_of(config);
    f.train.epochs = config.epochs;
    f.train.batch_size = config.batch_size;
    f.train.adam.lr = config.learning_rate;
    f.train.seed = config.seed;
    f.train.validation_fraction = config.validation_fraction;
    f.train.patience = config.patience;
    f.train.dims.hidden = config.hidden;
    f.train.dims.score = config.score;
    f.train.dims.dense = config.dense;
    f.zero_policy = metrics::zero_policy_from_string(config.zero_policy);
    f.model_name = model_name;
    return f;
}

json report_to_json(const metrics::EvalReport& report) {
    return json{{"model_name", report.model_name},
                {"rmse", report.rmse},
                {"mape_percent", report.mape_percent},
                {"n", report.n},
                {"skipped_zero_count", report.skipped_zero_count},
                {"predictions", report.predictions},
                {"labels", report.labels},
                {"note", kReportFooter}};
}

/// Single model: the plain two-column actual/predicted trace.
std::string overlay_csv(const metrics::EvalReport& report) {
    std::string out = "actual,predicted\n";
    for (std::size_t i = 0; i < report.labels.size(); ++i)
        out += fmt(report.labels[i]) + "," + fmt(report.predictions[i]) + "\n";
    return out;
}

/// Several models: one prediction column per model, indexed by interval.
std::string overlay_csv(const std::vector<metrics::EvalReport>& reports) {
    std::string out = "interval,actual";
    for (const auto& r : reports) out += "," + r.model_name;
    out += "\n";
    const std::size_t n = reports.front().labels.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += std::to_string(i) + "," + fmt(reports.front().labels[i]);
        for (const auto& r : reports) out += "," + fmt(r.predictions[i]);
        out += "\n";
    }
    return out;
}

/// Minimal two-or-more polyline chart, no plotting dependency.
std::string overlay_svg(const std::vector<metrics::EvalReport>& reports) {
    static constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c",
                                              "#9467bd", "#ff7f0e", "#8c564b"};
    const double width = 960.0, height = 320.0, pad = 40.0;
    const Vec& actual = reports.front().labels;
    const std::size_t n = actual.size();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    auto widen = [&](const Vec& v) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    };
    widen(actual);
    for (const auto& r : reports) widen(r.predictions);
    if (!(hi > lo)) hi = lo + 1.0;

    auto coord = [&](std::size_t i, double v) {
        const double x = pad + (width - 2 * pad) * static_cast<double>(i) /
                                   static_cast<double>(n > 1 ? n - 1 : 1);
        const double y = height - pad - (height - 2 * pad) * (v - lo) / (hi - lo);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f", x, y);
        return std::string(buf);
    };
    auto polyline = [&](const Vec& values, const char* color, const char* dash) {
        std::string p = "  <polyline fill=\"none\" stroke=\"";
        p += color;
        p += "\" stroke-width=\"1.2\"";
        if (dash[0] != '\0') p += std::string(" stroke-dasharray=\"") + dash + "\"";
        p += " points=\"";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) p += " ";
            p += coord(i, values[i]);
        }
        p += "\"/>\n";
        return p;
    };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 320\">\n";
    svg += "  <rect width=\"960\" height=\"320\" fill=\"white\"/>\n";
    svg += polyline(actual, "#444444", "");
    svg += "  <text x=\"40\" y=\"20\" font-size=\"12\" fill=\"#444444\">actual</text>\n";
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const char* color = kColors[r % 6];
        svg += polyline(reports[r].predictions, color, "4 2");
        char label[160];
        std::snprintf(label, sizeof(label),
                      "  <text x=\"%zu\" y=\"20\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      110 + 110 * r, color, reports[r].model_name.c_str());
        svg += label;
    }
    svg += "</svg>\n";
    return svg;
}

metrics::EvalReport trace_report(const std::string& name, const Vec& labels,
                                 const Vec& predictions, metrics::ZeroPolicy policy) {
    metrics::PredictionSet ps{labels, predictions};
    return metrics::make_report(name, ps, policy, true);
}

/// One-step naive persistence over the test span.
Vec naive_trace(std::span<const double> train, std::span<const double> test,
                bool recursive) {
    Vec preds;
    preds.reserve(test.size());
    if (recursive) {
        preds.assign(test.size(), baselines::naive_forecast(train));
        return preds;
    }
    Vec combined(train.begin(), train.end());
    combined.insert(combined.end(), test.begin(), test.end());
    for (std::size_t t = train.size(); t < combined.size(); ++t)
        preds.push_back(
            baselines::naive_forecast(std::span<const double>(combined).subspan(0, t)));
    return preds;
}

/// Pick (p, q) in {1..4}^2 by one-step RMSE on the tail 20% of the train
/// span, with candidates fitted on the leading 80%.
std::pair<std::size_t, std::size_t> grid_search_orders(std::span<const double> train,
                                                       std::size_t d) {
    const std::size_t cut = train.size() * 4 / 5;
    const auto fit_span = train.subspan(0, cut);
    const auto score_span = train.subspan(cut);
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_pq{2, 2};
    for (std::size_t p = 1; p <= 4; ++p) {
        for (std::size_t q = 1; q <= 4; ++q) {
            try {
                const auto model = baselines::fit_arima(fit_span, p, d, q);
                const Vec preds = baselines::rolling_forecast(model, fit_span, score_span);
                metrics::PredictionSet ps{Vec(score_span.begin(), score_span.end()), preds};
                const double r = metrics::rmse(ps);
                if (r < best) {
                    best = r;
                    best_pq = {p, q};
                }
            } catch (const std::exception&) {
                // candidate infeasible on this span; skip
            }
        }
    }
    return best_pq;
}

metrics::EvalReport run_baseline(const std::string& name, const RunConfig& config,
                                 const TimeSeries& series) {
    const auto [train, test] = split_train_test(series, config.train_fraction,
                                                config.lookback + 1);
    const std::span<const double> train_span(train.values);
    const std::span<const double> test_span(test.values);
    const auto policy = metrics::zero_policy_from_string(config.zero_policy);

    if (name == "naive") {
        return trace_report("naive", test.values,
                            naive_trace(train_span, test_span, config.recursive), policy);
    }
    if (name == "ar") {
        const auto model = baselines::fit_ar(train_span, config.ar_p);
        if (model.intercept_only)
            std::cerr << "warning: ar design was singular; intercept-only fallback\n";
        const Vec preds = config.recursive
                              ? baselines::recursive_forecast(model, train_span,
                                                              test_span.size())
                              : baselines::rolling_forecast(model, train_span, test_span);
        return trace_report("AR(" + std::to_string(config.ar_p) + ")", test.values, preds,
                            policy);
    }
    if (name == "arma" || name == "arima") {
        std::size_t p = name == "arma" ? config.arma_p : config.arima_p;
        std::size_t q = name == "arma" ? config.arma_q : config.arima_q;
        const std::size_t d = name == "arma" ? 0 : config.arima_d;
        if (config.grid_search) std::tie(p, q) = grid_search_orders(train_span, d);
        const auto model = baselines::fit_arima(train_span, p, d, q);
        if (model.intercept_only)
            std::cerr << "warning: " << name << " design was singular; intercept-only fallback\n";
        if (model.theta_damped)
            std::cerr << "warning: " << name
                      << " MA estimate was noninvertible; coefficients damped\n";
        const Vec preds = config.recursive
                              ? baselines::recursive_forecast(model, train_span,
                                                              test_span.size())
                              : baselines::rolling_forecast(model, train_span, test_span);
        const std::string label = name == "arma"
                                      ? "ARMA(" + std::to_string(p) + "," + std::to_string(q) + ")"
                                      : "ARIMA(" + std::to_string(p) + "," + std::to_string(d) +
                                            "," + std::to_string(q) + ")";
        return trace_report(label, test.values, preds, policy);
    }
    if (name == "lstm") {
        const auto fit_cfg = fit_config_of(config, /*use_emd=*/false, "LSTM");
        return forecast::fit(series, fit_cfg).report;
    }
    throw std::invalid_argument("unknown baseline model: " + name);
}

void write_comparison(const RunConfig& config,
                      const std::vector<metrics::EvalReport>& reports,
                      const std::string& stem) {
    std::string table = metrics::comparison_table(reports);
    table += "\n" + std::string(kReportFooter) + "\n";
    atomic_write_file(out_path(config, stem + ".txt").string(), table);
    atomic_write_file(out_path(config, stem + ".csv").string(),
                      metrics::comparison_csv(reports));
    std::cout << table;
}

}  // namespace

int cmd_decompose(const RunConfig& config) {
    config.validate();
    const TimeSeries series = load_series(config);
    const CenteredSeries centered = center(series);
    const emd::ImfSet set = emd::decompose(centered, emd_config_of(config));

    const Vec reconstruction = set.reconstruct();
    double max_err = 0.0;
    for (std::size_t t = 0; t < centered.values.size(); ++t)
        max_err = std::max(max_err, std::abs(reconstruction[t] - centered.values[t]));

    std::string csv;
    const std::size_t k = set.imf_count();
    for (std::size_t c = 1; c <= k; ++c) csv += "imf_" + std::to_string(c) + ",";
    csv += "residual,reconstruction_error\n";
    for (std::size_t t = 0; t < centered.values.size(); ++t) {
        for (std::size_t c = 0; c < k; ++c) csv += fmt(set.imfs[c][t]) + ",";
        csv += fmt(set.residual[t]) + "," +
               fmt(reconstruction[t] - centered.values[t]) + "\n";
    }
    atomic_write_file(out_path(config, "imfs.csv").string(), csv);

    json sidecar{{"imf_count", k},
                 {"sift_counts", set.sift_counts},
                 {"converged", set.converged},
                 {"stop_reason", emd::to_string(set.stop_reason)},
                 {"removed_mean", centered.removed_mean},
                 {"max_reconstruction_error", max_err},
                 {"max_sift_iters", config.emd_max_sift_iters},
                 {"zero_mean_tol", config.emd_zero_mean_tol},
                 {"max_imfs", config.emd_max_imfs},
                 {"boundary", config.emd_boundary}};
    atomic_write_file(out_path(config, "decompose.json").string(), sidecar.dump(2) + "\n");
    write_manifest(config, "decompose");

    std::cout << "imf count: " << k << "\n"
              << "max reconstruction error: " << max_err << "\n";
    return 0;
}

int cmd_train(const RunConfig& config) {
    config.validate();
    const TimeSeries series = load_series(config);
    const auto fit_cfg = fit_config_of(config, /*use_emd=*/true, "STTF");
    const forecast::FitResult result = forecast::fit(series, fit_cfg);

    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    forecast::save_checkpoint(result.model, out_path(config, "checkpoint.json").string());

    std::string loss_csv = "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < result.training.train_loss.size(); ++e)
        loss_csv += std::to_string(e) + "," + fmt(result.training.train_loss[e]) + "," +
                    fmt(result.training.val_loss[e]) + "\n";
    atomic_write_file(out_path(config, "loss_history.csv").string(), loss_csv);

    atomic_write_file(out_path(config, "eval_report.json").string(),
                      report_to_json(result.report).dump(2) + "\n");
    write_manifest(config, "train");

    std::printf("trained %zu epochs (best %d%s); test RMSE %.2f, MAPE %.2f%%\n",
                result.training.train_loss.size(), result.training.best_epoch,
                result.training.stopped_early ? ", early stop" : "", result.report.rmse,
                result.report.mape_percent);
    return 0;
}

int cmd_predict(const RunConfig& config) {
    config.validate();
    if (config.checkpoint_path.empty())
        throw std::invalid_argument("--checkpoint is required for predict");
    const forecast::SttfModel model = forecast::load_checkpoint(config.checkpoint_path);
    const TimeSeries series = load_series(config);
    if (series.size() < model.lookback + 1)
        throw std::runtime_error("series shorter than the model lookback");

    CenteredSeries centered;
    centered.removed_mean = model.removed_mean;
    for (double v : series.values) centered.values.push_back(v - model.removed_mean);

    const std::vector<Vec> channels = forecast::build_channels(model, centered);
    Matrix window(model.lookback, model.channel_count);
    const std::size_t n = series.size();
    for (std::size_t l = 0; l < model.lookback; ++l)
        for (std::size_t c = 0; c < model.channel_count; ++c)
            window(l, c) = channels[c][n - model.lookback + l];

    const double prediction = forecast::predict_next(model, window);
    json j{{"prediction", prediction},
           {"interval_minutes", series.interval_minutes},
           {"history_length", n}};
    atomic_write_file(out_path(config, "prediction.json").string(), j.dump(2) + "\n");
    write_manifest(config, "predict");
    std::cout << "next-interval prediction: " << prediction << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config) {
    config.validate();
    if (config.checkpoint_path.empty())
        throw std::invalid_argument("--checkpoint is required for evaluate");
    const forecast::SttfModel model = forecast::load_checkpoint(config.checkpoint_path);
    const TimeSeries series = load_series(config);

    const forecast::TestSet test = forecast::build_test_set(model, series);
    const auto report = forecast::evaluate_on_test(
        model, test.windows, test.labels,
        metrics::zero_policy_from_string(config.zero_policy), "STTF");

    atomic_write_file(out_path(config, "eval_report.json").string(),
                      report_to_json(report).dump(2) + "\n");
    atomic_write_file(out_path(config, "overlay.csv").string(), overlay_csv(report));
    atomic_write_file(out_path(config, "overlay.svg").string(),
                      overlay_svg(std::vector<metrics::EvalReport>{report}));
    write_manifest(config, "evaluate");

    std::printf("test RMSE %.2f, MAPE %.2f%% over %zu intervals\n", report.rmse,
                report.mape_percent, report.n);
    return 0;
}

int cmd_baseline(const RunConfig& config) {
    config.validate();
    const TimeSeries series = load_series(config);

    std::vector<metrics::EvalReport> reports;
    for (const auto& name : config.models)
        reports.push_back(run_baseline(name, config, series));

    json j = json::array();
    for (const auto& r : reports) j.push_back(report_to_json(r));
    atomic_write_file(out_path(config, "baseline_reports.json").string(), j.dump(2) + "\n");
    write_comparison(config, reports, "comparison");
    write_manifest(config, "baseline");
    return 0;
}

int cmd_compare(const RunConfig& config) {
    config.validate();
    if (config.checkpoint_path.empty())
        throw std::invalid_argument("--checkpoint is required for compare");
    const forecast::SttfModel model = forecast::load_checkpoint(config.checkpoint_path);
    const TimeSeries series = load_series(config);

    const forecast::TestSet test = forecast::build_test_set(model, series);
    std::vector<metrics::EvalReport> reports;
    reports.push_back(forecast::evaluate_on_test(
        model, test.windows, test.labels,
        metrics::zero_policy_from_string(config.zero_policy), "STTF"));
    for (const auto& name : config.models)
        reports.push_back(run_baseline(name, config, series));

    json j = json::array();
    for (const auto& r : reports) j.push_back(report_to_json(r));
    atomic_write_file(out_path(config, "compare_reports.json").string(), j.dump(2) + "\n");
    atomic_write_file(out_path(config, "overlay.csv").string(), overlay_csv(reports));
    atomic_write_file(out_path(config, "overlay.svg").string(), overlay_svg(reports));
    write_comparison(config, reports, "comparison");
    write_manifest(config, "compare");
    return 0;
}

}  // namespace sttf::cli
