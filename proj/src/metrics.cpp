#include "sttf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sttf::metrics {

namespace {

void validate(const PredictionSet& ps) {
    if (ps.y_true.empty()) throw std::invalid_argument("metrics: empty prediction set");
    if (ps.y_true.size() != ps.y_pred.size())
        throw std::invalid_argument("metrics: length mismatch");
    for (std::size_t i = 0; i < ps.y_true.size(); ++i)
        if (!std::isfinite(ps.y_true[i]) || !std::isfinite(ps.y_pred[i]))
            throw std::invalid_argument("metrics: non-finite entry");
}

}  // namespace

ZeroPolicy zero_policy_from_string(const std::string& name) {
    if (name == "skip") return ZeroPolicy::kSkip;
    if (name == "epsilon") return ZeroPolicy::kEpsilon;
    throw std::invalid_argument("unknown zero policy: " + name);
}

std::string to_string(ZeroPolicy policy) {
    return policy == ZeroPolicy::kSkip ? "skip" : "epsilon";
}

double rmse(const PredictionSet& ps) {
    validate(ps);
    double acc = 0.0;
    for (std::size_t i = 0; i < ps.y_true.size(); ++i) {
        const double d = ps.y_true[i] - ps.y_pred[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(ps.y_true.size()));
}

MapeResult mape(const PredictionSet& ps, ZeroPolicy policy) {
    validate(ps);
    MapeResult result;
    double acc = 0.0;
    for (std::size_t i = 0; i < ps.y_true.size(); ++i) {
        const double t = ps.y_true[i];
        if (policy == ZeroPolicy::kSkip && t == 0.0) {
            ++result.skipped_zero_count;
            continue;
        }
        const double denom =
            policy == ZeroPolicy::kSkip ? std::abs(t) : std::max(std::abs(t), 1.0);
        acc += std::abs(t - ps.y_pred[i]) / denom;
        ++result.n_used;
    }
    if (result.n_used == 0)
        throw std::runtime_error("mape: all y_true values are zero under skip policy");
    result.percent = acc / static_cast<double>(result.n_used) * 100.0;
    return result;
}

EvalReport make_report(const std::string& model_name, const PredictionSet& ps,
                       ZeroPolicy policy, bool keep_trace) {
    EvalReport report;
    report.model_name = model_name;
    report.rmse = rmse(ps);
    const MapeResult m = mape(ps, policy);
    report.mape_percent = m.percent;
    report.skipped_zero_count = m.skipped_zero_count;
    report.n = ps.y_true.size();
    if (keep_trace) {
        report.predictions = ps.y_pred;
        report.labels = ps.y_true;
    }
    return report;
}

std::string comparison_table(std::span<const EvalReport> reports) {
    if (reports.empty()) throw std::invalid_argument("comparison_table: no reports");

    std::size_t name_width = 5;  // "Model"
    for (const auto& r : reports) name_width = std::max(name_width, r.model_name.size());

    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-*s  %10s  %10s\n", static_cast<int>(name_width),
                  "Model", "RMSE", "MAPE (%)");
    out += line;
    out += std::string(name_width + 24, '-') + "\n";
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%-*s  %10.2f  %10.2f\n",
                      static_cast<int>(name_width), r.model_name.c_str(), r.rmse,
                      r.mape_percent);
        out += line;
    }
    return out;
}

std::string comparison_csv(std::span<const EvalReport> reports) {
    std::string out = "model,rmse,mape_percent,n\n";
    char line[256];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%s,%.2f,%.2f,%zu\n", r.model_name.c_str(), r.rmse,
                      r.mape_percent, r.n);
        out += line;
    }
    return out;
}

}  // namespace sttf::metrics
