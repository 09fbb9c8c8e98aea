#pragma once

#include <span>
#include <string>
#include <vector>

#include "sttf/matrix.hpp"

namespace sttf::metrics {

struct PredictionSet {
    Vec y_true;
    Vec y_pred;
};

/// How MAPE treats y_true == 0: `kSkip` drops those points (and counts
/// them); `kEpsilon` clamps the denominator to max(|y_true|, 1).
enum class ZeroPolicy { kSkip, kEpsilon };

ZeroPolicy zero_policy_from_string(const std::string& name);
std::string to_string(ZeroPolicy policy);

/// sqrt(mean((y_true - y_pred)^2)), same units as the series.
double rmse(const PredictionSet& ps);

struct MapeResult {
    double percent = 0.0;
    std::size_t skipped_zero_count = 0;
    std::size_t n_used = 0;
};

/// Mean absolute percentage error, in percent.
MapeResult mape(const PredictionSet& ps, ZeroPolicy policy = ZeroPolicy::kSkip);

struct EvalReport {
    std::string model_name;
    double rmse = 0.0;
    double mape_percent = 0.0;
    std::size_t n = 0;
    std::size_t skipped_zero_count = 0;
    Vec predictions;  // trace for plotting; may be empty
    Vec labels;
};

EvalReport make_report(const std::string& model_name, const PredictionSet& ps,
                       ZeroPolicy policy = ZeroPolicy::kSkip, bool keep_trace = true);

/// Aligned plain-text table, rows in the given order, fixed two decimals.
std::string comparison_table(std::span<const EvalReport> reports);

/// Same rows as CSV: model,rmse,mape_percent,n.
std::string comparison_csv(std::span<const EvalReport> reports);

}  // namespace sttf::metrics
