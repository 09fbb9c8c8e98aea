#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sttf/matrix.hpp"

namespace sttf::baselines {

/// Persistence: the next value is the last observed value.
double naive_forecast(std::span<const double> history);

struct ArModel {
    Vec phi;                     // p coefficients, lag 1 first
    double intercept = 0.0;
    bool intercept_only = false;  // singular-design fallback

    std::size_t order() const { return phi.size(); }
    double predict(std::span<const double> history) const;
};

/// OLS fit of x_t on (x_{t-1}..x_{t-p}, 1). A singular design (constant
/// series) degrades to an intercept-only model.
ArModel fit_ar(std::span<const double> series, std::size_t p);

struct ArimaModel {
    std::size_t p = 0;
    std::size_t d = 0;
    std::size_t q = 0;
    Vec phi;
    Vec theta;
    double intercept = 0.0;
    bool intercept_only = false;
    bool theta_damped = false;  // MA estimate was shrunk to keep the
                                // innovations recursion stable
};

/// Two-stage least squares: difference d times, estimate innovations with a
/// long AR, then regress on p lags and q lagged innovations. With q = 0 and
/// d = 0 this is exactly fit_ar.
ArimaModel fit_arima(std::span<const double> series, std::size_t p, std::size_t d,
                     std::size_t q);

/// One-step-ahead predictions over the test span, feeding observed values
/// (never predictions) back in. Returns one prediction per test element.
Vec rolling_forecast(const ArModel& model, std::span<const double> history,
                     std::span<const double> test);
Vec rolling_forecast(const ArimaModel& model, std::span<const double> history,
                     std::span<const double> test);

/// Recursive multi-step variant: each prediction is fed back as if observed.
Vec recursive_forecast(const ArModel& model, std::span<const double> history,
                       std::size_t horizon);
Vec recursive_forecast(const ArimaModel& model, std::span<const double> history,
                       std::size_t horizon);

}  // namespace sttf::baselines
