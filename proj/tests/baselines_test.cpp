#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sttf/baselines.hpp"
#include "sttf/rng.hpp"

using namespace sttf;
using namespace sttf::baselines;

namespace {

Vec simulate_ar2(double phi1, double phi2, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vec x(n, 0.0);
    for (std::size_t t = 2; t < n; ++t)
        x[t] = phi1 * x[t - 1] + phi2 * x[t - 2] + rng.gaussian();
    return x;
}

}  // namespace

TEST_CASE("naive_forecast returns the last value") {
    CHECK(naive_forecast(Vec{5}) == 5.0);
    CHECK(naive_forecast(Vec{1, 2, 3}) == 3.0);
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        Vec h;
        for (std::size_t i = 0; i < 1 + rng.below(30); ++i) h.push_back(rng.uniform(-9, 9));
        CHECK(naive_forecast(h) == h.back());
    }
    CHECK_THROWS_AS(naive_forecast(Vec{}), std::invalid_argument);
}

TEST_CASE("fit_ar recovers a noiseless linear recurrence") {
    Vec x(200);
    x[0] = 100.0;
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = 0.8 * x[t - 1];
    const ArModel model = fit_ar(x, 1);
    CHECK_FALSE(model.intercept_only);
    CHECK(std::abs(model.phi[0] - 0.8) < 1e-8);
    CHECK(std::abs(model.intercept) < 1e-8);
}

TEST_CASE("fit_ar on a constant series falls back to intercept-only") {
    const Vec x(50, 7.0);
    const ArModel model = fit_ar(x, 2);
    CHECK(model.intercept_only);
    CHECK(model.intercept == doctest::Approx(7.0));
    CHECK(model.predict(x) == doctest::Approx(7.0));
}

TEST_CASE("fit_ar estimates a simulated AR(2) within 0.05") {
    const Vec x = simulate_ar2(0.5, -0.3, 5000, 12345);
    const ArModel model = fit_ar(x, 2);
    CHECK(std::abs(model.phi[0] - 0.5) < 0.05);
    CHECK(std::abs(model.phi[1] + 0.3) < 0.05);
}

TEST_CASE("fit_ar residuals are orthogonal to the regressors") {
    const Vec x = simulate_ar2(0.6, -0.2, 2000, 777);
    const std::size_t p = 2;
    const ArModel model = fit_ar(x, p);
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    Vec dots(p + 1, 0.0);
    for (std::size_t t = p; t < x.size(); ++t) {
        const double resid =
            x[t] - model.predict(std::span<const double>(x).subspan(0, t));
        for (std::size_t i = 0; i < p; ++i) dots[i] += resid * x[t - 1 - i];
        dots[p] += resid;
    }
    for (double d : dots)
        CHECK(std::abs(d) < 1e-6 * static_cast<double>(x.size()) * std::max(scale, 1.0));
}

TEST_CASE("fit_ar rejects too-short series") {
    CHECK_THROWS_AS(fit_ar(Vec(16, 1.0), 2), std::invalid_argument);
    CHECK_THROWS_AS(fit_ar(Vec(100, 1.0), 0), std::invalid_argument);
}

TEST_CASE("fit_arima with (p,0,0) is bit-identical to fit_ar") {
    const Vec x = simulate_ar2(0.4, 0.2, 800, 99);
    for (std::size_t p : {1, 2, 3}) {
        const ArModel ar = fit_ar(x, p);
        const ArimaModel arima = fit_arima(x, p, 0, 0);
        REQUIRE(arima.phi.size() == ar.phi.size());
        for (std::size_t i = 0; i < p; ++i) CHECK(arima.phi[i] == ar.phi[i]);
        CHECK(arima.intercept == ar.intercept);
        CHECK(arima.theta.empty());
    }
}

TEST_CASE("fit_arima d=1 recovers the AR coefficient of integrated increments") {
    // Increments follow AR(1) around a drift; the level series is their
    // cumulative sum, i.e. a stochastic trend.
    Rng rng(2468);
    const double phi = 0.6, drift = 0.5;
    Vec w(5000, 0.0);
    for (std::size_t t = 1; t < w.size(); ++t)
        w[t] = drift + phi * (w[t - 1] - drift) + rng.gaussian();
    Vec x(w.size() + 1, 0.0);
    for (std::size_t t = 0; t < w.size(); ++t) x[t + 1] = x[t] + w[t];

    const ArimaModel model = fit_arima(x, 1, 1, 0);
    CHECK(std::abs(model.phi[0] - phi) < 0.05);
}

TEST_CASE("fit_arima two-stage estimation handles an ARMA(1,1) process") {
    Rng rng(1357);
    const double phi = 0.6, theta = 0.4;
    Vec x(8000, 0.0);
    double prev_eps = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double eps = rng.gaussian();
        x[t] = phi * x[t - 1] + eps + theta * prev_eps;
        prev_eps = eps;
    }
    const ArimaModel model = fit_arima(x, 1, 0, 1);
    CHECK_FALSE(model.intercept_only);
    CHECK(std::abs(model.phi[0] - phi) < 0.1);
    CHECK(std::abs(model.theta[0] - theta) < 0.1);
}

TEST_CASE("rolling_forecast of an intercept-only model is constant") {
    ArModel model;
    model.phi = {0.0, 0.0};
    model.intercept = 42.0;
    model.intercept_only = true;
    const Vec history(20, 10.0);
    const Vec test(7, 3.0);
    for (double p : rolling_forecast(model, history, test)) CHECK(p == 42.0);
}

TEST_CASE("rolling_forecast with phi=1 equals naive persistence") {
    ArModel model;
    model.phi = {1.0};
    model.intercept = 0.0;
    Rng rng(5);
    Vec history, test;
    for (int i = 0; i < 30; ++i) history.push_back(rng.uniform(0, 100));
    for (int i = 0; i < 15; ++i) test.push_back(rng.uniform(0, 100));

    const Vec preds = rolling_forecast(model, history, test);
    REQUIRE(preds.size() == test.size());
    CHECK(preds[0] == history.back());
    for (std::size_t i = 1; i < test.size(); ++i) CHECK(preds[i] == test[i - 1]);
}

TEST_CASE("rolling_forecast one-step errors are white under the true model") {
    const double phi1 = 0.5, phi2 = -0.3;
    const Vec x = simulate_ar2(phi1, phi2, 4000, 31415);
    ArModel truth;
    truth.phi = {phi1, phi2};
    truth.intercept = 0.0;

    const std::size_t split = 2000;
    const std::span<const double> history(x.data(), split);
    const std::span<const double> test(x.data() + split, x.size() - split);
    const Vec preds = rolling_forecast(truth, history, test);

    Vec errors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) errors[i] = test[i] - preds[i];
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < errors.size(); ++i)
        num += (errors[i] - mean) * (errors[i - 1] - mean);
    for (double e : errors) den += (e - mean) * (e - mean);
    CHECK(std::abs(num / den) < 0.1);
}

TEST_CASE("noiseless integrated AR(1) rolls forward with near-zero error") {
    // Deterministic increments w_t = drift + phi (w_{t-1} - drift); the level
    // is x = cumsum(w). An ARIMA(1,1,0) fit recovers the recurrence exactly.
    const double phi = 0.7, drift = 1.0;
    Vec w(400);
    w[0] = 5.0;
    for (std::size_t t = 1; t < w.size(); ++t) w[t] = drift + phi * (w[t - 1] - drift);
    Vec x(w.size() + 1, 0.0);
    for (std::size_t t = 0; t < w.size(); ++t) x[t + 1] = x[t] + w[t];

    const ArimaModel model = fit_arima(x, 1, 1, 0);
    const std::size_t split = 300;
    const std::span<const double> history(x.data(), split);
    const std::span<const double> test(x.data() + split, x.size() - split);
    const Vec preds = rolling_forecast(model, history, test);
    for (std::size_t i = 0; i < test.size(); ++i)
        CHECK(std::abs(preds[i] - test[i]) < 1e-6);
}

TEST_CASE("rolling_forecast never reads at or beyond the predicted index") {
    const Vec x = simulate_ar2(0.5, -0.2, 300, 777);
    ArModel model;
    model.phi = {0.5, -0.2};
    model.intercept = 0.0;

    const std::size_t split = 200;
    const std::span<const double> history(x.data(), split);
    const std::span<const double> test(x.data() + split, x.size() - split);
    const Vec preds = rolling_forecast(model, history, test);

    // Corrupt the future: prediction i must not change when every value at
    // index >= i is replaced.
    for (std::size_t i : {std::size_t{0}, std::size_t{40}, test.size() - 1}) {
        Vec corrupted(x.begin(), x.begin() + static_cast<long>(split + i));
        corrupted.resize(x.size(), 1e9);
        const std::span<const double> chist(corrupted.data(), split);
        const std::span<const double> ctest(corrupted.data() + split,
                                            corrupted.size() - split);
        const Vec cpreds = rolling_forecast(model, chist, ctest);
        CHECK(cpreds[i] == preds[i]);
    }
}

TEST_CASE("recursive_forecast of a stationary AR decays toward the mean") {
    ArModel model;
    model.phi = {0.5};
    model.intercept = 0.0;
    const Vec history{0, 0, 0, 8.0};
    const Vec preds = recursive_forecast(model, history, 5);
    CHECK(preds[0] == doctest::Approx(4.0));
    CHECK(preds[1] == doctest::Approx(2.0));
    CHECK(preds[4] == doctest::Approx(0.25));
}

TEST_CASE("rolling_forecast validates the history length") {
    ArModel model;
    model.phi = {0.5, 0.1, 0.1};
    CHECK_THROWS_AS(rolling_forecast(model, Vec{1.0}, Vec{2.0}), std::invalid_argument);
    ArimaModel arima;
    arima.p = 2;
    arima.d = 1;
    arima.phi = {0.5, 0.1};
    CHECK_THROWS_AS(rolling_forecast(arima, Vec{1.0, 2.0}, Vec{3.0}),
                    std::invalid_argument);
}
