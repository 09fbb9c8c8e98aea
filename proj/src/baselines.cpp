#include "sttf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sttf::baselines {

namespace {

/// Solve the k x k normal equations (X'X) beta = X'y by Gaussian elimination
/// with partial pivoting. Returns false when the design is singular.
bool solve_least_squares(const std::vector<Vec>& rows, std::span<const double> targets,
                         Vec& beta) {
    const std::size_t k = rows.front().size();
    Matrix a(k, k + 1);  // augmented [X'X | X'y]
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) a(i, j) += rows[r][i] * rows[r][j];
            a(i, k) += rows[r][i] * targets[r];
        }
    }

    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) scale = std::max(scale, std::abs(a(i, j)));
    const double tol = 1e-12 * std::max(scale, 1.0);

    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < tol) return false;
        if (pivot != col)
            for (std::size_t j = 0; j <= k; ++j) std::swap(a(col, j), a(pivot, j));
        for (std::size_t r = col + 1; r < k; ++r) {
            const double factor = a(r, col) / a(col, col);
            for (std::size_t j = col; j <= k; ++j) a(r, j) -= factor * a(col, j);
        }
    }
    beta.assign(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        double acc = a(i, k);
        for (std::size_t j = i + 1; j < k; ++j) acc -= a(i, j) * beta[j];
        beta[i] = acc / a(i, i);
    }
    return true;
}

Vec difference(std::span<const double> x, std::size_t d) {
    Vec w(x.begin(), x.end());
    for (std::size_t round = 0; round < d; ++round) {
        Vec next(w.size() - 1);
        for (std::size_t i = 0; i + 1 < w.size(); ++i) next[i] = w[i + 1] - w[i];
        w = std::move(next);
    }
    return w;
}

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

/// The innovations recursion feeds e_{t-j} back through theta, so a
/// noninvertible MA estimate diverges. sum_j |theta_j| < 1 is sufficient for
/// stability; when violated, damp theta_j by lambda^j (which scales every
/// root of the recursion by lambda) until the sum sits at 0.95.
bool damp_to_invertible(Vec& theta) {
    double sum = 0.0;
    for (double t : theta) sum += std::abs(t);
    if (sum < 0.98) return false;

    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double lambda = 0.5 * (lo + hi);
        double damped = 0.0;
        double factor = lambda;
        for (double t : theta) {
            damped += std::abs(t) * factor;
            factor *= lambda;
        }
        (damped > 0.95 ? hi : lo) = lambda;
    }
    double factor = lo;
    for (double& t : theta) {
        t *= factor;
        factor *= lo;
    }
    return true;
}

/// In-sample innovations of an ARMA recursion over w; entries before the
/// model can predict are zero.
Vec innovations(const ArimaModel& model, std::span<const double> w) {
    Vec resid(w.size(), 0.0);
    for (std::size_t t = model.p; t < w.size(); ++t) {
        double pred = model.intercept;
        for (std::size_t i = 0; i < model.p; ++i) pred += model.phi[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < model.q; ++j)
            if (t >= j + 1) pred += model.theta[j] * resid[t - 1 - j];
        resid[t] = w[t] - pred;
    }
    return resid;
}

double integrate_step(std::span<const double> x, std::size_t t, std::size_t d,
                      double w_pred) {
    // Undo d rounds of differencing for a one-step prediction at index t.
    switch (d) {
        case 0: return w_pred;
        case 1: return x[t - 1] + w_pred;
        case 2: return 2.0 * x[t - 1] - x[t - 2] + w_pred;
        default: throw std::invalid_argument("integrate_step: d must be in {0,1,2}");
    }
}

}  // namespace

double naive_forecast(std::span<const double> history) {
    if (history.empty()) throw std::invalid_argument("naive_forecast: empty history");
    return history.back();
}

double ArModel::predict(std::span<const double> history) const {
    if (history.size() < phi.size())
        throw std::invalid_argument("ArModel::predict: history shorter than order");
    double pred = intercept;
    for (std::size_t i = 0; i < phi.size(); ++i)
        pred += phi[i] * history[history.size() - 1 - i];
    return pred;
}

ArModel fit_ar(std::span<const double> series, std::size_t p) {
    if (p < 1) throw std::invalid_argument("fit_ar: p must be >= 1");
    if (series.size() <= 3 * p + 10)
        throw std::invalid_argument("fit_ar: series too short for order " + std::to_string(p));

    std::vector<Vec> rows;
    Vec targets;
    for (std::size_t t = p; t < series.size(); ++t) {
        Vec row(p + 1, 1.0);
        for (std::size_t i = 0; i < p; ++i) row[i] = series[t - 1 - i];
        rows.push_back(std::move(row));
        targets.push_back(series[t]);
    }

    ArModel model;
    Vec beta;
    if (solve_least_squares(rows, targets, beta)) {
        model.phi.assign(beta.begin(), beta.begin() + p);
        model.intercept = beta[p];
    } else {
        model.phi.assign(p, 0.0);
        model.intercept = mean_of(targets);
        model.intercept_only = true;
    }
    return model;
}

ArimaModel fit_arima(std::span<const double> series, std::size_t p, std::size_t d,
                     std::size_t q) {
    if (d > 2) throw std::invalid_argument("fit_arima: d must be in {0,1,2}");
    if (p < 1) throw std::invalid_argument("fit_arima: p must be >= 1");
    if (series.size() <= d)
        throw std::invalid_argument("fit_arima: series too short to difference");
    const Vec w = difference(series, d);

    ArimaModel model;
    model.p = p;
    model.d = d;
    model.q = q;

    if (q == 0) {
        const ArModel ar = fit_ar(w, p);
        model.phi = ar.phi;
        model.intercept = ar.intercept;
        model.intercept_only = ar.intercept_only;
        return model;
    }

    // Stage 1: long AR to proxy the innovations.
    const std::size_t long_order = std::max<std::size_t>(p + q, 10);
    if (w.size() <= 3 * long_order + 10)
        throw std::invalid_argument("fit_arima: series too short for two-stage fit");
    const ArModel long_ar = fit_ar(w, long_order);
    Vec resid(w.size(), 0.0);
    for (std::size_t t = long_order; t < w.size(); ++t)
        resid[t] = w[t] - long_ar.predict(std::span<const double>(w).subspan(0, t));

    // Stage 2: regress on p lags of w and q lags of the stage-1 innovations.
    std::vector<Vec> rows;
    Vec targets;
    for (std::size_t t = std::max(long_order + q, p); t < w.size(); ++t) {
        Vec row(p + q + 1, 1.0);
        for (std::size_t i = 0; i < p; ++i) row[i] = w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) row[p + j] = resid[t - 1 - j];
        rows.push_back(std::move(row));
        targets.push_back(w[t]);
    }

    Vec beta;
    if (solve_least_squares(rows, targets, beta)) {
        model.phi.assign(beta.begin(), beta.begin() + p);
        model.theta.assign(beta.begin() + p, beta.begin() + p + q);
        model.intercept = beta[p + q];
        model.theta_damped = damp_to_invertible(model.theta);
    } else {
        model.phi.assign(p, 0.0);
        model.theta.assign(q, 0.0);
        model.intercept = mean_of(targets);
        model.intercept_only = true;
    }
    return model;
}

Vec rolling_forecast(const ArModel& model, std::span<const double> history,
                     std::span<const double> test) {
    if (history.size() < std::max<std::size_t>(model.order(), 1))
        throw std::invalid_argument("rolling_forecast: insufficient history");
    Vec combined(history.begin(), history.end());
    combined.insert(combined.end(), test.begin(), test.end());

    Vec predictions;
    predictions.reserve(test.size());
    for (std::size_t t = history.size(); t < combined.size(); ++t)
        predictions.push_back(
            model.predict(std::span<const double>(combined).subspan(0, t)));
    return predictions;
}

Vec rolling_forecast(const ArimaModel& model, std::span<const double> history,
                     std::span<const double> test) {
    if (history.size() < model.p + model.d + 1 || history.size() < model.q + model.d + 1)
        throw std::invalid_argument("rolling_forecast: insufficient history");

    Vec combined(history.begin(), history.end());
    combined.insert(combined.end(), test.begin(), test.end());
    const Vec w = difference(combined, model.d);
    const Vec resid = innovations(model, w);

    // The innovation recursion only ever consumes w and resid entries strictly
    // before the index being predicted, so evaluating it on the full observed
    // span is still one-step-ahead.
    Vec predictions;
    predictions.reserve(test.size());
    for (std::size_t t = history.size(); t < combined.size(); ++t) {
        const std::size_t k = t - model.d;  // index in w being predicted
        double w_pred = model.intercept;
        for (std::size_t i = 0; i < model.p; ++i) w_pred += model.phi[i] * w[k - 1 - i];
        for (std::size_t j = 0; j < model.q; ++j)
            if (k >= j + 1) w_pred += model.theta[j] * resid[k - 1 - j];
        predictions.push_back(integrate_step(combined, t, model.d, w_pred));
    }
    return predictions;
}

Vec recursive_forecast(const ArModel& model, std::span<const double> history,
                       std::size_t horizon) {
    if (history.size() < std::max<std::size_t>(model.order(), 1))
        throw std::invalid_argument("recursive_forecast: insufficient history");
    Vec extended(history.begin(), history.end());
    Vec predictions;
    predictions.reserve(horizon);
    for (std::size_t step = 0; step < horizon; ++step) {
        const double pred = model.predict(extended);
        predictions.push_back(pred);
        extended.push_back(pred);
    }
    return predictions;
}

Vec recursive_forecast(const ArimaModel& model, std::span<const double> history,
                       std::size_t horizon) {
    if (history.size() < model.p + model.d + 1 || history.size() < model.q + model.d + 1)
        throw std::invalid_argument("recursive_forecast: insufficient history");

    Vec extended(history.begin(), history.end());
    Vec w = difference(extended, model.d);
    Vec resid = innovations(model, w);

    Vec predictions;
    predictions.reserve(horizon);
    for (std::size_t step = 0; step < horizon; ++step) {
        const std::size_t k = w.size();
        double w_pred = model.intercept;
        for (std::size_t i = 0; i < model.p; ++i) w_pred += model.phi[i] * w[k - 1 - i];
        for (std::size_t j = 0; j < model.q; ++j)
            if (k >= j + 1) w_pred += model.theta[j] * resid[k - 1 - j];
        const double x_pred = integrate_step(extended, extended.size(), model.d, w_pred);
        predictions.push_back(x_pred);
        extended.push_back(x_pred);
        w.push_back(w_pred);
        resid.push_back(0.0);  // future innovations expected zero
    }
    return predictions;
}

}  // namespace sttf::baselines
