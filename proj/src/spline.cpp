#include "sttf/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace sttf {

CubicSpline::CubicSpline(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("CubicSpline: need >= 2 knots with matching y");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("CubicSpline: knot x values must strictly increase");

    m_.assign(n, 0.0);
    if (n == 2) return;

    // Tridiagonal system for interior second derivatives (Thomas algorithm):
    //   (h_{i-1}/6) m_{i-1} + ((h_{i-1}+h_i)/3) m_i + (h_i/6) m_{i+1} = rhs_i
    const std::size_t ni = n - 2;
    Vec diag(ni), upper(ni), rhs(ni);
    for (std::size_t i = 0; i < ni; ++i) {
        const double h0 = x_[i + 1] - x_[i];
        const double h1 = x_[i + 2] - x_[i + 1];
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0;
    }
    // Forward sweep. The sub-diagonal entry of row i is h_i/6 = upper[i-1]'s
    // mirror, recomputed in place.
    for (std::size_t i = 1; i < ni; ++i) {
        const double lower = (x_[i + 1] - x_[i]) / 6.0;
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[ni] = rhs[ni - 1] / diag[ni - 1];
    for (std::size_t i = ni - 1; i > 0; --i)
        m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
}

double CubicSpline::operator()(double x) const {
    const std::size_t n = x_.size();
    // Locate segment; clamp to boundary segments for extrapolation.
    std::size_t i;
    if (x <= x_[1]) {
        i = 0;
    } else if (x >= x_[n - 2]) {
        i = n - 2;
    } else {
        i = static_cast<std::size_t>(
                std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    }
    const double h = x_[i + 1] - x_[i];
    const double a = x_[i + 1] - x;
    const double b = x - x_[i];
    return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
           (y_[i] / h - m_[i] * h / 6.0) * a + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
}

}  // namespace sttf
