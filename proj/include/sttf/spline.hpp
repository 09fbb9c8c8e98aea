#pragma once

#include "sttf/matrix.hpp"

namespace sttf {

/// Natural cubic spline through (x, y) knots with strictly increasing x.
/// Second derivatives vanish at both end knots; with two knots this reduces
/// exactly to linear interpolation. Evaluation outside the knot range
/// extrapolates with the boundary polynomial.
class CubicSpline {
public:
    CubicSpline(Vec x, Vec y);

    double operator()(double x) const;

    std::size_t knot_count() const { return x_.size(); }

private:
    Vec x_;
    Vec y_;
    Vec m_;  // second derivatives at knots, m_[0] = m_[n-1] = 0
};

}  // namespace sttf
