#include "sttf/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sttf/spline.hpp"

namespace sttf::emd {

ExtremaSet find_extrema(std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < 3) throw std::invalid_argument("find_extrema: need at least 3 samples");

    ExtremaSet out;
    // Walk maximal runs of equal values; a run strictly above (below) both
    // neighbours is one maximum (minimum) at the run midpoint.
    std::size_t s = 0;
    while (s < n) {
        std::size_t e = s;
        while (e + 1 < n && signal[e + 1] == signal[s]) ++e;
        if (s > 0 && e < n - 1) {
            const double v = signal[s];
            const double left = signal[s - 1];
            const double right = signal[e + 1];
            const std::size_t mid = (s + e) / 2;
            if (v > left && v > right) out.maxima.push_back({mid, v});
            else if (v < left && v < right) out.minima.push_back({mid, v});
        }
        s = e + 1;
    }
    return out;
}

BoundaryPolicy boundary_policy_from_string(const std::string& name) {
    if (name == "mirror") return BoundaryPolicy::kMirror;
    if (name == "clamp") return BoundaryPolicy::kClampEndpoints;
    throw std::invalid_argument("unknown boundary policy: " + name);
}

std::string to_string(BoundaryPolicy policy) {
    return policy == BoundaryPolicy::kMirror ? "mirror" : "clamp";
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::kMonotonicResidual: return "monotonic_residual";
        case StopReason::kTooFewExtrema: return "too_few_extrema";
        case StopReason::kUnsiftableResidual: return "unsiftable_residual";
        case StopReason::kCandidateRanDry: return "candidate_ran_dry";
        case StopReason::kMaxImfs: return "max_imfs";
    }
    return "unknown";
}

namespace {

bool siftable(const ExtremaSet& ex) {
    return ex.maxima.size() >= 2 && ex.minima.size() >= 2;
}

}  // namespace

Vec spline_envelope(std::span<const Extremum> knots, std::size_t domain_length,
                    BoundaryPolicy policy, Endpoints signal_endpoints) {
    if (domain_length == 0) throw std::invalid_argument("spline_envelope: empty domain");
    if (knots.empty())
        throw std::invalid_argument("spline_envelope: need at least 1 knot");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (knots[i].index <= knots[i - 1].index)
            throw std::invalid_argument("spline_envelope: knot indices must increase");
    if (knots.back().index >= domain_length)
        throw std::invalid_argument("spline_envelope: knot outside domain");

    const std::size_t last = domain_length - 1;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(knots.size() + 4);
    for (const auto& k : knots) pts.emplace_back(static_cast<double>(k.index), k.value);

    if (policy == BoundaryPolicy::kMirror) {
        // Reflect up to two extrema about each end so the spline is anchored
        // beyond the domain instead of swinging freely at the borders.
        const std::size_t m = std::min<std::size_t>(2, knots.size());
        for (std::size_t i = 0; i < m; ++i) {
            const auto& k = knots[i];
            if (k.index > 0) pts.emplace_back(-static_cast<double>(k.index), k.value);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const auto& k = knots[knots.size() - 1 - i];
            if (k.index < last)
                pts.emplace_back(static_cast<double>(2 * last - k.index), k.value);
        }
    } else {
        if (knots.front().index > 0) pts.emplace_back(0.0, signal_endpoints.first);
        if (knots.back().index < last)
            pts.emplace_back(static_cast<double>(last), signal_endpoints.last);
    }

    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Vec result(domain_length, 0.0);
    if (pts.size() == 1) {
        std::fill(result.begin(), result.end(), pts.front().second);
        return result;
    }

    Vec xs, ys;
    xs.reserve(pts.size());
    ys.reserve(pts.size());
    for (const auto& [x, y] : pts) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const CubicSpline spline(std::move(xs), std::move(ys));
    for (std::size_t t = 0; t < domain_length; ++t)
        result[t] = spline(static_cast<double>(t));
    return result;
}

Vec mean_envelope(const EnvelopePair& pair) {
    if (pair.upper.size() != pair.lower.size())
        throw std::invalid_argument("mean_envelope: length mismatch");
    Vec m(pair.upper.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (pair.upper[i] + pair.lower[i]);
    return m;
}

EnvelopePair envelopes(std::span<const double> signal, BoundaryPolicy policy) {
    const auto ex = find_extrema(signal);
    if (ex.maxima.empty() || ex.minima.empty())
        throw InsufficientExtrema("envelopes: signal has no usable extrema");
    const Endpoints ends{signal.front(), signal.back()};
    EnvelopePair pair;
    pair.upper = spline_envelope(ex.maxima, signal.size(), policy, ends);
    pair.lower = spline_envelope(ex.minima, signal.size(), policy, ends);
    pair.mean = mean_envelope(pair);
    return pair;
}

SiftCandidate sift_once(std::span<const double> signal, int prior_iterations,
                        BoundaryPolicy policy) {
    const auto ex = find_extrema(signal);
    if (!siftable(ex))
        throw InsufficientExtrema("sift_once: need at least 2 maxima and 2 minima");
    const auto env = envelopes(signal, policy);
    SiftCandidate cand;
    cand.iterations = prior_iterations + 1;
    cand.d.resize(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) cand.d[i] = signal[i] - env.mean[i];
    return cand;
}

std::size_t count_zero_crossings(std::span<const double> signal) {
    std::size_t count = 0;
    int last_sign = 0;   // sign of the last non-zero sample
    bool in_zero_run = false;
    for (double x : signal) {
        const int s = (x > 0.0) - (x < 0.0);
        if (s == 0) {
            if (!in_zero_run) ++count;  // zero run counts once
            in_zero_run = true;
            last_sign = 0;              // and consumes the crossing around it
        } else {
            if (last_sign != 0 && s != last_sign) ++count;
            last_sign = s;
            in_zero_run = false;
        }
    }
    return count;
}

bool is_monotonic(std::span<const double> signal) {
    bool non_decreasing = true;
    bool non_increasing = true;
    for (std::size_t i = 1; i < signal.size(); ++i) {
        if (signal[i] < signal[i - 1]) non_decreasing = false;
        if (signal[i] > signal[i - 1]) non_increasing = false;
    }
    return non_decreasing || non_increasing;
}

ImfCheck is_imf(std::span<const double> signal, double zero_mean_tol,
                BoundaryPolicy policy) {
    if (signal.size() < 3) throw std::invalid_argument("is_imf: need at least 3 samples");

    ImfCheck check;
    const auto ex = find_extrema(signal);
    check.extrema_count = ex.total();
    check.zero_crossings = count_zero_crossings(signal);
    for (double v : signal) check.max_abs_signal = std::max(check.max_abs_signal, std::abs(v));

    if (ex.maxima.empty() || ex.minima.empty()) {
        // No envelope exists; the near-zero-mean condition is unsatisfiable.
        check.max_envelope_mean = std::numeric_limits<double>::infinity();
        check.pass = false;
        return check;
    }

    const auto env = envelopes(signal, policy);
    for (double m : env.mean)
        check.max_envelope_mean = std::max(check.max_envelope_mean, std::abs(m));

    const std::size_t ec = check.extrema_count;
    const std::size_t zc = check.zero_crossings;
    const std::size_t count_diff = ec > zc ? ec - zc : zc - ec;
    check.pass = count_diff <= 1 &&
                 check.max_envelope_mean <= zero_mean_tol * check.max_abs_signal;
    return check;
}

Vec ImfSet::reconstruct() const {
    Vec out = residual;
    for (const auto& imf : imfs)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += imf[i];
    return out;
}

std::vector<Vec> ImfSet::channels(bool include_residual) const {
    std::vector<Vec> out = imfs;
    if (include_residual) out.push_back(residual);
    return out;
}

ImfSet decompose(std::span<const double> signal, const EmdConfig& config) {
    if (signal.size() < 4) throw std::invalid_argument("decompose: need at least 4 samples");
    if (config.max_sift_iters < 1 || config.max_imfs < 1)
        throw std::invalid_argument("decompose: iteration bounds must be positive");
    for (double v : signal)
        if (!std::isfinite(v)) throw std::invalid_argument("decompose: non-finite input");

    ImfSet set;
    set.residual.assign(signal.begin(), signal.end());
    set.stop_reason = StopReason::kMaxImfs;

    while (static_cast<int>(set.imfs.size()) < config.max_imfs) {
        const auto ex = find_extrema(set.residual);
        if (is_monotonic(set.residual)) {
            set.stop_reason = StopReason::kMonotonicResidual;
            break;
        }
        if (ex.total() <= 1) {
            set.stop_reason = StopReason::kTooFewExtrema;
            break;
        }
        if (!siftable(ex)) {
            set.stop_reason = StopReason::kUnsiftableResidual;
            break;
        }

        // Sift this component until it passes the IMF test or the cap hits.
        Vec candidate = set.residual;
        int iterations = 0;
        bool converged = false;
        bool ran_dry = false;
        while (iterations < config.max_sift_iters) {
            SiftCandidate next;
            try {
                next = sift_once(candidate, iterations, config.boundary);
            } catch (const InsufficientExtrema&) {
                // The candidate lost its oscillations before passing the
                // admission test; it is residual-grade, not an IMF.
                ran_dry = true;
                break;
            }
            candidate = std::move(next.d);
            iterations = next.iterations;
            if (is_imf(candidate, config.zero_mean_tol, config.boundary).pass) {
                converged = true;
                break;
            }
        }
        if (ran_dry) {
            // Leave the content in the residual and stop.
            set.stop_reason = StopReason::kCandidateRanDry;
            break;
        }

        set.imfs.push_back(candidate);
        set.sift_counts.push_back(iterations);
        set.converged.push_back(converged);
        for (std::size_t i = 0; i < set.residual.size(); ++i)
            set.residual[i] -= candidate[i];
    }
    return set;
}

ImfSet decompose(const CenteredSeries& series, const EmdConfig& config) {
    return decompose(std::span<const double>(series.values), config);
}

}  // namespace sttf::emd
