#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttf/matrix.hpp"
#include "sttf/timeseries.hpp"

namespace sttf::emd {

struct Extremum {
    std::size_t index = 0;
    double value = 0.0;
};

struct ExtremaSet {
    std::vector<Extremum> maxima;
    std::vector<Extremum> minima;

    std::size_t total() const { return maxima.size() + minima.size(); }
};

/// How envelope splines behave beyond the outermost extrema.
enum class BoundaryPolicy {
    kMirror,          // reflect up to two extrema about each end of the domain
    kClampEndpoints,  // pin the envelope to the signal's end values
};

BoundaryPolicy boundary_policy_from_string(const std::string& name);
std::string to_string(BoundaryPolicy policy);

struct Endpoints {
    double first = 0.0;
    double last = 0.0;
};

/// Strict interior extrema. A flat plateau that rises above (or dips below)
/// both neighbours yields a single extremum at the plateau midpoint, rounded
/// down. Endpoints are never extrema.
ExtremaSet find_extrema(std::span<const double> signal);

/// Signals the sifting caller that a component has run out of oscillations.
struct InsufficientExtrema : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Natural cubic spline through the extrema knots, extended per the boundary
/// policy and evaluated at every integer index 0..domain_length-1. The signal
/// endpoint values are consulted only by kClampEndpoints.
Vec spline_envelope(std::span<const Extremum> knots, std::size_t domain_length,
                    BoundaryPolicy policy = BoundaryPolicy::kMirror,
                    Endpoints signal_endpoints = {});

struct EnvelopePair {
    Vec upper;
    Vec lower;
    Vec mean;
};

/// Element-wise (upper + lower) / 2.
Vec mean_envelope(const EnvelopePair& pair);

/// Upper and lower envelopes of a signal plus their mean. Requires at least
/// one maximum and one minimum.
EnvelopePair envelopes(std::span<const double> signal,
                       BoundaryPolicy policy = BoundaryPolicy::kMirror);

struct SiftCandidate {
    Vec d;
    int iterations = 0;
};

/// One sifting pass: signal minus its envelope mean. Throws
/// InsufficientExtrema unless the signal has at least two maxima and two
/// minima.
SiftCandidate sift_once(std::span<const double> signal, int prior_iterations = 0,
                        BoundaryPolicy policy = BoundaryPolicy::kMirror);

struct ImfCheck {
    bool pass = false;
    std::size_t extrema_count = 0;
    std::size_t zero_crossings = 0;
    double max_envelope_mean = 0.0;  // max |m(t)|; +inf when no envelope exists
    double max_abs_signal = 0.0;
};

/// Admission test: |#extrema - #zero crossings| <= 1 and
/// max|m(t)| <= zero_mean_tol * max|signal|. Always returns diagnostics.
ImfCheck is_imf(std::span<const double> signal, double zero_mean_tol = 0.05,
                BoundaryPolicy policy = BoundaryPolicy::kMirror);

/// Sign changes between consecutive samples count once; a run of exact zero
/// samples counts once and consumes the surrounding change.
std::size_t count_zero_crossings(std::span<const double> signal);

bool is_monotonic(std::span<const double> signal);

struct EmdConfig {
    int max_sift_iters = 100;
    double zero_mean_tol = 0.05;
    int max_imfs = 12;
    BoundaryPolicy boundary = BoundaryPolicy::kMirror;
};

/// Why decompose stopped extracting components.
enum class StopReason {
    kMonotonicResidual,   // residual is monotonic
    kTooFewExtrema,       // residual has at most one extremum
    kUnsiftableResidual,  // residual lacks 2 maxima or 2 minima
    kCandidateRanDry,     // next candidate lost its extrema before admission;
                          // its content stays in the residual
    kMaxImfs,             // component cap reached
};

std::string to_string(StopReason reason);

/// Ordered IMFs (highest frequency first) plus the final residual.
/// sum(imfs) + residual reconstructs the decomposed input.
struct ImfSet {
    std::vector<Vec> imfs;
    Vec residual;
    std::vector<int> sift_counts;
    std::vector<bool> converged;  // false = accepted at the sift-iteration cap
    StopReason stop_reason = StopReason::kMonotonicResidual;

    std::size_t imf_count() const { return imfs.size(); }
    Vec reconstruct() const;

    /// IMFs (and optionally the residual) as equal-length feature channels.
    std::vector<Vec> channels(bool include_residual = true) const;
};

/// Full EMD: repeatedly sift out IMFs until the residual is monotonic, has
/// at most one extremum, can no longer be sifted, or max_imfs is reached.
/// A signal with no interior extrema yields zero IMFs and residual = input.
ImfSet decompose(std::span<const double> signal, const EmdConfig& config = {});
ImfSet decompose(const CenteredSeries& series, const EmdConfig& config = {});

}  // namespace sttf::emd
