#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sttf/emd.hpp"
#include "sttf/rng.hpp"

using namespace sttf;
using namespace sttf::emd;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec sine(std::size_t n, double period, double amplitude = 1.0, double offset = 0.0) {
    Vec v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = amplitude * std::sin(2 * kPi * static_cast<double>(k) / period) + offset;
    return v;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

std::span<const double> interior(const Vec& v, double keep) {
    const auto skip = static_cast<std::size_t>(static_cast<double>(v.size()) * (1 - keep) / 2);
    return std::span<const double>(v).subspan(skip, v.size() - 2 * skip);
}

}  // namespace

TEST_CASE("find_extrema on a single oscillation") {
    const Vec v{0, 1, 0, -1, 0};
    const ExtremaSet ex = find_extrema(v);
    REQUIRE(ex.maxima.size() == 1);
    REQUIRE(ex.minima.size() == 1);
    CHECK(ex.maxima[0].index == 1);
    CHECK(ex.maxima[0].value == 1.0);
    CHECK(ex.minima[0].index == 3);
    CHECK(ex.minima[0].value == -1.0);
}

TEST_CASE("find_extrema on monotonic data finds nothing") {
    const ExtremaSet ex = find_extrema(Vec{1, 2, 3, 4});
    CHECK(ex.maxima.empty());
    CHECK(ex.minima.empty());
    CHECK_THROWS_AS(find_extrema(Vec{1, 2}), std::invalid_argument);
}

TEST_CASE("find_extrema plateau midpoint, rounded down") {
    const ExtremaSet ex = find_extrema(Vec{0, 1, 1, 1, 0});
    REQUIRE(ex.maxima.size() == 1);
    CHECK(ex.maxima[0].index == 2);

    const ExtremaSet even = find_extrema(Vec{0, 1, 1, 0});
    REQUIRE(even.maxima.size() == 1);
    CHECK(even.maxima[0].index == 1);

    const ExtremaSet dip = find_extrema(Vec{3, 1, 1, 1, 1, 3});
    REQUIRE(dip.minima.size() == 1);
    CHECK(dip.minima[0].index == 2);

    // Plateaus touching an endpoint are not interior extrema.
    const ExtremaSet edge = find_extrema(Vec{1, 1, 0, 1});
    CHECK(edge.maxima.empty());
}

TEST_CASE("find_extrema locates every analytic extremum of a sine") {
    const Vec v = sine(1000, 50.0);
    const ExtremaSet ex = find_extrema(v);
    REQUIRE(ex.maxima.size() == 20);
    REQUIRE(ex.minima.size() == 20);
    // Analytic maxima at k = 12.5 + 50 j, minima at k = 37.5 + 50 j.
    for (std::size_t j = 0; j < 20; ++j) {
        const double max_at = 12.5 + 50.0 * static_cast<double>(j);
        const double min_at = 37.5 + 50.0 * static_cast<double>(j);
        CHECK(std::abs(static_cast<double>(ex.maxima[j].index) - max_at) <= 0.5);
        CHECK(std::abs(static_cast<double>(ex.minima[j].index) - min_at) <= 0.5);
    }
    // Alternating: every maximum lies between two minima indices.
    std::vector<std::size_t> merged;
    std::size_t mi = 0, ni = 0;
    while (mi < 20 || ni < 20) {
        if (ni == 20 || (mi < 20 && ex.maxima[mi].index < ex.minima[ni].index))
            merged.push_back(ex.maxima[mi++].index);
        else
            merged.push_back(ex.minima[ni++].index);
    }
    for (std::size_t i = 1; i < merged.size(); ++i) CHECK(merged[i] > merged[i - 1]);
}

TEST_CASE("spline_envelope through two equal knots is constant") {
    const std::vector<Extremum> knots{{0, 2.0}, {9, 2.0}};
    const Vec env = spline_envelope(knots, 10);
    for (double v : env) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("spline_envelope three-knot case hits the knots and stays symmetric") {
    const std::vector<Extremum> knots{{0, 0.0}, {5, 1.0}, {10, 0.0}};
    const Vec env = spline_envelope(knots, 11);
    CHECK(env[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(env[5] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(env[10] == doctest::Approx(0.0).epsilon(1e-9));
    for (int d = 0; d <= 5; ++d)
        CHECK(env[5 - d] == doctest::Approx(env[5 + d]).epsilon(1e-9));
}

TEST_CASE("spline_envelope of sine maxima approximates the constant amplitude") {
    const Vec v = sine(900, 60.0, 3.0);
    const ExtremaSet ex = find_extrema(v);
    const Vec upper = spline_envelope(ex.maxima, v.size());
    const std::size_t third = v.size() / 3;
    for (std::size_t t = third; t < 2 * third; ++t)
        CHECK(upper[t] == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("spline_envelope input validation") {
    CHECK_THROWS_AS(spline_envelope({}, 10), std::invalid_argument);
    const std::vector<Extremum> bad{{5, 1.0}, {5, 2.0}};
    CHECK_THROWS_AS(spline_envelope(bad, 10), std::invalid_argument);
    // Single interior knot still works via mirroring.
    const std::vector<Extremum> one{{4, 2.5}};
    const Vec env = spline_envelope(one, 9);
    for (double v : env) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("mean_envelope is the element-wise mean") {
    EnvelopePair pair;
    pair.upper.assign(8, 2.0);
    pair.lower.assign(8, -2.0);
    for (double m : mean_envelope(pair)) CHECK(m == 0.0);

    Rng rng(5);
    pair.upper.clear();
    pair.lower.clear();
    for (int i = 0; i < 100; ++i) {
        pair.upper.push_back(rng.uniform(-10, 10));
        pair.lower.push_back(rng.uniform(-10, 10));
    }
    const Vec m = mean_envelope(pair);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(m[i] == (pair.upper[i] + pair.lower[i]) / 2.0);

    pair.lower.pop_back();
    CHECK_THROWS_AS(mean_envelope(pair), std::invalid_argument);
}

TEST_CASE("mean_envelope of identical envelopes returns the signal") {
    const Vec s = sine(64, 16.0);
    EnvelopePair pair{s, s, {}};
    CHECK(mean_envelope(pair) == s);
}

TEST_CASE("envelopes bracket the signal between the outermost extrema") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        Vec v(600);
        const double p1 = 20 + rng.uniform(0, 20), p2 = 90 + rng.uniform(0, 60);
        for (std::size_t k = 0; k < v.size(); ++k)
            v[k] = std::sin(2 * kPi * static_cast<double>(k) / p1) +
                   0.7 * std::sin(2 * kPi * static_cast<double>(k) / p2 + 0.3);
        const EnvelopePair pair = envelopes(v);
        double amplitude = 0.0;
        for (double x : v) amplitude = std::max(amplitude, std::abs(x));
        const ExtremaSet ex = find_extrema(v);
        const std::size_t lo = std::max(ex.maxima.front().index, ex.minima.front().index);
        const std::size_t hi = std::min(ex.maxima.back().index, ex.minima.back().index);
        for (std::size_t t = lo; t <= hi; ++t)
            CHECK(pair.upper[t] >= pair.lower[t] - 1e-9 * amplitude);
    }
}

TEST_CASE("sift_once of a pure sine changes almost nothing") {
    const Vec v = sine(1000, 40.0);
    const SiftCandidate cand = sift_once(v);
    CHECK(cand.iterations == 1);
    const auto inner_d = interior(cand.d, 0.8);
    const auto inner_v = interior(v, 0.8);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < inner_d.size(); ++i) {
        num += (inner_d[i] - inner_v[i]) * (inner_d[i] - inner_v[i]);
        den += inner_v[i] * inner_v[i];
    }
    CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("sift_once pulls a constant offset into the envelope mean") {
    const double offset = 2.0;
    const Vec v = sine(1000, 40.0, 1.0, offset);
    const SiftCandidate cand = sift_once(v);
    // The offset sits in m(t), so the candidate's own envelope mean is small.
    const EnvelopePair env = envelopes(cand.d);
    double max_mean = 0.0;
    for (double m : interior(env.mean, 0.8)) max_mean = std::max(max_mean, std::abs(m));
    CHECK(max_mean < offset);
    CHECK(max_mean < 0.2);
}

TEST_CASE("sift_once refuses a monotonic ramp") {
    Vec ramp(50);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    CHECK_THROWS_AS(sift_once(ramp), InsufficientExtrema);
}

TEST_CASE("zero crossing counting") {
    CHECK(count_zero_crossings(Vec{1, -1}) == 1);
    CHECK(count_zero_crossings(Vec{1, 2, 3}) == 0);
    CHECK(count_zero_crossings(Vec{1, 0, -1}) == 1);
    CHECK(count_zero_crossings(Vec{1, 0, 0, -1}) == 1);
    CHECK(count_zero_crossings(Vec{1, 0, 1}) == 1);
    CHECK(count_zero_crossings(Vec{-1, 1, -1, 1}) == 3);
}

TEST_CASE("is_imf accepts a pure sine and rejects a ramp and an offset sine") {
    CHECK(is_imf(sine(1000, 20.0)).pass);

    Vec ramp(10);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    const ImfCheck ramp_check = is_imf(ramp);
    CHECK_FALSE(ramp_check.pass);
    CHECK(ramp_check.extrema_count == 0);
    CHECK(std::isinf(ramp_check.max_envelope_mean));

    const ImfCheck offset_check = is_imf(sine(1000, 20.0, 1.0, 0.5));
    CHECK_FALSE(offset_check.pass);
    // Envelope mean sits near the 0.5 offset, far above 5% of max|signal|.
    CHECK(offset_check.max_envelope_mean > 0.3);
}

TEST_CASE("decompose of a monotonic ramp yields zero IMFs") {
    Vec ramp(100);
    std::iota(ramp.begin(), ramp.end(), -50.0);
    const ImfSet set = decompose(ramp);
    CHECK(set.imf_count() == 0);
    CHECK(set.residual == ramp);
}

TEST_CASE("decompose keeps an already-valid IMF nearly intact") {
    const Vec v = sine(1000, 20.0);
    const ImfSet set = decompose(v);
    REQUIRE(set.imf_count() >= 1);
    CHECK(pearson(interior(set.imfs[0], 0.8), interior(v, 0.8)) > 0.99);
}

TEST_CASE("decompose separates two well-spaced tones") {
    const std::size_t n = 2000;
    const Vec fast = sine(n, 10.0);
    const Vec slow = sine(n, 100.0);
    Vec mix(n);
    for (std::size_t k = 0; k < n; ++k) mix[k] = fast[k] + slow[k];

    const ImfSet set = decompose(mix);
    REQUIRE(set.imf_count() >= 2);
    CHECK(pearson(interior(set.imfs[0], 0.8), interior(fast, 0.8)) > 0.95);
    CHECK(pearson(interior(set.imfs[1], 0.8), interior(slow, 0.8)) > 0.95);

    // Ordering: zero-crossing counts do not increase from fast to slow.
    std::size_t prev = count_zero_crossings(set.imfs[0]);
    for (std::size_t i = 1; i < set.imf_count(); ++i) {
        const std::size_t zc = count_zero_crossings(set.imfs[i]);
        CHECK(zc <= prev);
        prev = zc;
    }
}

TEST_CASE("decompose reconstruction and residual termination") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 800 + rng.below(400);
        Vec v(n);
        const double p1 = 15 + rng.uniform(0, 10);
        const double p2 = 80 + rng.uniform(0, 60);
        for (std::size_t k = 0; k < n; ++k)
            v[k] = 2.0 * std::sin(2 * kPi * static_cast<double>(k) / p1 + 0.5) +
                   std::sin(2 * kPi * static_cast<double>(k) / p2) +
                   0.05 * rng.gaussian();
        const ImfSet set = decompose(v);
        double max_abs = 0.0;
        for (double x : v) max_abs = std::max(max_abs, std::abs(x));
        const Vec rec = set.reconstruct();
        for (std::size_t t = 0; t < n; ++t)
            CHECK(std::abs(rec[t] - v[t]) <= 1e-8 * max_abs);

        // The stop reason matches the observable residual state.
        const ExtremaSet ex = find_extrema(set.residual);
        switch (set.stop_reason) {
            case StopReason::kMonotonicResidual:
                CHECK(is_monotonic(set.residual));
                break;
            case StopReason::kTooFewExtrema:
                CHECK(ex.total() <= 1);
                break;
            case StopReason::kUnsiftableResidual:
                CHECK((ex.maxima.size() < 2 || ex.minima.size() < 2));
                break;
            case StopReason::kCandidateRanDry:
                // Content that could not be sifted into a valid IMF stays in
                // the residual; no structural claim beyond reconstruction.
                break;
            case StopReason::kMaxImfs:
                CHECK(set.imf_count() == 12);
                break;
        }
        // Every emitted component that converged passes the admission test.
        for (std::size_t i = 0; i < set.imf_count(); ++i)
            if (set.converged[i]) CHECK(is_imf(set.imfs[i]).pass);
    }
}

TEST_CASE("decompose is deterministic") {
    Vec v = sine(500, 24.0);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] += 0.4 * std::sin(2 * kPi * static_cast<double>(k) / 111.0);
    const ImfSet a = decompose(v);
    const ImfSet b = decompose(v);
    REQUIRE(a.imf_count() == b.imf_count());
    for (std::size_t i = 0; i < a.imf_count(); ++i) CHECK(a.imfs[i] == b.imfs[i]);
    CHECK(a.residual == b.residual);
    CHECK(a.sift_counts == b.sift_counts);
}

TEST_CASE("decompose rejects bad input") {
    CHECK_THROWS_AS(decompose(Vec{1, 2, 3}), std::invalid_argument);
    Vec bad{1, 2, std::nan(""), 4};
    CHECK_THROWS_AS(decompose(bad), std::invalid_argument);
    EmdConfig cfg;
    cfg.max_imfs = 0;
    CHECK_THROWS_AS(decompose(sine(100, 10.0), cfg), std::invalid_argument);
}

TEST_CASE("decompose channels include the residual last") {
    const Vec v = sine(400, 16.0, 1.0);
    const ImfSet set = decompose(v);
    const auto with = set.channels(true);
    const auto without = set.channels(false);
    CHECK(with.size() == without.size() + 1);
    CHECK(with.back() == set.residual);
}
