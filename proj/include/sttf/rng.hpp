#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sttf {

/// Deterministic random source built on std::mt19937_64. The engine itself is
/// fully specified by the standard; the distribution mappings are hand-rolled
/// here because std::uniform_real_distribution and friends are
/// implementation-defined, which would break byte-identical reruns across
/// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n). Rejection-free modulo is fine here; the
    /// bias at n ~ dataset sizes is negligible and determinism is what matters.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    /// Fisher-Yates shuffle (std::shuffle is implementation-defined).
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sttf
