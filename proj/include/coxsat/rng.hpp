#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace coxsat {

/** SplitMix64 step: advances the state and returns the next 64-bit word. */
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/** Stateless 64-bit finalizer used to combine stream keys. */
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
}

/** Independent per-replicate seed derived from a master seed. */
inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate) {
    return mix64(master ^ mix64(replicate + 0x9e3779b97f4a7c15ULL));
}

/**
 * Counter-based random stream keyed by (master seed, replicate index, tag).
 *
 * Every replicate and purpose gets its own stream, so results are
 * bit-identical regardless of evaluation order or worker count, and a
 * consumer may stop drawing early without disturbing other streams.
 */
class RandomStream {
  public:
    RandomStream() : state_(0) {}
    explicit RandomStream(std::uint64_t seed) : state_(mix64(seed)) {}

    static RandomStream keyed(std::uint64_t master, std::uint64_t replicate,
                              std::uint64_t tag) {
        std::uint64_t s = mix64(master ^ 0x5851f42d4c957f2dULL);
        s = mix64(s ^ (replicate * 0x14057b7ef767814fULL));
        s = mix64(s ^ (tag * 0x2545f4914f6cdd1dULL));
        return RandomStream(s);
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    /** Uniform double in [0, 1). */
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /** Uniform double in [a, b). */
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /** Exponential with the given mean; strictly positive. */
    double exponential(double mean = 1.0) {
        return -mean * std::log1p(-uniform());
    }

    /**
     * Poisson count by Knuth's product method, with additive splitting
     * for large means so the running product never underflows.
     */
    long poisson(double mean) {
        if (mean < 0.0) throw std::domain_error("poisson: mean must be >= 0");
        long total = 0;
        while (mean > 60.0) {
            total += poisson_knuth(60.0);
            mean -= 60.0;
        }
        return total + poisson_knuth(mean);
    }

    /** Gamma(shape, 1/shape) for integer shape: unit-mean power fading. */
    double gamma_unit_mean(int shape) {
        if (shape < 1) throw std::domain_error("gamma_unit_mean: shape must be >= 1");
        double sum = 0.0;
        for (int i = 0; i < shape; ++i) sum += exponential();
        return sum / static_cast<double>(shape);
    }

  private:
    long poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::uint64_t state_;
};

/** Stream tags: one per independent random purpose within a replicate. */
namespace stream_tag {
inline constexpr std::uint64_t constellation = 1;
inline constexpr std::uint64_t fading = 2;
inline constexpr std::uint64_t observer = 3;
inline constexpr std::uint64_t orbit_set = 4;
}  // namespace stream_tag

}  // namespace coxsat
