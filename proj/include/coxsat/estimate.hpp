#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace coxsat {

/**
 * Point estimate with a normal-approximation confidence interval. Binomial
 * estimates fall back to a Wilson interval when either outcome count drops
 * below 30, which keeps tail probabilities (order 1e-4) honest.
 */
struct EstimateWithCI {
    static constexpr double kZ95 = 1.959963984540054;

    double value = 0.0;
    double std_error = 0.0;
    long n = 1;
    double ci_level = 0.95;
    double ci_low = 0.0;
    double ci_high = 0.0;

    /** Mean of n real-valued samples given their sum and sum of squares. */
    static EstimateWithCI from_samples(double sum, double sum_sq, long n) {
        EstimateWithCI e;
        e.n = n;
        e.value = sum / static_cast<double>(n);
        if (n > 1) {
            double var = (sum_sq - static_cast<double>(n) * e.value * e.value) /
                         static_cast<double>(n - 1);
            e.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
        }
        e.ci_low = e.value - kZ95 * e.std_error;
        e.ci_high = e.value + kZ95 * e.std_error;
        return e;
    }

    /** Proportion of successes out of n trials. */
    static EstimateWithCI from_binomial(long successes, long n) {
        EstimateWithCI e;
        e.n = n;
        const double nn = static_cast<double>(n);
        const double p = static_cast<double>(successes) / nn;
        e.value = p;
        e.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / nn);
        if (successes < 30 || n - successes < 30) {
            const double z2 = kZ95 * kZ95;
            const double denom = 1.0 + z2 / nn;
            const double centre = (p + z2 / (2.0 * nn)) / denom;
            const double half =
                kZ95 *
                std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
            e.ci_low = centre - half;
            e.ci_high = centre + half;
        } else {
            e.ci_low = p - kZ95 * e.std_error;
            e.ci_high = p + kZ95 * e.std_error;
        }
        e.ci_low = std::max(e.ci_low, 0.0);
        e.ci_high = std::min(e.ci_high, 1.0);
        return e;
    }
};

}  // namespace coxsat
