#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coxsat/analytic.hpp"
#include "coxsat/constellation.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/montecarlo.hpp"

using namespace coxsat;

namespace {
const GeometryParams kShell = GeometryParams::from_altitude(6400.0, 550.0);
const double kNoiseWatts = 1.380649e-23 * 290.0 * 3.0e7;
const LinkBudget kLink =
    LinkBudget::from_db(30.0, 20.0, 0.0, 2.0, 1, kNoiseWatts, false);
const QuadratureSpec kLoose{1e-6, 1e-4, 30};
}  // namespace

TEST_CASE("mean visible count integrates to the closed cap-fraction form") {
    // Oracle: each satellite is visible with probability equal to the cap
    // area fraction, so the mean is lambda * mu * (1 - r_e/r_s) / 2.
    for (double altitude : {550.0, 1100.0, 35786.0}) {
        const GeometryParams g = GeometryParams::from_altitude(6371.0, altitude);
        const CoxParams p{40.0, 25.0};
        const double closed = p.lambda * p.mu * g.visible_cap_fraction();
        const QuadratureSpec tight{1e-12, 1e-11, 40};
        REQUIRE(mean_visible(p, g, tight) == Catch::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("no-visible probability: degenerate inputs and monotonicity") {
    REQUIRE(nosat_probability({0.0, 10.0}, kShell) == 1.0);
    REQUIRE(nosat_probability({10.0, 0.0}, kShell) == Catch::Approx(1.0).epsilon(1e-12));
    double prev = 1.0;
    for (double lam : {5.0, 10.0, 20.0, 40.0}) {
        const double v = nosat_probability({lam, 10.0}, kShell);
        REQUIRE(v > 0.0);
        REQUIRE(v < prev);
        prev = v;
    }
    prev = 1.0;
    for (double mu : {1.0, 3.0, 10.0, 30.0}) {
        const double v = nosat_probability({15.0, mu}, kShell);
        REQUIRE(v > 0.0);
        REQUIRE(v < prev);
        prev = v;
    }
}

TEST_CASE("no-visible probability matches direct constellation sampling") {
    const CoxParams p{10.0, 10.0};
    const double analytic = nosat_probability(p, kShell);
    const long n = 200000;
    long empty = 0;
    for (long s = 0; s < n; ++s)
        if (!has_visible(sample_cox(p, kShell, static_cast<std::uint64_t>(s)),
                         kHalfPi, 0.0))
            ++empty;
    const double empirical = static_cast<double>(empty) / static_cast<double>(n);
    const double sigma = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n));
    CAPTURE(analytic, empirical);
    REQUIRE(std::abs(empirical - analytic) <= 3.0 * sigma);
}

TEST_CASE("dense orbits saturate the no-visible probability at its floor") {
    const double lambda = 7.0;
    const double floor = nosat_asymptotic(lambda, kShell);
    // The void probability can never undercut the no-crossing probability.
    for (double mu : {1.0, 10.0, 100.0})
        REQUIRE(nosat_probability({lambda, mu}, kShell) >= floor);
    REQUIRE(nosat_probability({lambda, 1e4}, kShell) ==
            Catch::Approx(floor).epsilon(0.005));
}

TEST_CASE("nearest-distance CCDF has the right shape and joins") {
    const CoxParams p{20.0, 10.0};
    const double lo = kShell.r_s - kShell.r_e;
    REQUIRE(nearest_ccdf(0.0, p, kShell) == 1.0);
    REQUIRE(nearest_ccdf(0.5 * lo, p, kShell) == 1.0);
    // Continuous at the near edge: first satellites are directly overhead.
    REQUIRE(nearest_ccdf(lo + 1e-6, p, kShell) == Catch::Approx(1.0).margin(1e-5));
    // Beyond the horizon the CCDF is exactly the no-visible probability,
    // through the same code path, so equality is exact.
    const double at_void = nosat_probability(p, kShell);
    REQUIRE(nearest_ccdf(kShell.d_max, p, kShell) ==
            Catch::Approx(at_void).epsilon(1e-12));
    REQUIRE(nearest_ccdf(kShell.d_max + 500.0, p, kShell) == at_void);
    REQUIRE(nearest_ccdf(1e9, p, kShell) == at_void);
    // Continuity just below the horizon and monotone decrease across it.
    REQUIRE(nearest_ccdf(kShell.d_max - 1e-6, p, kShell) ==
            Catch::Approx(at_void).margin(1e-5));
    double prev = 1.0;
    for (double d = lo; d <= kShell.d_max; d += (kShell.d_max - lo) / 40.0) {
        const double v = nearest_ccdf(d, p, kShell);
        REQUIRE(v <= prev + 1e-12);
        prev = v;
    }
    REQUIRE_THROWS_AS(nearest_ccdf(-1.0, p, kShell), std::domain_error);
}

TEST_CASE("nearest-distance CCDF matches direct nearest-distance sampling") {
    const CoxParams p{20.0, 10.0};
    const long n = 100000;
    const std::vector<double> ds{700.0, 1000.0, 1500.0, 2200.0};
    std::vector<long> beyond(ds.size(), 0);
    for (long s = 0; s < n; ++s) {
        const auto nearest = nearest_distance(
            sample_cox(p, kShell, static_cast<std::uint64_t>(s)), kHalfPi, 0.0);
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (!nearest.has_value() || *nearest > ds[i]) ++beyond[i];
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double analytic = nearest_ccdf(ds[i], p, kShell);
        const double empirical =
            static_cast<double>(beyond[i]) / static_cast<double>(n);
        const double sigma =
            std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n));
        CAPTURE(ds[i], analytic, empirical);
        REQUIRE(std::abs(empirical - analytic) <= 3.0 * sigma);
    }
}

TEST_CASE("coverage at a vanishing threshold approaches visibility") {
    const CoxParams p{30.0, 30.0};
    const double visibility = 1.0 - nosat_probability(p, kShell);
    const double cov = coverage_rayleigh(1e-9, p, kShell, kLink, kLoose);
    REQUIRE(cov == Catch::Approx(visibility).margin(1e-4));
}

TEST_CASE("coverage is a proper CCDF of the threshold") {
    const CoxParams p{30.0, 30.0};
    double prev = 1.0;
    for (double tau_db = -10.0; tau_db <= 20.0; tau_db += 5.0) {
        const double v =
            coverage_rayleigh(db_to_linear(tau_db), p, kShell, kLink, kLoose);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= prev + 1e-9);
        prev = v;
    }
    REQUIRE_THROWS_AS(coverage_rayleigh(0.0, p, kShell, kLink), std::domain_error);
    LinkBudget m2 = kLink;
    m2.m = 2;
    REQUIRE_THROWS_AS(coverage_rayleigh(1.0, p, kShell, m2),
                      std::invalid_argument);
}

TEST_CASE("coverage matches Monte Carlo downlinks at the benchmark point") {
    const CoxParams p{30.0, 30.0};
    SimPlan plan;
    plan.model = p;
    plan.geometry = kShell;
    plan.link = kLink;
    plan.thresholds_db = {0.0, 6.0};
    plan.replicates = 20000;
    plan.master_seed = 91;
    const CoverageCurve mc = run_sinr_ccdf(plan);
    for (std::size_t i = 0; i < plan.thresholds_db.size(); ++i) {
        const double analytic = coverage_rayleigh(
            db_to_linear(plan.thresholds_db[i]), p, kShell, kLink, kLoose);
        const double sigma = (mc.ci_high[i] - mc.ci_low[i]) / (2.0 * EstimateWithCI::kZ95);
        CAPTURE(plan.thresholds_db[i], analytic, mc.values[i]);
        REQUIRE(std::abs(analytic - mc.values[i]) <= 3.0 * sigma + 1e-3);
    }
}

TEST_CASE("noise multiplies coverage by the serving-link noise factor") {
    const CoxParams p{30.0, 30.0};
    LinkBudget noisy = kLink;
    noisy.with_noise = true;
    for (double tau : {0.5, 1.0, 4.0}) {
        const double base = coverage_rayleigh(tau, p, kShell, kLink, kLoose);
        const double with_n = coverage_with_noise(tau, p, kShell, noisy, kLoose);
        REQUIRE(with_n ==
                Catch::Approx(std::exp(-noisy.noise_power * tau /
                                       (noisy.p * noisy.g)) *
                              base)
                    .epsilon(1e-12));
        REQUIRE(with_n <= base);
    }
    LinkBudget m3 = kLink;
    m3.m = 3;
    REQUIRE_THROWS_AS(coverage_with_noise(1.0, p, kShell, m3),
                      std::invalid_argument);
}

TEST_CASE("fading-transform derivatives match central finite differences") {
    // Oracle: difference quotients of the transform itself.
    const auto transform = [](double t, int m) {
        return std::pow(1.0 + t / m, -m);
    };
    for (int m : {1, 2, 3, 5}) {
        for (double t : {0.05, 0.7, 3.0}) {
            double derivs[5];
            detail::fading_transform_derivs(t, m, 4, derivs);
            REQUIRE(derivs[0] == Catch::Approx(transform(t, m)).epsilon(1e-12));
            const double h = 1e-3;
            double fd1 = (transform(t + h, m) - transform(t - h, m)) / (2.0 * h);
            double fd2 = (transform(t + h, m) - 2.0 * transform(t, m) +
                          transform(t - h, m)) /
                         (h * h);
            REQUIRE(derivs[1] == Catch::Approx(fd1).epsilon(1e-5));
            REQUIRE(derivs[2] == Catch::Approx(fd2).epsilon(1e-4));
            // Sign alternation of a completely monotone transform.
            for (int k = 0; k <= 4; ++k)
                REQUIRE(derivs[k] * (k % 2 == 0 ? 1.0 : -1.0) > 0.0);
        }
    }
}

TEST_CASE("the general-fading evaluator agrees with the exact m = 1 formula") {
    const CoxParams p{30.0, 30.0};
    const double tau = db_to_linear(0.0);
    const double exact = coverage_rayleigh(tau, p, kShell, kLink, kLoose);
    const EstimateWithCI hybrid =
        coverage_nakagami_curve({tau}, p, kShell, kLink, 800, 17)[0];
    CAPTURE(exact, hybrid.value, hybrid.std_error);
    REQUIRE(std::abs(hybrid.value - exact) <=
            3.0 * hybrid.std_error + 0.005);
    REQUIRE_THROWS_AS(coverage_nakagami_curve({tau}, p, kShell, kLink, 50, 1),
                      std::invalid_argument);
}

TEST_CASE("general-fading coverage agrees with gamma-fading Monte Carlo") {
    // Oracle: simulated downlinks with the same gamma fading law.
    LinkBudget m3 = kLink;
    m3.m = 3;
    const CoxParams p{5.0, 5.0};
    const double tau = db_to_linear(0.0);
    const EstimateWithCI c3 =
        coverage_nakagami_curve({tau}, p, kShell, m3, 800, 3)[0];
    REQUIRE(c3.ci_low <= c3.value);
    REQUIRE(c3.ci_high >= c3.value);

    SimPlan plan;
    plan.model = p;
    plan.geometry = kShell;
    plan.link = m3;
    plan.thresholds_db = {0.0};
    plan.replicates = 40000;
    plan.master_seed = 23;
    const CoverageCurve mc = run_sinr_ccdf(plan);
    const double sigma_mc = (mc.ci_high[0] - mc.ci_low[0]) / (2.0 * EstimateWithCI::kZ95);
    const double sigma = std::sqrt(sigma_mc * sigma_mc +
                                   c3.std_error * c3.std_error);
    CAPTURE(c3.value, c3.std_error, mc.values[0], sigma_mc);
    REQUIRE(std::abs(c3.value - mc.values[0]) <= 3.0 * sigma + 0.002);
}

TEST_CASE("ergodic rate equals a trapezoid quadrature of the coverage") {
    const CoxParams p{30.0, 30.0};
    double tail = 0.0;
    const double rate = ergodic_rate(p, kShell, kLink, kLoose, &tail);

    const double h = 0.1;
    double trapezoid = 0.0;
    double prev = 1.0 - nosat_probability(p, kShell);  // coverage at u = 0
    for (double u = h; u < 40.0; u += h) {
        const double c = coverage_rayleigh(std::exp2(u) - 1.0, p, kShell,
                                           kLink, kLoose);
        trapezoid += 0.5 * h * (prev + c);
        prev = c;
        if (c < 1e-10) break;
    }
    CAPTURE(rate, trapezoid, tail);
    REQUIRE(rate == Catch::Approx(trapezoid).epsilon(0.005));
    REQUIRE(tail >= 0.0);
    REQUIRE(tail < 0.01 * rate);

    LinkBudget m2 = kLink;
    m2.m = 2;
    REQUIRE_THROWS_AS(ergodic_rate(p, kShell, m2), std::invalid_argument);
}

TEST_CASE("noise can only reduce the ergodic rate") {
    const CoxParams p{30.0, 30.0};
    LinkBudget noisy = kLink;
    noisy.with_noise = true;
    const double without = ergodic_rate(p, kShell, kLink, kLoose);
    const double with_n = ergodic_rate(p, kShell, noisy, kLoose);
    REQUIRE(with_n <= without);
    REQUIRE(with_n > 0.0);
}

TEST_CASE("link budgets convert decibel inputs once and validate") {
    REQUIRE(kLink.p == Catch::Approx(1000.0).epsilon(1e-12));
    REQUIRE(kLink.g == Catch::Approx(100.0).epsilon(1e-12));
    REQUIRE(kLink.g_r == 1.0);
    REQUIRE(db_to_linear(linear_to_db(123.456)) ==
            Catch::Approx(123.456).epsilon(1e-12));
    REQUIRE_THROWS_AS(LinkBudget::from_db(30, 20, 0, -2.0, 1, 0.0, false),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(LinkBudget::from_db(30, 20, 0, 2.0, 0, 0.0, false),
                      std::invalid_argument);
}
