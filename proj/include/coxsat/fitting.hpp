#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "coxsat/analytic.hpp"
#include "coxsat/constellation.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/quadrature.hpp"
#include "coxsat/rng.hpp"

namespace coxsat {

/** Local visibility moments of a constellation at one observer latitude. */
struct LocalMoments {
    double mean_visible_sats = 0.0;
    double mean_visible_orbits = 0.0;  // orbits with at least one visible satellite
    double latitude = 0.0;             // [rad]
};

/**
 * Monte Carlo estimate of the local moments of a (usually deterministic)
 * constellation family: mean visible satellites and mean distinct orbits
 * holding at least one visible satellite, with the observer at the given
 * latitude and a uniformly random longitude each replicate.
 */
inline LocalMoments measure_local(
    const std::function<Constellation(std::uint64_t)>& build, double latitude,
    long replicates, std::uint64_t master_seed) {
    if (replicates < 1000)
        throw std::invalid_argument("measure_local: replicates must be >= 1000");
    double sat_sum = 0.0;
    double orbit_sum = 0.0;
    std::unordered_set<std::size_t> seen;
    for (long rep = 0; rep < replicates; ++rep) {
        const std::uint64_t rs =
            replicate_seed(master_seed, static_cast<std::uint64_t>(rep));
        const Constellation c = build(rs);
        RandomStream obs = RandomStream::keyed(rs, 0, stream_tag::observer);
        const double lon = obs.uniform(0.0, kTwoPi);
        const std::vector<VisibleSatellite> vis =
            visible_satellites(c, latitude, lon);
        sat_sum += static_cast<double>(vis.size());
        seen.clear();
        for (const VisibleSatellite& v : vis) seen.insert(v.orbit_index);
        orbit_sum += static_cast<double>(seen.size());
    }
    return {sat_sum / static_cast<double>(replicates),
            orbit_sum / static_cast<double>(replicates), latitude};
}

/**
 * Mean number of orbits carrying at least one visible satellite in the
 * random-orbit model; increases in both lambda and mu and is bounded by
 * lambda*sin(phi_bar), the mean number of orbits crossing the visible cap.
 */
inline double mean_occupied_orbits(const CoxParams& p, const GeometryParams& g,
                                   const QuadratureSpec& spec = {}) {
    return p.lambda * detail::cap_void_exponent(g.phi_bar, p.mu, spec);
}

/** Mean number of orbits crossing the visible cap, regardless of occupancy. */
inline double mean_crossing_orbits(double lambda, const GeometryParams& g) {
    return lambda * std::sin(g.phi_bar);
}

/** Outcome of a two-moment fit, with convergence diagnostics. */
struct FitResult {
    CoxParams params;
    LocalMoments target;
    int iterations = 0;
    double residual_orbits = 0.0;  // relative, occupied-orbit moment
    double residual_sats = 0.0;    // relative, visible-satellite moment
};

/**
 * Chooses (lambda, mu) so the random model reproduces the target's mean
 * visible-orbit and visible-satellite counts. Both moment maps are strictly
 * increasing, so each stage has a unique root: lambda is seeded from the
 * mu-independent cap-crossing moment (lambda*sin(phi_bar)), then the pair
 * is refined by fixed-point iteration on
 *   mu <- sats / (lambda * cap fraction), lambda <- orbits / A(mu),
 * where A(mu) is the occupied-orbit integral. A target with
 * orbits >= sats is unreachable (every occupied orbit carries at least one
 * visible satellite) and raises a diagnostic error.
 */
inline FitResult fit_cox(const LocalMoments& target, const GeometryParams& g,
                         const QuadratureSpec& spec = {}) {
    const double orbits = target.mean_visible_orbits;
    const double sats = target.mean_visible_sats;
    if (!(orbits > 0.0) || !(sats > 0.0))
        throw std::invalid_argument("fit_cox: target moments must be positive");
    if (orbits >= sats)
        throw std::invalid_argument(
            "fit_cox: unreachable target, mean visible orbits (" +
            std::to_string(orbits) + ") must be below mean visible satellites (" +
            std::to_string(sats) + ")");
    const double b = g.visible_cap_fraction();
    const double sphib = std::sin(g.phi_bar);

    FitResult r;
    r.target = target;
    double lambda = orbits / sphib;  // cap-crossing moment, mu-independent seed
    double mu = sats / (b * lambda);
    constexpr int kMaxIterations = 100;
    constexpr double kRelTol = 1e-6;
    for (int it = 1; it <= kMaxIterations; ++it) {
        const double a = detail::cap_void_exponent(g.phi_bar, mu, spec);
        const double lambda_next = orbits / a;
        const double mu_next = sats / (b * lambda_next);
        const double step = std::max(std::abs(lambda_next - lambda) / lambda,
                                     std::abs(mu_next - mu) / mu);
        lambda = lambda_next;
        mu = mu_next;
        r.iterations = it;
        if (step < kRelTol) break;
        if (it == kMaxIterations)
            throw std::runtime_error(
                "fit_cox: no convergence in 100 iterations; target orbit "
                "moment is too close to the satellite moment");
    }
    r.params = {lambda, mu};
    r.residual_orbits =
        (mean_occupied_orbits(r.params, g, spec) - orbits) / orbits;
    r.residual_sats = (r.params.lambda * r.params.mu * b - sats) / sats;
    return r;
}

}  // namespace coxsat
