#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coxsat/constellation.hpp"
#include "coxsat/estimate.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/quadrature.hpp"
#include "coxsat/rng.hpp"

namespace coxsat {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/**
 * Link budget in linear units. p is the received power at 1 m from the
 * transmit antenna; g the aligned serving-link gain excess over interferers;
 * g_r the user antenna gain applied to every link; alpha the path-loss
 * exponent; m the (integer) fading shape, m = 1 being exponential power
 * fading. noise_power is the thermal noise kTB_w in watts and is only used
 * when with_noise is set.
 */
struct LinkBudget {
    double p = 1000.0;
    double g = 100.0;
    double g_r = 1.0;
    double alpha = 2.0;
    int m = 1;
    double noise_power = 0.0;
    bool with_noise = false;

    void validate() const {
        if (!(p > 0.0) || !(g > 0.0) || !(g_r > 0.0))
            throw std::invalid_argument("LinkBudget: powers and gains must be positive");
        if (!(alpha > 0.0))
            throw std::invalid_argument("LinkBudget: alpha must be positive");
        if (m < 1) throw std::invalid_argument("LinkBudget: m must be an integer >= 1");
        if (noise_power < 0.0)
            throw std::invalid_argument("LinkBudget: noise_power must be >= 0");
    }

    static LinkBudget from_db(double p_dbw, double g_db, double g_r_db,
                              double alpha, int m, double noise_power_w,
                              bool with_noise) {
        LinkBudget lb;
        lb.p = db_to_linear(p_dbw);
        lb.g = db_to_linear(g_db);
        lb.g_r = db_to_linear(g_r_db);
        lb.alpha = alpha;
        lb.m = m;
        lb.noise_power = noise_power_w;
        lb.with_noise = with_noise;
        lb.validate();
        return lb;
    }
};

/** Coverage values over a threshold grid; ci columns empty for exact evaluators. */
struct CoverageCurve {
    std::vector<double> thresholds;  // linear SIR
    std::vector<double> values;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
};

/** Mean number of satellites in the whole constellation. */
inline double mean_total(const CoxParams& p) { return p.lambda * p.mu; }

namespace detail {

/** Arc half-angle within the cap of angular radius xi for an orbit at co-latitude v. */
inline double half_arc(double xi, double v) {
    return orbit_cap_half_angle(xi, kHalfPi - v);
}

/**
 * sin of the inner-arc half-angle for a serving orbit at nu = xi(1 - t^2),
 * computed without the cancellation that the direct 1 - cos^2(xi)/cos^2(nu)
 * form suffers as t -> 0: cos^2(nu) - cos^2(xi) is expanded through
 * cos(nu) - cos(xi) = 2 sin((xi+nu)/2) sin((xi-nu)/2) with xi - nu = xi t^2
 * known exactly.
 */
inline double serving_arc_sine(double xi, double t) {
    const double nu = xi * (1.0 - t * t);
    const double cn = std::cos(nu);
    const double prod = 2.0 * std::sin(0.5 * (xi + nu)) *
                        std::sin(0.5 * xi * t * t) * (cn + std::cos(xi));
    return std::sqrt(prod > 0.0 ? prod : 0.0) / cn;
}

/**
 * Void-probability exponent of the cap of angular radius xi:
 * integral over co-latitudes v of cos(v) (1 - exp(-(mu/pi) arc(xi, v))).
 * The no-satellite probability of the cap is exp(-lambda * this).
 */
inline double cap_void_exponent(double xi, double mu, const QuadratureSpec& spec) {
    if (xi <= 0.0) return 0.0;
    return integrate(
        [&](double v) {
            return std::cos(v) *
                   (1.0 - std::exp(-(mu / kPi) * half_arc(xi, v)));
        },
        0.0, xi, spec);
}

}  // namespace detail

/**
 * Mean number of satellites above the horizon: lambda*mu/pi times the
 * integral over co-latitudes of cos(v) times the visible arc half-angle.
 */
inline double mean_visible(const CoxParams& p, const GeometryParams& g,
                           const QuadratureSpec& spec = {}) {
    const double integral = integrate(
        [&](double v) { return std::cos(v) * detail::half_arc(g.phi_bar, v); },
        0.0, g.phi_bar, spec);
    return p.lambda * p.mu * integral / kPi;
}

/** Probability that no satellite is visible from the reference observer. */
inline double nosat_probability(const CoxParams& p, const GeometryParams& g,
                                const QuadratureSpec& spec = {}) {
    return std::exp(-p.lambda * detail::cap_void_exponent(g.phi_bar, p.mu, spec));
}

/** Large-mu limit of nosat_probability: every cap-crossing orbit is occupied. */
inline double nosat_asymptotic(double lambda, const GeometryParams& g) {
    return std::exp(-lambda * std::sin(g.phi_bar));
}

/**
 * P(distance to nearest visible satellite > d): 1 below the sub-satellite
 * distance, the cap void probability of xi(d) in the visible range, and the
 * no-satellite probability from d_max on (D = infinity when nothing is
 * visible). Shares the exact code path with nosat_probability at d >= d_max.
 */
inline double nearest_ccdf(double d, const CoxParams& p, const GeometryParams& g,
                           const QuadratureSpec& spec = {}) {
    if (d < 0.0) throw std::domain_error("nearest_ccdf: d must be >= 0");
    if (d < g.r_s - g.r_e) return 1.0;
    const double xi = d >= g.d_max ? g.phi_bar : cap_angle_of_distance(d, g);
    return std::exp(-p.lambda * detail::cap_void_exponent(xi, p.mu, spec));
}

/**
 * SIR coverage probability P(SIR > tau) under exponential power fading
 * (m = 1) with nearest-satellite association. Evaluated as an integral over
 * the serving distance z of three factors: the probability that no other
 * orbit brings a satellite closer (split into orbits crossing/missing the
 * distance-z cap), and the serving-orbit term whose inverse-sine endpoint
 * singularity is removed by the substitution v = xi(z)(1 - t^2). All inner
 * integrals run one decade tighter than the outer tolerance.
 */
inline double coverage_rayleigh(double tau, const CoxParams& p,
                                const GeometryParams& g, const LinkBudget& lb,
                                const QuadratureSpec& spec = {}) {
    lb.validate();
    if (lb.m != 1)
        throw std::invalid_argument(
            "coverage_rayleigh: fading shape m must be 1; use coverage_nakagami");
    if (!(tau > 0.0))
        throw std::domain_error("coverage_rayleigh: tau must be positive");
    QuadratureSpec inner = spec;
    inner.abs_tol *= 0.1;
    inner.rel_tol *= 0.1;
    const double rs = g.r_s, re = g.r_e;
    const double half_alpha = 0.5 * lb.alpha;

    // Mean fraction of fading suppressed by the arc [w_lo, w_hi] of an orbit
    // at co-latitude v, against a serving link at distance z.
    auto arc_exponent = [&](double v, double z, double w_lo, double w_hi) {
        if (w_hi <= w_lo) return 0.0;
        const double cv = std::cos(v);
        return (p.mu / kPi) *
               integrate(
                   [&](double w) {
                       const double k2 =
                           rs * rs - 2.0 * rs * re * std::cos(w) * cv + re * re;
                       const double x =
                           tau * std::pow(z * z / k2, half_alpha) / lb.g;
                       return x / (1.0 + x);
                   },
                   w_lo, w_hi, inner);
    };

    auto z_integrand = [&](double z) {
        const double xi = cap_angle_of_distance(z, g);
        double far_orbits = 0.0;
        if (xi < g.phi_bar)
            far_orbits = integrate(
                [&](double v) {
                    const double w2 = detail::half_arc(g.phi_bar, v);
                    return (1.0 - std::exp(-arc_exponent(v, z, 0.0, w2))) *
                           std::cos(v);
                },
                xi, g.phi_bar, inner);
        const double near_orbits = integrate(
            [&](double v) {
                const double w1 = detail::half_arc(xi, v);
                const double w2 = detail::half_arc(g.phi_bar, v);
                return (1.0 - std::exp(-(p.mu / kPi) * w1 -
                                       arc_exponent(v, z, w1, w2))) *
                       std::cos(v);
            },
            0.0, xi, inner);
        const double serving = integrate(
            [&](double t) {
                const double nu = xi * (1.0 - t * t);
                const double s1 = detail::serving_arc_sine(xi, t);
                const double w1 = std::asin(s1 < 1.0 ? s1 : 1.0);
                const double w2 = detail::half_arc(g.phi_bar, nu);
                const double num = std::exp(-(p.mu / kPi) * w1 -
                                            arc_exponent(nu, z, w1, w2));
                return num * 2.0 * xi * t / (s1 > 1e-300 ? s1 : 1e-300);
            },
            0.0, 1.0, inner);
        return (p.lambda * p.mu * z / (kPi * rs * re)) *
               std::exp(-p.lambda * (far_orbits + near_orbits)) * serving;
    };

    const double val = integrate(z_integrand, rs - re, g.d_max, spec);
    return std::clamp(val, 0.0, 1.0);
}

namespace detail {

/**
 * Derivatives out[k] = d^k/dt^k (1 + t/m)^{-m} for k = 0..kmax: the Laplace
 * transform of unit-mean Gamma(m, 1/m) power fading and its derivatives.
 */
inline void fading_transform_derivs(double t, int m, int kmax, double* out) {
    const double inv = 1.0 / (1.0 + t / m);
    double pw = 1.0;
    for (int i = 0; i < m; ++i) pw *= inv;
    out[0] = pw;
    double coeff = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        pw *= inv;
        coeff *= -static_cast<double>(m + k - 1) / static_cast<double>(m);
        out[k] = coeff * pw;
    }
}

}  // namespace detail

/**
 * SIR coverage under integer-m Gamma power fading over a threshold grid,
 * sharing the sampled orbit sets across thresholds (estimates are
 * correlated, which keeps curve shapes consistent). For each sampled set of
 * cap-crossing orbit co-latitudes, the conditional coverage is evaluated
 * exactly: the conditional fading transform is exp(G(s)) with G a sum of
 * per-orbit arc integrals, its s-derivatives up to order m-1 come from the
 * product rule recursion on scaled derivatives s^j G^(j) (so no explicit
 * powers of s appear), and fixed Gauss nodes handle the arc, serving-orbit,
 * and distance integrals. Unbiased; uncertainty is the across-sample
 * standard error.
 */
inline std::vector<EstimateWithCI> coverage_nakagami_curve(
    const std::vector<double>& taus, const CoxParams& p, const GeometryParams& g,
    const LinkBudget& lb, int n_orbit_samples, std::uint64_t seed,
    const QuadratureSpec& spec = {}) {
    (void)spec;
    lb.validate();
    if (n_orbit_samples < 100)
        throw std::invalid_argument(
            "coverage_nakagami: n_orbit_samples must be at least 100");
    const int m = lb.m;
    const int nt = static_cast<int>(taus.size());
    const double rs = g.r_s, re = g.r_e;
    const double sphib = std::sin(g.phi_bar);
    const double half_alpha = 0.5 * lb.alpha;

    const GaussLegendre& glz = gauss_legendre_64();
    const GaussLegendre& gla = gauss_legendre_16();
    const int nz = static_cast<int>(glz.nodes().size());
    const int na = static_cast<int>(gla.nodes().size());
    const double zlo = rs - re, zhi = g.d_max;

    // Per-arc geometry cache: scaled path-gain ratios a_i = (z/K_i)^alpha / g
    // at the Gauss nodes of [w_lo, w_hi]; fading argument is t = m*tau*a_i.
    struct ArcCache {
        double half = 0.0;  // (w_hi - w_lo)/2
        std::vector<double> a;
    };
    auto make_arc = [&](double v, double w_lo, double w_hi, double z) {
        ArcCache arc;
        arc.half = 0.5 * (w_hi - w_lo);
        arc.a.resize(static_cast<std::size_t>(na));
        const double mid = 0.5 * (w_hi + w_lo);
        const double cv = std::cos(v);
        for (int i = 0; i < na; ++i) {
            const double w = arc.half * gla.nodes()[static_cast<std::size_t>(i)] + mid;
            const double k2 = rs * rs - 2.0 * rs * re * std::cos(w) * cv + re * re;
            arc.a[static_cast<std::size_t>(i)] =
                std::pow(z * z / k2, half_alpha) / lb.g;
        }
        return arc;
    };
    // Accumulate the arc's contribution to G(s) and to s^j G^(j)(s), j >= 1.
    std::vector<double> lh(static_cast<std::size_t>(m));
    auto accumulate_arc = [&](const ArcCache& arc, double mtau, double& g0,
                              std::vector<double>& gj) {
        const double scale = (p.mu / kPi) * arc.half;
        for (int i = 0; i < na; ++i) {
            const double t = mtau * arc.a[static_cast<std::size_t>(i)];
            detail::fading_transform_derivs(t, m, m - 1, lh.data());
            const double w = gla.weights()[static_cast<std::size_t>(i)];
            g0 -= scale * w * (1.0 - lh[0]);
            double tj = 1.0;
            for (int j = 1; j < m; ++j) {
                tj *= t;
                gj[static_cast<std::size_t>(j - 1)] +=
                    scale * w * tj * lh[static_cast<std::size_t>(j)];
            }
        }
    };

    RandomStream rng = RandomStream::keyed(seed, 0, stream_tag::orbit_set);
    std::vector<double> sum(static_cast<std::size_t>(nt), 0.0);
    std::vector<double> sum_sq(static_cast<std::size_t>(nt), 0.0);
    std::vector<double> draw_val(static_cast<std::size_t>(nt));
    std::vector<double> colats;
    std::vector<ArcCache> orbit_arcs;
    std::vector<double> g_base(static_cast<std::size_t>(m > 1 ? m - 1 : 0));
    std::vector<double> g_all(g_base.size());
    std::vector<double> e_bell(static_cast<std::size_t>(m));
    std::vector<double> binom(static_cast<std::size_t>(m), 1.0);

    struct ServingNode {
        double weight_geom = 0.0;  // Gauss weight * 2*xi*t / sin(w1)
        double w1 = 0.0;
        ArcCache arc;
    };
    std::vector<ServingNode> serving(static_cast<std::size_t>(na));

    for (int draw = 0; draw < n_orbit_samples; ++draw) {
        const long k_orbits = rng.poisson(p.lambda * sphib);
        colats.clear();
        for (long i = 0; i < k_orbits; ++i)
            colats.push_back(std::asin(rng.uniform() * sphib));
        std::fill(draw_val.begin(), draw_val.end(), 0.0);

        for (int iz = 0; iz < nz; ++iz) {
            const double z =
                0.5 * (zhi - zlo) * glz.nodes()[static_cast<std::size_t>(iz)] +
                0.5 * (zhi + zlo);
            const double wz =
                0.5 * (zhi - zlo) * glz.weights()[static_cast<std::size_t>(iz)];
            const double xi = cap_angle_of_distance(z, g);

            orbit_arcs.clear();
            double void_arc = 0.0;
            for (double v : colats) {
                const double w2 = detail::half_arc(g.phi_bar, v);
                if (v < xi) {
                    const double w1 = detail::half_arc(xi, v);
                    void_arc += w1;
                    orbit_arcs.push_back(make_arc(v, w1, w2, z));
                } else {
                    orbit_arcs.push_back(make_arc(v, 0.0, w2, z));
                }
            }
            const double void_factor = std::exp(-(p.mu / kPi) * void_arc);

            for (int i = 0; i < na; ++i) {
                const double t =
                    0.5 * (gla.nodes()[static_cast<std::size_t>(i)] + 1.0);
                const double nu = xi * (1.0 - t * t);
                const double s1 = detail::serving_arc_sine(xi, t);
                ServingNode& node = serving[static_cast<std::size_t>(i)];
                node.w1 = std::asin(s1 < 1.0 ? s1 : 1.0);
                node.weight_geom =
                    0.5 * gla.weights()[static_cast<std::size_t>(i)] * 2.0 * xi *
                    t / (s1 > 1e-300 ? s1 : 1e-300);
                node.arc =
                    make_arc(nu, node.w1, detail::half_arc(g.phi_bar, nu), z);
            }

            const double prefactor = wz * p.lambda * p.mu * z / (kPi * rs * re);
            for (int ti = 0; ti < nt; ++ti) {
                const double mtau = m * taus[static_cast<std::size_t>(ti)];
                double g0 = 0.0;
                std::fill(g_base.begin(), g_base.end(), 0.0);
                for (const ArcCache& arc : orbit_arcs)
                    accumulate_arc(arc, mtau, g0, g_base);
                double inner = 0.0;
                for (int i = 0; i < na; ++i) {
                    const ServingNode& node = serving[static_cast<std::size_t>(i)];
                    double gt0 = g0 - (p.mu / kPi) * node.w1;
                    std::copy(g_base.begin(), g_base.end(), g_all.begin());
                    accumulate_arc(node.arc, mtau, gt0, g_all);
                    // Product-rule recursion on scaled derivatives:
                    // E[k] = s^k d^k/ds^k exp(G(s)).
                    e_bell[0] = std::exp(gt0);
                    double val = e_bell[0];
                    double sign = 1.0, kfact = 1.0;
                    for (int k = 0; k + 1 < m; ++k) {
                        binom[0] = 1.0;
                        for (int j = 1; j <= k; ++j)
                            binom[static_cast<std::size_t>(j)] =
                                binom[static_cast<std::size_t>(j - 1)] *
                                static_cast<double>(k - j + 1) /
                                static_cast<double>(j);
                        double e_next = 0.0;
                        for (int j = 0; j <= k; ++j)
                            e_next += binom[static_cast<std::size_t>(j)] *
                                      g_all[static_cast<std::size_t>(j)] *
                                      e_bell[static_cast<std::size_t>(k - j)];
                        e_bell[static_cast<std::size_t>(k + 1)] = e_next;
                        sign = -sign;
                        kfact *= static_cast<double>(k + 1);
                        val += sign / kfact * e_next;
                    }
                    inner += node.weight_geom * val;
                }
                draw_val[static_cast<std::size_t>(ti)] +=
                    prefactor * void_factor * inner;
            }
        }
        for (int ti = 0; ti < nt; ++ti) {
            sum[static_cast<std::size_t>(ti)] += draw_val[static_cast<std::size_t>(ti)];
            sum_sq[static_cast<std::size_t>(ti)] +=
                draw_val[static_cast<std::size_t>(ti)] *
                draw_val[static_cast<std::size_t>(ti)];
        }
    }

    std::vector<EstimateWithCI> out;
    out.reserve(static_cast<std::size_t>(nt));
    for (int ti = 0; ti < nt; ++ti)
        out.push_back(EstimateWithCI::from_samples(
            sum[static_cast<std::size_t>(ti)], sum_sq[static_cast<std::size_t>(ti)],
            n_orbit_samples));
    return out;
}

/** Single-threshold convenience wrapper over coverage_nakagami_curve. */
inline EstimateWithCI coverage_nakagami(double tau, const CoxParams& p,
                                        const GeometryParams& g,
                                        const LinkBudget& lb,
                                        int n_orbit_samples, std::uint64_t seed,
                                        const QuadratureSpec& spec = {}) {
    return coverage_nakagami_curve({tau}, p, g, lb, n_orbit_samples, seed,
                                   spec)[0];
}

/**
 * SINR coverage with thermal noise: the exponential-fading coverage scaled
 * by the noise constant exp(-noise_power*tau/(p*g)).
 */
inline double coverage_with_noise(double tau, const CoxParams& p,
                                  const GeometryParams& g, const LinkBudget& lb,
                                  const QuadratureSpec& spec = {}) {
    lb.validate();
    if (lb.m != 1)
        throw std::invalid_argument(
            "coverage_with_noise: fading shape m must be 1; use coverage_nakagami");
    return std::exp(-lb.noise_power * tau / (lb.p * lb.g)) *
           coverage_rayleigh(tau, p, g, lb, spec);
}

/**
 * Mean spectral efficiency E[log2(1 + SINR)] as the integral over u of the
 * coverage at threshold 2^u - 1, summed window by window until a window
 * contributes less than max(abs_tol, rel_tol * total). A geometric
 * extrapolation of the remaining tail is written to tail_bound when given.
 */
inline double ergodic_rate(const CoxParams& p, const GeometryParams& g,
                           const LinkBudget& lb, const QuadratureSpec& spec = {},
                           double* tail_bound = nullptr) {
    lb.validate();
    if (lb.m != 1)
        throw std::invalid_argument("ergodic_rate: fading shape m must be 1");
    auto coverage_at = [&](double u) {
        const double tau = std::exp2(u) - 1.0;
        double c = coverage_rayleigh(tau, p, g, lb, spec);
        if (lb.with_noise)
            c *= std::exp(-lb.noise_power * tau / (lb.p * lb.g));
        return c;
    };
    constexpr int kMaxWindows = 64;
    double total = 0.0;
    double prev_window = 0.0;
    for (int k = 0; k < kMaxWindows; ++k) {
        const double window = integrate(coverage_at, static_cast<double>(k),
                                        static_cast<double>(k + 1), spec);
        total += window;
        if (window < std::max(spec.abs_tol, spec.rel_tol * total)) {
            if (tail_bound != nullptr) {
                double ratio = prev_window > 0.0 ? window / prev_window : 0.0;
                ratio = std::clamp(ratio, 0.0, 0.95);
                *tail_bound = window * ratio / (1.0 - ratio);
            }
            return total;
        }
        prev_window = window;
    }
    throw QuadratureError(total, prev_window);
}

}  // namespace coxsat
