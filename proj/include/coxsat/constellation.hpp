#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "coxsat/geometry.hpp"
#include "coxsat/rng.hpp"

namespace coxsat {

/** Mean orbit count and mean satellites per orbit of the random model. */
struct CoxParams {
    double lambda = 0.0;  // mean number of orbits
    double mu = 0.0;      // mean satellites per orbit
};

struct BinomialSpec {
    long n = 0;  // exact satellite count, i.i.d. uniform on the shell
};

struct RegularSpec {
    int n_orbits = 0;
    double inclination = 0.0;  // [rad]
    int sats_per_orbit = 0;
};

/** One deterministic shell of a multi-shell plan, before frequency reuse. */
struct ShellSpec {
    int planes = 0;
    int sats_per_plane = 0;
    double altitude = 0.0;     // [km]
    double inclination = 0.0;  // [rad]
    int co_channel_per_plane = 0;  // satellites kept per plane after reuse
};

/**
 * One circular orbit: longitude of the ascending node theta in [0, pi),
 * inclination phi in [0, pi), satellites at orbital angles omegas in
 * [0, 2*pi). r_s is the orbit radius; it equals the constellation's shell
 * radius except in mixed-altitude builds.
 */
struct Orbit {
    double theta = 0.0;
    double phi = 0.0;
    double r_s = 0.0;
    std::vector<double> omegas;
};

enum class Provenance { cox, binomial, regular, walker, shells };

using SourceParams = std::variant<std::monostate, CoxParams, BinomialSpec,
                                  RegularSpec, std::vector<ShellSpec>>;

/**
 * Immutable point pattern on (one or more) orbital shells. geometry holds
 * the primary shell radius; orbits may override r_s (multi-shell builds),
 * which mixed_altitude() reports so single-radius evaluators can refuse.
 */
struct Constellation {
    GeometryParams geometry;
    std::vector<Orbit> orbits;
    Provenance provenance = Provenance::cox;
    SourceParams source;

    std::size_t total_satellites() const {
        std::size_t n = 0;
        for (const Orbit& o : orbits) n += o.omegas.size();
        return n;
    }

    bool mixed_altitude() const {
        for (const Orbit& o : orbits)
            if (o.r_s != geometry.r_s) return true;
        return false;
    }
};

/**
 * Random orbit/satellite process: orbit count ~ Poisson(lambda), longitudes
 * uniform on [0, pi), inclinations with density sin(phi)/2 on [0, pi)
 * (inverse CDF of (1 - cos x)/2), and per-orbit satellite counts
 * ~ Poisson(mu) at angles uniform on [0, 2*pi). Deterministic given seed.
 */
inline Constellation sample_cox(const CoxParams& p, const GeometryParams& g,
                                std::uint64_t seed) {
    RandomStream rng = RandomStream::keyed(seed, 0, stream_tag::constellation);
    Constellation c{g, {}, Provenance::cox, p};
    const long n_orbits = rng.poisson(p.lambda);
    c.orbits.reserve(static_cast<std::size_t>(n_orbits));
    for (long i = 0; i < n_orbits; ++i) {
        Orbit o;
        o.theta = rng.uniform(0.0, kPi);
        o.phi = std::acos(1.0 - 2.0 * rng.uniform());
        o.r_s = g.r_s;
        const long n_sats = rng.poisson(p.mu);
        o.omegas.reserve(static_cast<std::size_t>(n_sats));
        for (long j = 0; j < n_sats; ++j) o.omegas.push_back(rng.uniform(0.0, kTwoPi));
        c.orbits.push_back(std::move(o));
    }
    return c;
}

/**
 * Exactly n satellites i.i.d. uniform on the shell, each stored as a
 * one-satellite orbit so downstream code is model-agnostic. The point
 * (sqrt(1-v^2)cos(t), sqrt(1-v^2)sin(t), v) with v uniform on [-1, 1] and
 * t uniform on [0, 2*pi) is re-encoded as a polar orbit through it:
 * theta = t mod pi and omega chosen so orbit_point_unit reproduces it.
 */
inline Constellation sample_binomial(long n, const GeometryParams& g,
                                     std::uint64_t seed) {
    RandomStream rng = RandomStream::keyed(seed, 0, stream_tag::constellation);
    Constellation c{g, {}, Provenance::binomial, BinomialSpec{n}};
    c.orbits.reserve(static_cast<std::size_t>(n > 0 ? n : 0));
    for (long i = 0; i < n; ++i) {
        const double v = rng.uniform(-1.0, 1.0);
        const double t = rng.uniform(0.0, kTwoPi);
        const double h = std::sqrt(1.0 - v * v);
        // On a polar orbit (phi = pi/2): point = (cos w cos th, cos w sin th, sin w).
        // Longitudes live in [0, pi); points with t in [pi, 2*pi) sit on the
        // back half of the orbit at theta = t - pi, where cos w flips sign.
        double theta = t, sign = 1.0;
        if (theta >= kPi) {
            theta -= kPi;
            sign = -1.0;
        }
        Orbit o;
        o.theta = theta;
        o.phi = kHalfPi;
        o.r_s = g.r_s;
        o.omegas.push_back(wrap_two_pi(std::atan2(v, sign * h)));
        c.orbits.push_back(std::move(o));
    }
    return c;
}

/**
 * n_orbits planes at a common inclination, longitudes (i-1)*pi/N + U with a
 * single grid phase U ~ Uniform(0, pi/N), and sats_per_orbit satellites per
 * plane at 2*pi*j/S + V_i with an independent phase V_i ~ Uniform(0, 2*pi/S)
 * per plane.
 */
inline Constellation build_regular(int n_orbits, double inclination,
                                   int sats_per_orbit, const GeometryParams& g,
                                   std::uint64_t seed) {
    RandomStream rng = RandomStream::keyed(seed, 0, stream_tag::constellation);
    Constellation c{g, {}, Provenance::regular,
                    RegularSpec{n_orbits, inclination, sats_per_orbit}};
    const double grid_phase = rng.uniform(0.0, kPi / n_orbits);
    c.orbits.reserve(static_cast<std::size_t>(n_orbits));
    for (int i = 0; i < n_orbits; ++i) {
        Orbit o;
        o.theta = grid_phase + kPi * i / n_orbits;
        o.phi = inclination;
        o.r_s = g.r_s;
        const double orbit_phase = rng.uniform(0.0, kTwoPi / sats_per_orbit);
        o.omegas.reserve(static_cast<std::size_t>(sats_per_orbit));
        for (int j = 0; j < sats_per_orbit; ++j)
            o.omegas.push_back(wrap_two_pi(orbit_phase + kTwoPi * j / sats_per_orbit));
        c.orbits.push_back(std::move(o));
    }
    return c;
}

/** build_regular at inclination pi/2 (polar planes). */
inline Constellation build_walker(int n_orbits, int sats_per_orbit,
                                  const GeometryParams& g, std::uint64_t seed) {
    Constellation c = build_regular(n_orbits, kHalfPi, sats_per_orbit, g, seed);
    c.provenance = Provenance::walker;
    return c;
}

/**
 * Union of build_regular per shell, then evenly decimated to
 * co_channel_per_plane satellites per plane (every (S/C)-th slot, preserving
 * regular spacing). geometry reflects the first shell; orbits of other
 * shells carry their own r_s and mixed_altitude() reports the difference.
 */
inline Constellation build_shells(const std::vector<ShellSpec>& specs,
                                  double r_e, std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("build_shells: no shells");
    Constellation c{GeometryParams::from_altitude(r_e, specs.front().altitude),
                    {},
                    Provenance::shells,
                    specs};
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const ShellSpec& spec = specs[s];
        if (spec.co_channel_per_plane > spec.sats_per_plane)
            throw std::invalid_argument(
                "build_shells: co_channel_per_plane exceeds sats_per_plane");
        GeometryParams shell_geom = GeometryParams::from_altitude(r_e, spec.altitude);
        Constellation shell =
            build_regular(spec.planes, spec.inclination, spec.sats_per_plane,
                          shell_geom, mix64(seed + 0x9e3779b97f4a7c15ULL * (s + 1)));
        for (Orbit& o : shell.orbits) {
            if (spec.co_channel_per_plane < spec.sats_per_plane) {
                std::vector<double> kept;
                kept.reserve(static_cast<std::size_t>(spec.co_channel_per_plane));
                for (int k = 0; k < spec.co_channel_per_plane; ++k)
                    kept.push_back(
                        o.omegas[static_cast<std::size_t>(
                            static_cast<long>(k) * spec.sats_per_plane /
                            spec.co_channel_per_plane)]);
                o.omegas = std::move(kept);
            }
            c.orbits.push_back(std::move(o));
        }
    }
    return c;
}

/** One visible satellite as seen by a ground observer. */
struct VisibleSatellite {
    double distance = 0.0;  // [km]
    std::size_t orbit_index = 0;
    double omega = 0.0;
};

/**
 * All satellites above the observer's horizon, sorted by distance
 * ascending. A satellite on the shell of radius r is visible iff
 * dot(position, observer) >= r_e^2, equivalently distance <=
 * sqrt(r^2 - r_e^2); the per-orbit radius is honoured, so mixed-altitude
 * builds are handled. Longitude defaults to 0 and is irrelevant for
 * isotropic models.
 */
inline std::vector<VisibleSatellite> visible_satellites(
    const Constellation& c, double observer_latitude,
    double observer_longitude = 0.0) {
    const GeometryParams& g = c.geometry;
    const Point3 obs = observer_position(observer_latitude, observer_longitude, g);
    const double re2 = g.r_e * g.r_e;
    std::vector<VisibleSatellite> out;
    for (std::size_t i = 0; i < c.orbits.size(); ++i) {
        const Orbit& o = c.orbits[i];
        const double cp = std::cos(o.phi), sp = std::sin(o.phi);
        const double ct = std::cos(o.theta), st = std::sin(o.theta);
        // dot(position, obs) = a cos(omega) + b sin(omega), precomputed per orbit.
        const double a = o.r_s * (obs.x * ct + obs.y * st);
        const double b = o.r_s * (-obs.x * cp * st + obs.y * cp * ct + obs.z * sp);
        for (double w : o.omegas) {
            const double dot = a * std::cos(w) + b * std::sin(w);
            if (dot >= re2) {
                const double d2 = o.r_s * o.r_s - 2.0 * dot + re2;
                out.push_back({std::sqrt(d2 > 0.0 ? d2 : 0.0), i, w});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const VisibleSatellite& l, const VisibleSatellite& r) {
                  return l.distance < r.distance;
              });
    return out;
}

/** True iff any satellite is visible; early-exits without sorting. */
inline bool has_visible(const Constellation& c, double observer_latitude,
                        double observer_longitude = 0.0) {
    const GeometryParams& g = c.geometry;
    const Point3 obs = observer_position(observer_latitude, observer_longitude, g);
    const double re2 = g.r_e * g.r_e;
    for (const Orbit& o : c.orbits) {
        if (o.omegas.empty()) continue;
        const double cp = std::cos(o.phi), sp = std::sin(o.phi);
        const double ct = std::cos(o.theta), st = std::sin(o.theta);
        const double a = o.r_s * (obs.x * ct + obs.y * st);
        const double b = o.r_s * (-obs.x * cp * st + obs.y * cp * ct + obs.z * sp);
        // Skip orbits whose closest approach hypot(a, b) never clears the horizon.
        if (std::sqrt(a * a + b * b) < re2) continue;
        for (double w : o.omegas)
            if (a * std::cos(w) + b * std::sin(w) >= re2) return true;
    }
    return false;
}

/**
 * Distance to the nearest visible satellite, or nullopt when none is
 * visible (the no-satellite event).
 */
inline std::optional<double> nearest_distance(const Constellation& c,
                                              double observer_latitude,
                                              double observer_longitude = 0.0) {
    const GeometryParams& g = c.geometry;
    const Point3 obs = observer_position(observer_latitude, observer_longitude, g);
    const double re2 = g.r_e * g.r_e;
    double best_d2 = -1.0;
    for (const Orbit& o : c.orbits) {
        const double cp = std::cos(o.phi), sp = std::sin(o.phi);
        const double ct = std::cos(o.theta), st = std::sin(o.theta);
        const double a = o.r_s * (obs.x * ct + obs.y * st);
        const double b = o.r_s * (-obs.x * cp * st + obs.y * cp * ct + obs.z * sp);
        for (double w : o.omegas) {
            const double dot = a * std::cos(w) + b * std::sin(w);
            if (dot < re2) continue;
            const double d2 = o.r_s * o.r_s - 2.0 * dot + re2;
            if (best_d2 < 0.0 || d2 < best_d2) best_d2 = d2;
        }
    }
    if (best_d2 < 0.0) return std::nullopt;
    return std::sqrt(best_d2 > 0.0 ? best_d2 : 0.0);
}

}  // namespace coxsat
