#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace coxsat {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

/** Cartesian point; kilometres throughout the geometry layer. */
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
    Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

/**
 * Earth/orbit shell geometry and the visibility constants derived from it.
 *
 * r_s = r_e + r_a exactly; d_max is the horizon distance to the shell and
 * phi_bar the angular radius of the visibility cap seen from the shell
 * centre, cos(phi_bar) = r_e / r_s.
 */
struct GeometryParams {
    double r_e;      // Earth radius [km]
    double r_a;      // shell altitude above ground [km]
    double r_s;      // shell radius, r_e + r_a [km]
    double d_max;    // maximum distance to a visible shell point [km]
    double phi_bar;  // visibility cap angle [rad]

    static GeometryParams from_altitude(double r_e, double r_a) {
        if (!(r_e > 0.0) || !(r_a > 0.0))
            throw std::domain_error("GeometryParams: radii must be positive");
        GeometryParams g;
        g.r_e = r_e;
        g.r_a = r_a;
        g.r_s = r_e + r_a;
        g.d_max = std::sqrt(g.r_s * g.r_s - r_e * r_e);
        g.phi_bar = std::acos(r_e / g.r_s);
        return g;
    }

    /** Fraction of the shell surface visible from the ground: (1 - r_e/r_s)/2. */
    double visible_cap_fraction() const { return 0.5 * (1.0 - r_e / r_s); }
};

/**
 * Angular radius xi(d) of the spherical cap, centred at the observer axis,
 * containing exactly the shell points within distance d of the observer.
 * Monotone increasing from 0 at d = r_s - r_e to phi_bar at d = d_max.
 */
inline double cap_angle_of_distance(double d, const GeometryParams& g) {
    const double lo = g.r_s - g.r_e;
    const double slack = 1e-9 * g.r_s;
    if (d < lo - slack || d > g.d_max + slack)
        throw std::domain_error(
            "cap_angle_of_distance: d must lie in [" + std::to_string(lo) +
            ", " + std::to_string(g.d_max) + "] km, got " + std::to_string(d));
    double c = (g.r_s * g.r_s + g.r_e * g.r_e - d * d) / (2.0 * g.r_s * g.r_e);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return std::acos(c);
}

/**
 * Half-angle of the arc an orbit of inclination phi cuts out of a spherical
 * cap of angular radius xi centred on the polar axis. Returns 0 when the
 * orbit misses the cap (|phi - pi/2| >= xi), so integrals over all
 * inclinations need no case split. Full arc length is 2 * r_s * result.
 */
inline double orbit_cap_half_angle(double xi, double phi) {
    const double s = std::sin(phi);
    if (s <= 0.0) return 0.0;
    const double c = std::cos(xi);
    const double arg = 1.0 - (c * c) / (s * s);
    if (arg <= 0.0) return 0.0;
    return std::asin(std::sqrt(arg < 1.0 ? arg : 1.0));
}

/**
 * Unit vector of the point with orbital angle omega on the orbit
 * (theta, phi): the unit circle is inclined by phi about the node line,
 * then the node line is rotated to longitude theta about the polar axis.
 * Branch-safe for every omega; z = sin(omega) sin(phi) always holds.
 */
inline Point3 orbit_point_unit(double theta, double phi, double omega) {
    const double co = std::cos(omega), so = std::sin(omega);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double ct = std::cos(theta), st = std::sin(theta);
    return {co * ct - so * cp * st, co * st + so * cp * ct, so * sp};
}

/** Position on the shell of radius g.r_s; see orbit_point_unit. */
inline Point3 satellite_position(double theta, double phi, double omega,
                                 const GeometryParams& g) {
    Point3 u = orbit_point_unit(theta, phi, omega);
    return {g.r_s * u.x, g.r_s * u.y, g.r_s * u.z};
}

/**
 * Distance from the orbit point (phi, omega) to the reference observer at
 * (0, 0, r_e); independent of the orbit longitude theta.
 */
inline double distance_to_typical(double phi, double omega,
                                  const GeometryParams& g) {
    return std::sqrt(g.r_s * g.r_s -
                     2.0 * g.r_s * g.r_e * std::sin(omega) * std::sin(phi) +
                     g.r_e * g.r_e);
}

/**
 * For an orbit at co-latitude phi_colat = |pi/2 - phi| relative to the
 * observer axis: omega_2 is the half-angle of its visible arc, omega_1 the
 * half-angle of its arc within distance z (0 when the orbit stays farther
 * than z everywhere). Angles are measured from the point of the orbit
 * closest to the observer. Returns (0, 0) for orbits that are never visible.
 */
inline std::pair<double, double> interference_angle_bounds(
    double phi_colat, double z, const GeometryParams& g) {
    if (phi_colat >= g.phi_bar) return {0.0, 0.0};
    const double inclination = kHalfPi - phi_colat;
    const double omega2 = orbit_cap_half_angle(g.phi_bar, inclination);
    const double xi = cap_angle_of_distance(z, g);
    const double omega1 = orbit_cap_half_angle(xi, inclination);
    return {omega1, omega2};
}

/**
 * Chord distance from the observer at (0, 0, r_e) to the orbit point at
 * angular offset omega from the orbit's closest approach, for an orbit at
 * co-latitude phi_colat. Equals distance_to_typical at the corresponding
 * orbital angle.
 */
inline double chord_distance(double omega, double phi_colat,
                             const GeometryParams& g) {
    return std::sqrt(g.r_s * g.r_s -
                     2.0 * g.r_s * g.r_e * std::cos(omega) * std::cos(phi_colat) +
                     g.r_e * g.r_e);
}

/** Ground observer position at the given geodetic angles. */
inline Point3 observer_position(double latitude, double longitude,
                                const GeometryParams& g) {
    const double cl = std::cos(latitude);
    return {g.r_e * cl * std::cos(longitude), g.r_e * cl * std::sin(longitude),
            g.r_e * std::sin(latitude)};
}

/** Wraps an angle into [0, 2*pi). */
inline double wrap_two_pi(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace coxsat
