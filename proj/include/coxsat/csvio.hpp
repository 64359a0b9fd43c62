#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "coxsat/constellation.hpp"
#include "coxsat/geometry.hpp"

namespace coxsat {

/** Formats a double compactly with enough digits for plotting and diffing. */
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/** Full-precision round-trip formatting, used where parse(print(x)) == x matters. */
inline std::string format_number_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/**
 * Column-oriented result table; cells are pre-formatted numbers or empty
 * strings for absent values. One table maps to one CSV or JSON document.
 */
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

/** UTF-8, comma-separated, header row, '.' decimal separator. */
inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const std::vector<std::string>& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

/** Same table as a JSON document; empty cells become null. */
inline void write_json(std::ostream& os, const Table& t) {
    os << "{\n  \"columns\": [";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? ", " : "") << '"' << t.columns[i] << '"';
    os << "],\n  \"rows\": [";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << (r ? ",\n    " : "\n    ") << "[";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            const std::string& cell = t.rows[r][i];
            os << (i ? ", " : "") << (cell.empty() ? "null" : cell);
        }
        os << "]";
    }
    os << (t.rows.empty() ? "]" : "\n  ]") << "\n}\n";
}

/**
 * Per-satellite snapshot of a constellation: one row per satellite with its
 * orbit's angles and the Cartesian position. Deterministic formatting, so
 * identical constellations serialize byte-identically.
 */
inline Table snapshot_table(const Constellation& c) {
    Table t;
    t.columns = {"orbit_id", "theta_rad", "phi_rad", "omega_rad",
                 "x_km",     "y_km",      "z_km"};
    for (std::size_t i = 0; i < c.orbits.size(); ++i) {
        const Orbit& o = c.orbits[i];
        for (double w : o.omegas) {
            const Point3 u = orbit_point_unit(o.theta, o.phi, w);
            t.add_row({std::to_string(i), format_number(o.theta),
                       format_number(o.phi), format_number(w),
                       format_number(o.r_s * u.x), format_number(o.r_s * u.y),
                       format_number(o.r_s * u.z)});
        }
    }
    return t;
}

/**
 * Canonical curve table: threshold_db, value, ci_low, ci_high. Pass empty
 * ci vectors for exact evaluators; those cells stay empty.
 */
inline Table curve_table(const std::vector<double>& thresholds_db,
                         const std::vector<double>& values,
                         const std::vector<double>& ci_low = {},
                         const std::vector<double>& ci_high = {}) {
    Table t;
    t.columns = {"threshold_db", "value", "ci_low", "ci_high"};
    for (std::size_t i = 0; i < thresholds_db.size(); ++i)
        t.add_row({format_number(thresholds_db[i]), format_number(values[i]),
                   i < ci_low.size() ? format_number(ci_low[i]) : std::string(),
                   i < ci_high.size() ? format_number(ci_high[i]) : std::string()});
    return t;
}

}  // namespace coxsat
