#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxsat/analytic.hpp"
#include "coxsat/constellation.hpp"
#include "coxsat/csvio.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/montecarlo.hpp"
#include "coxsat/quadrature.hpp"

namespace coxsat {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr double kBoltzmann = 1.380649e-23;  // [J/K]

/** Configuration or flag text that cannot be interpreted; maps to exit code 2. */
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("config: bad number for " + key + ": '" + v + "'");
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("config: bad integer for " + key + ": '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("config: bad seed for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("config: bad boolean for " + key + ": '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace detail

/**
 * Grid notation: "a:b:step" (inclusive sweep), a comma list "1,2,5", or a
 * single value. Empty text gives an empty grid.
 */
inline std::vector<double> parse_grid(const std::string& key, const std::string& text) {
    std::vector<double> out;
    const std::string t = detail::trim(text);
    if (t.empty()) return out;
    if (t.find(':') != std::string::npos) {
        const std::vector<std::string> parts = detail::split(t, ':');
        if (parts.size() != 3)
            throw ParseError("config: grid for " + key + " needs a:b:step, got '" + t + "'");
        const double a = detail::parse_double(key, parts[0]);
        const double b = detail::parse_double(key, parts[1]);
        const double step = detail::parse_double(key, parts[2]);
        if (!(step > 0.0) || b < a)
            throw ParseError("config: grid for " + key + " needs b >= a and step > 0");
        // Half-step slack keeps b itself inside despite rounding.
        for (double x = a; x <= b + 0.5 * step; x += step) out.push_back(x);
        return out;
    }
    for (const std::string& item : detail::split(t, ','))
        if (!item.empty()) out.push_back(detail::parse_double(key, item));
    return out;
}

/** Shell list notation: "PLANESxSATS/COCH@ALT:INC_DEG", comma separated. */
inline std::vector<ShellSpec> parse_shells(const std::string& text) {
    std::vector<ShellSpec> out;
    for (const std::string& item : detail::split(text, ',')) {
        if (item.empty()) continue;
        ShellSpec s;
        double alt = 0.0, inc_deg = 0.0;
        if (std::sscanf(item.c_str(), "%dx%d/%d@%lf:%lf", &s.planes,
                        &s.sats_per_plane, &s.co_channel_per_plane, &alt,
                        &inc_deg) != 5)
            throw ParseError(
                "config: bad shell '" + item +
                "', expected PLANESxSATS/COCH@ALT:INC_DEG like 28x120/30@525:43");
        s.altitude = alt;
        s.inclination = inc_deg * kPi / 180.0;
        if (s.planes < 1 || s.sats_per_plane < 1 || s.co_channel_per_plane < 1 ||
            s.co_channel_per_plane > s.sats_per_plane || !(s.altitude > 0.0))
            throw ParseError("config: inconsistent shell '" + item + "'");
        out.push_back(s);
    }
    if (out.empty()) throw ParseError("config: shells list is empty");
    return out;
}

/**
 * Flat key-value run configuration with one section per module. Flags
 * override file values override the defaults below; dB inputs are converted
 * to linear exactly once, in link().
 */
struct RunConfig {
    // [geometry]
    double r_e = 6371.0;
    double r_a = 550.0;
    // [model]
    std::string kind = "cox";  // cox|binomial|regular|walker|shells
    double lambda = 30.0;
    double mu = 30.0;
    long n = 100;  // binomial satellite count
    int n_orbits = 28;
    double inclination_deg = 53.0;
    int sats_per_orbit = 120;
    std::string shells =
        "28x120/30@525:43,28x120/30@530:53,28x120/30@535:33";
    // [link]
    double p_dbw = 30.0;
    double g_db = 20.0;
    double g_r_db = 0.0;
    double alpha = 2.0;
    int m = 1;
    double temperature_k = 290.0;
    double bandwidth_hz = 3.0e7;
    bool with_noise = false;
    // [run]
    std::string thresholds_db = "-10:20:1";
    std::string distances_km = "";  // empty: automatic span of the visible range
    std::string lambda_grid = "";   // empty: the single [model] lambda
    std::string mu_grid = "";
    long replicates = 10000;
    std::uint64_t seed = 1;
    double latitude_deg = 90.0;
    int threads = 1;
    std::string out = "";  // empty: stdout, no manifest
    std::string format = "csv";
    bool verify = false;
    std::string metric = "coverage";        // for the simulate command
    std::string sources = "analytic,mc";    // coverage columns
    bool rate = false;                      // coverage command: ergodic rate mode
    long curve_samples = 400;               // orbit-set draws for m > 1 curves
    // [quadrature]
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    int max_depth = 30;
    // [fit]
    long fit_replicates = 2000;
    double fit_altitude = 629.0;  // altitude of the fitted random model's shell
    bool fit_curves = false;      // also write side-by-side coverage curves

    bool operator==(const RunConfig&) const = default;

    /** Applies one "section.key" assignment; unknown keys are an error. */
    void apply(const std::string& key, const std::string& value) {
        using detail::parse_bool;
        using detail::parse_double;
        using detail::parse_long;
        using detail::parse_u64;
        if (key == "geometry.r_e") r_e = parse_double(key, value);
        else if (key == "geometry.r_a") r_a = parse_double(key, value);
        else if (key == "model.kind") kind = value;
        else if (key == "model.lambda") lambda = parse_double(key, value);
        else if (key == "model.mu") mu = parse_double(key, value);
        else if (key == "model.n") n = parse_long(key, value);
        else if (key == "model.n_orbits") n_orbits = static_cast<int>(parse_long(key, value));
        else if (key == "model.inclination_deg") inclination_deg = parse_double(key, value);
        else if (key == "model.sats_per_orbit") sats_per_orbit = static_cast<int>(parse_long(key, value));
        else if (key == "model.shells") shells = value;
        else if (key == "link.p_dbw") p_dbw = parse_double(key, value);
        else if (key == "link.g_db") g_db = parse_double(key, value);
        else if (key == "link.g_r_db") g_r_db = parse_double(key, value);
        else if (key == "link.alpha") alpha = parse_double(key, value);
        else if (key == "link.m") m = static_cast<int>(parse_long(key, value));
        else if (key == "link.temperature_k") temperature_k = parse_double(key, value);
        else if (key == "link.bandwidth_hz") bandwidth_hz = parse_double(key, value);
        else if (key == "link.with_noise") with_noise = parse_bool(key, value);
        else if (key == "run.thresholds_db") thresholds_db = value;
        else if (key == "run.distances_km") distances_km = value;
        else if (key == "run.lambda_grid") lambda_grid = value;
        else if (key == "run.mu_grid") mu_grid = value;
        else if (key == "run.replicates") replicates = parse_long(key, value);
        else if (key == "run.seed") seed = parse_u64(key, value);
        else if (key == "run.latitude_deg") latitude_deg = parse_double(key, value);
        else if (key == "run.threads") threads = static_cast<int>(parse_long(key, value));
        else if (key == "run.out") out = value;
        else if (key == "run.format") format = value;
        else if (key == "run.verify") verify = parse_bool(key, value);
        else if (key == "run.metric") metric = value;
        else if (key == "run.sources") sources = value;
        else if (key == "run.rate") rate = parse_bool(key, value);
        else if (key == "run.curve_samples") curve_samples = parse_long(key, value);
        else if (key == "quadrature.abs_tol") abs_tol = parse_double(key, value);
        else if (key == "quadrature.rel_tol") rel_tol = parse_double(key, value);
        else if (key == "quadrature.max_depth") max_depth = static_cast<int>(parse_long(key, value));
        else if (key == "fit.replicates") fit_replicates = parse_long(key, value);
        else if (key == "fit.altitude") fit_altitude = parse_double(key, value);
        else if (key == "fit.curves") fit_curves = parse_bool(key, value);
        else throw ParseError("config: unknown key '" + key + "'");
    }

    /** Parse-time validation of every module precondition the config feeds. */
    void validate() const {
        if (!(r_e > 0.0) || !(r_a > 0.0))
            throw ParseError("config: geometry radii must be positive");
        if (kind != "cox" && kind != "binomial" && kind != "regular" &&
            kind != "walker" && kind != "shells")
            throw ParseError("config: unknown model.kind '" + kind + "'");
        if (lambda < 0.0 || mu < 0.0)
            throw ParseError("config: lambda and mu must be >= 0");
        if (n < 0) throw ParseError("config: model.n must be >= 0");
        if (kind == "regular" || kind == "walker")
            if (n_orbits < 1 || sats_per_orbit < 1)
                throw ParseError("config: regular model needs n_orbits and sats_per_orbit >= 1");
        if (kind == "shells") parse_shells(shells);
        if (m < 1) throw ParseError("config: link.m must be an integer >= 1");
        if (!(alpha > 0.0)) throw ParseError("config: link.alpha must be positive");
        if (replicates < 1) throw ParseError("config: run.replicates must be >= 1");
        if (threads < 1) throw ParseError("config: run.threads must be >= 1");
        if (format != "csv" && format != "json")
            throw ParseError("config: run.format must be csv or json");
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1)
            throw ParseError("config: quadrature tolerances must be positive");
        if (fit_replicates < 1000)
            throw ParseError("config: fit.replicates must be >= 1000");
        if (!(fit_altitude > 0.0))
            throw ParseError("config: fit.altitude must be positive");
        if (curve_samples < 100)
            throw ParseError("config: run.curve_samples must be >= 100");
    }

    GeometryParams geometry() const { return GeometryParams::from_altitude(r_e, r_a); }

    LinkBudget link() const {
        return LinkBudget::from_db(p_dbw, g_db, g_r_db, alpha, m,
                                   kBoltzmann * temperature_k * bandwidth_hz,
                                   with_noise);
    }

    QuadratureSpec quadrature() const { return {abs_tol, rel_tol, max_depth}; }

    CoxParams cox() const { return {lambda, mu}; }

    SourceParams model() const {
        if (kind == "cox") return cox();
        if (kind == "binomial") return BinomialSpec{n};
        if (kind == "regular")
            return RegularSpec{n_orbits, inclination_deg * kPi / 180.0, sats_per_orbit};
        if (kind == "walker") return RegularSpec{n_orbits, kHalfPi, sats_per_orbit};
        if (kind == "shells") return parse_shells(shells);
        throw ParseError("config: unknown model.kind '" + kind + "'");
    }

    std::vector<double> thresholds() const {
        return parse_grid("run.thresholds_db", thresholds_db);
    }

    double latitude_rad() const { return latitude_deg * kPi / 180.0; }

    SimPlan plan() const {
        SimPlan p;
        p.model = model();
        p.geometry = geometry();
        p.link = link();
        p.thresholds_db = thresholds();
        p.replicates = replicates;
        p.master_seed = seed;
        p.observer_latitude = latitude_rad();
        p.threads = threads;
        return p;
    }
};

/**
 * Reads "[section]" headers and "key = value" lines; '#' and ';' start
 * comments. Returns the defaults overridden by the file's assignments.
 */
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("config line " + std::to_string(line_no) +
                                 ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw ParseError("config line " + std::to_string(line_no) +
                             ": key outside any [section]");
        base.apply(section + "." + key, value);
    }
    return base;
}

/** Serializes every field; parse_config of the result reproduces the config. */
inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    const auto num = [](double x) { return format_number_exact(x); };
    os << "[geometry]\n";
    os << "r_e = " << num(c.r_e) << "\n";
    os << "r_a = " << num(c.r_a) << "\n";
    os << "\n[model]\n";
    os << "kind = " << c.kind << "\n";
    os << "lambda = " << num(c.lambda) << "\n";
    os << "mu = " << num(c.mu) << "\n";
    os << "n = " << c.n << "\n";
    os << "n_orbits = " << c.n_orbits << "\n";
    os << "inclination_deg = " << num(c.inclination_deg) << "\n";
    os << "sats_per_orbit = " << c.sats_per_orbit << "\n";
    os << "shells = " << c.shells << "\n";
    os << "\n[link]\n";
    os << "p_dbw = " << num(c.p_dbw) << "\n";
    os << "g_db = " << num(c.g_db) << "\n";
    os << "g_r_db = " << num(c.g_r_db) << "\n";
    os << "alpha = " << num(c.alpha) << "\n";
    os << "m = " << c.m << "\n";
    os << "temperature_k = " << num(c.temperature_k) << "\n";
    os << "bandwidth_hz = " << num(c.bandwidth_hz) << "\n";
    os << "with_noise = " << (c.with_noise ? "true" : "false") << "\n";
    os << "\n[run]\n";
    os << "thresholds_db = " << c.thresholds_db << "\n";
    os << "distances_km = " << c.distances_km << "\n";
    os << "lambda_grid = " << c.lambda_grid << "\n";
    os << "mu_grid = " << c.mu_grid << "\n";
    os << "replicates = " << c.replicates << "\n";
    os << "seed = " << c.seed << "\n";
    os << "latitude_deg = " << num(c.latitude_deg) << "\n";
    os << "threads = " << c.threads << "\n";
    os << "out = " << c.out << "\n";
    os << "format = " << c.format << "\n";
    os << "verify = " << (c.verify ? "true" : "false") << "\n";
    os << "metric = " << c.metric << "\n";
    os << "sources = " << c.sources << "\n";
    os << "rate = " << (c.rate ? "true" : "false") << "\n";
    os << "curve_samples = " << c.curve_samples << "\n";
    os << "\n[quadrature]\n";
    os << "abs_tol = " << num(c.abs_tol) << "\n";
    os << "rel_tol = " << num(c.rel_tol) << "\n";
    os << "max_depth = " << c.max_depth << "\n";
    os << "\n[fit]\n";
    os << "replicates = " << c.fit_replicates << "\n";
    os << "altitude = " << num(c.fit_altitude) << "\n";
    os << "curves = " << (c.fit_curves ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace coxsat
