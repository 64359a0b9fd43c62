#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coxsat/analytic.hpp"
#include "coxsat/config.hpp"
#include "coxsat/constellation.hpp"
#include "coxsat/csvio.hpp"
#include "coxsat/estimate.hpp"
#include "coxsat/fitting.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/montecarlo.hpp"

namespace coxsat {

namespace detail {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/**
 * Agreement check between an exact value and a sampled estimate. The scale
 * is the larger of the standard error and the CI half-width (which stays
 * positive for boundary proportions where the plug-in standard error is 0).
 */
inline bool within_three_sigma(double exact, const EstimateWithCI& e,
                               double slack = 0.0) {
    const double sigma =
        std::max(e.std_error, (e.ci_high - e.ci_low) / (2.0 * EstimateWithCI::kZ95));
    return std::abs(exact - e.value) <= 3.0 * sigma + slack + 1e-12;
}

}  // namespace detail

/** Lambda sweep for grid commands: the grid when given, else the point value. */
inline std::vector<double> lambda_values(const RunConfig& cfg) {
    std::vector<double> v = parse_grid("run.lambda_grid", cfg.lambda_grid);
    if (v.empty()) v.push_back(cfg.lambda);
    return v;
}

inline std::vector<double> mu_values(const RunConfig& cfg) {
    std::vector<double> v = parse_grid("run.mu_grid", cfg.mu_grid);
    if (v.empty()) v.push_back(cfg.mu);
    return v;
}

/** Distance grid; by default 61 points spanning the visible range. */
inline std::vector<double> distance_values(const RunConfig& cfg,
                                           const GeometryParams& g) {
    const std::string t = detail::trim(cfg.distances_km);
    if (t.empty() || t == "auto")
        return detail::linspace(g.r_s - g.r_e, g.d_max, 61);
    return parse_grid("run.distances_km", t);
}

/** SimPlan with everything but the model and threshold grid filled in. */
inline SimPlan base_plan(const RunConfig& cfg, const GeometryParams& g) {
    SimPlan p;
    p.geometry = g;
    p.link = cfg.link();
    p.replicates = cfg.replicates;
    p.master_seed = cfg.seed;
    p.observer_latitude = cfg.latitude_rad();
    p.threads = cfg.threads;
    return p;
}

/** Renders a table in the configured output format. */
inline std::string render(const RunConfig& cfg, const Table& t) {
    std::ostringstream os;
    if (cfg.format == "json")
        write_json(os, t);
    else
        write_csv(os, t);
    return os.str();
}

/**
 * Writes one output file plus the "<path>.manifest.json" needed to reproduce
 * it: the full serialized configuration, the command, seed, replicate count,
 * tool version, and wall time.
 */
inline void write_output_file(const RunConfig& cfg, const std::string& command,
                              const std::string& path, const std::string& body,
                              double wall_seconds) {
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file " + path);
        f << body;
    }
    nlohmann::json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["seed"] = cfg.seed;
    manifest["replicates"] = cfg.replicates;
    manifest["wall_time_seconds"] = wall_seconds;
    manifest["config"] = serialize_config(cfg);
    std::ofstream mf(path + ".manifest.json", std::ios::binary);
    if (!mf)
        throw std::runtime_error("cannot open manifest file " + path +
                                 ".manifest.json");
    mf << manifest.dump(2) << "\n";
}

/** Emits a finished document to stdout, or to cfg.out with its manifest. */
inline void emit_document(const RunConfig& cfg, const std::string& command,
                          const std::string& body, double wall_seconds) {
    if (cfg.out.empty())
        std::cout << body;
    else
        write_output_file(cfg, command, cfg.out, body, wall_seconds);
}

/** Self-check failure: report which row disagreed and fail the run. */
inline int verify_failure(const std::string& command, const std::string& row) {
    std::cerr << command << ": verification failed, analytic and empirical "
              << "values disagree beyond 3 sigma at " << row << "\n";
    return 1;
}

/** No-visible-satellite probability over the (lambda, mu) grid. */
inline int cmd_nosat(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const GeometryParams g = cfg.geometry();
    const QuadratureSpec quad = cfg.quadrature();
    Table t;
    t.columns = {"lambda", "mu", "analytic", "empirical", "ci_low", "ci_high"};
    std::string bad_row;
    for (double lam : lambda_values(cfg)) {
        for (double mu : mu_values(cfg)) {
            const CoxParams p{lam, mu};
            const double analytic = nosat_probability(p, g, quad);
            SimPlan plan = base_plan(cfg, g);
            plan.model = p;
            const EstimateWithCI e = run_nosat(plan);
            t.add_row({format_number(lam), format_number(mu),
                       format_number(analytic), format_number(e.value),
                       format_number(e.ci_low), format_number(e.ci_high)});
            if (cfg.verify && bad_row.empty() &&
                !detail::within_three_sigma(analytic, e))
                bad_row = "lambda=" + format_number(lam) +
                          " mu=" + format_number(mu);
        }
    }
    emit_document(cfg, "nosat", render(cfg, t), timer.seconds());
    if (!bad_row.empty()) return verify_failure("nosat", bad_row);
    return 0;
}

/** Mean visible-satellite count over the (lambda, mu) grid. */
inline int cmd_mean_visible(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const GeometryParams g = cfg.geometry();
    const QuadratureSpec quad = cfg.quadrature();
    Table t;
    t.columns = {"lambda", "mu", "analytic", "empirical", "ci_low", "ci_high"};
    std::string bad_row;
    for (double lam : lambda_values(cfg)) {
        for (double mu : mu_values(cfg)) {
            const CoxParams p{lam, mu};
            const double analytic = mean_visible(p, g, quad);
            SimPlan plan = base_plan(cfg, g);
            plan.model = p;
            const EstimateWithCI e = run_mean_visible(plan);
            t.add_row({format_number(lam), format_number(mu),
                       format_number(analytic), format_number(e.value),
                       format_number(e.ci_low), format_number(e.ci_high)});
            if (cfg.verify && bad_row.empty() &&
                !detail::within_three_sigma(analytic, e))
                bad_row = "lambda=" + format_number(lam) +
                          " mu=" + format_number(mu);
        }
    }
    emit_document(cfg, "mean-visible", render(cfg, t), timer.seconds());
    if (!bad_row.empty()) return verify_failure("mean-visible", bad_row);
    return 0;
}

/** Nearest visible-satellite distance CCDF over the distance grid. */
inline int cmd_nearest_ccdf(const RunConfig& cfg) {
    detail::Stopwatch timer;
    if (cfg.kind != "cox")
        throw ParseError(
            "nearest-ccdf: analytic column requires model.kind = cox; use the "
            "simulate command for other models");
    const GeometryParams g = cfg.geometry();
    const QuadratureSpec quad = cfg.quadrature();
    const CoxParams p = cfg.cox();
    const std::vector<double> ds = distance_values(cfg, g);
    SimPlan plan = base_plan(cfg, g);
    plan.model = p;
    const std::vector<EstimateWithCI> emp = run_nearest_ccdf(plan, ds);
    Table t;
    t.columns = {"distance_km", "analytic", "empirical", "ci_low", "ci_high"};
    std::string bad_row;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double analytic = nearest_ccdf(ds[i], p, g, quad);
        t.add_row({format_number(ds[i]), format_number(analytic),
                   format_number(emp[i].value), format_number(emp[i].ci_low),
                   format_number(emp[i].ci_high)});
        if (cfg.verify && bad_row.empty() &&
            !detail::within_three_sigma(analytic, emp[i]))
            bad_row = "distance_km=" + format_number(ds[i]);
    }
    emit_document(cfg, "nearest-ccdf", render(cfg, t), timer.seconds());
    if (!bad_row.empty()) return verify_failure("nearest-ccdf", bad_row);
    return 0;
}

namespace detail {

struct SourceSelection {
    bool analytic = false;
    bool mc = false;
};

inline SourceSelection parse_sources(const std::string& text) {
    SourceSelection s;
    for (const std::string& item : split(text, ',')) {
        if (item.empty()) continue;
        if (item == "analytic")
            s.analytic = true;
        else if (item == "mc")
            s.mc = true;
        else
            throw ParseError("run.sources: unknown source '" + item +
                             "', expected analytic and/or mc");
    }
    if (!s.analytic && !s.mc)
        throw ParseError("run.sources: at least one of analytic, mc required");
    return s;
}

}  // namespace detail

inline int cmd_rate(const RunConfig& cfg);

/** SIR/SINR coverage curve, analytic and/or Monte Carlo columns. */
inline int cmd_coverage(const RunConfig& cfg) {
    if (cfg.rate) return cmd_rate(cfg);
    detail::Stopwatch timer;
    const std::vector<double> thresholds_db = cfg.thresholds();
    if (thresholds_db.empty())
        throw ParseError("coverage: empty threshold grid");
    if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end()))
        throw ParseError("coverage: thresholds must be ascending");
    const detail::SourceSelection sources = detail::parse_sources(cfg.sources);
    if (sources.analytic && cfg.kind != "cox")
        throw ParseError(
            "coverage: the analytic source applies to model.kind = cox only; "
            "pass --sources mc for deterministic constellations");
    if (sources.analytic && cfg.with_noise && cfg.m != 1)
        throw ParseError(
            "coverage: noise-aware analytic coverage requires m = 1");

    const GeometryParams g = cfg.geometry();
    const LinkBudget lb = cfg.link();
    const QuadratureSpec quad = cfg.quadrature();
    std::vector<double> taus;
    taus.reserve(thresholds_db.size());
    for (double x : thresholds_db) taus.push_back(db_to_linear(x));

    std::vector<double> a_val, a_lo, a_hi;
    if (sources.analytic) {
        const CoxParams p = cfg.cox();
        if (cfg.m == 1) {
            for (double tau : taus)
                a_val.push_back(cfg.with_noise
                                    ? coverage_with_noise(tau, p, g, lb, quad)
                                    : coverage_rayleigh(tau, p, g, lb, quad));
        } else {
            const std::vector<EstimateWithCI> ests = coverage_nakagami_curve(
                taus, p, g, lb, static_cast<int>(cfg.curve_samples), cfg.seed,
                quad);
            for (const EstimateWithCI& e : ests) {
                a_val.push_back(e.value);
                a_lo.push_back(e.ci_low);
                a_hi.push_back(e.ci_high);
            }
        }
    }

    CoverageCurve mc;
    if (sources.mc) {
        SimPlan plan = base_plan(cfg, g);
        plan.model = cfg.model();
        plan.thresholds_db = thresholds_db;
        mc = run_sinr_ccdf(plan);
    }

    Table t;
    std::string bad_row;
    if (sources.analytic && sources.mc) {
        t.columns = {"threshold_db", "analytic", "analytic_ci_low",
                     "analytic_ci_high", "mc", "mc_ci_low", "mc_ci_high"};
        for (std::size_t i = 0; i < thresholds_db.size(); ++i) {
            t.add_row({format_number(thresholds_db[i]), format_number(a_val[i]),
                       i < a_lo.size() ? format_number(a_lo[i]) : std::string(),
                       i < a_hi.size() ? format_number(a_hi[i]) : std::string(),
                       format_number(mc.values[i]), format_number(mc.ci_low[i]),
                       format_number(mc.ci_high[i])});
            if (cfg.verify && bad_row.empty()) {
                EstimateWithCI e;
                e.value = mc.values[i];
                e.ci_low = mc.ci_low[i];
                e.ci_high = mc.ci_high[i];
                const double slack =
                    i < a_hi.size() ? 0.5 * (a_hi[i] - a_lo[i]) : 0.0;
                if (!detail::within_three_sigma(a_val[i], e, slack))
                    bad_row = "threshold_db=" + format_number(thresholds_db[i]);
            }
        }
    } else if (sources.analytic) {
        t = curve_table(thresholds_db, a_val, a_lo, a_hi);
    } else {
        t = curve_table(thresholds_db, mc.values, mc.ci_low, mc.ci_high);
    }
    emit_document(cfg, "coverage", render(cfg, t), timer.seconds());
    if (!bad_row.empty()) return verify_failure("coverage", bad_row);
    return 0;
}

/** Ergodic rate, analytic and/or Monte Carlo, one row. */
inline int cmd_rate(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const detail::SourceSelection sources = detail::parse_sources(cfg.sources);
    if (sources.analytic && (cfg.kind != "cox" || cfg.m != 1))
        throw ParseError(
            "rate: the analytic source requires model.kind = cox and m = 1");
    const GeometryParams g = cfg.geometry();
    const LinkBudget lb = cfg.link();

    double analytic = 0.0, tail = 0.0;
    if (sources.analytic)
        analytic = ergodic_rate(cfg.cox(), g, lb, cfg.quadrature(), &tail);

    EstimateWithCI e;
    if (sources.mc) {
        SimPlan plan = base_plan(cfg, g);
        plan.model = cfg.model();
        e = run_rate(plan);
    }

    Table t;
    if (sources.analytic && sources.mc) {
        t.columns = {"rate_analytic", "tail_bound", "rate_mc", "ci_low",
                     "ci_high"};
        t.add_row({format_number(analytic), format_number(tail),
                   format_number(e.value), format_number(e.ci_low),
                   format_number(e.ci_high)});
    } else if (sources.analytic) {
        t.columns = {"rate_analytic", "tail_bound"};
        t.add_row({format_number(analytic), format_number(tail)});
    } else {
        t.columns = {"rate_mc", "ci_low", "ci_high"};
        t.add_row({format_number(e.value), format_number(e.ci_low),
                   format_number(e.ci_high)});
    }
    emit_document(cfg, "rate", render(cfg, t), timer.seconds());
    if (cfg.verify && sources.analytic && sources.mc &&
        !detail::within_three_sigma(analytic, e, tail))
        return verify_failure("rate", "rate");
    return 0;
}

/** Monte Carlo estimate of one metric for any constellation model. */
inline int cmd_simulate(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const GeometryParams g = cfg.geometry();
    SimPlan plan = base_plan(cfg, g);
    plan.model = cfg.model();
    Table t;
    if (cfg.metric == "coverage") {
        const std::vector<double> thresholds_db = cfg.thresholds();
        if (thresholds_db.empty())
            throw ParseError("simulate: empty threshold grid");
        if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end()))
            throw ParseError("simulate: thresholds must be ascending");
        plan.thresholds_db = thresholds_db;
        const CoverageCurve mc = run_sinr_ccdf(plan);
        t = curve_table(thresholds_db, mc.values, mc.ci_low, mc.ci_high);
    } else if (cfg.metric == "nearest-ccdf") {
        const std::vector<double> ds = distance_values(cfg, g);
        const std::vector<EstimateWithCI> emp = run_nearest_ccdf(plan, ds);
        t.columns = {"distance_km", "value", "ci_low", "ci_high"};
        for (std::size_t i = 0; i < ds.size(); ++i)
            t.add_row({format_number(ds[i]), format_number(emp[i].value),
                       format_number(emp[i].ci_low),
                       format_number(emp[i].ci_high)});
    } else if (cfg.metric == "nosat" || cfg.metric == "mean-visible" ||
               cfg.metric == "rate") {
        EstimateWithCI e;
        if (cfg.metric == "nosat")
            e = run_nosat(plan);
        else if (cfg.metric == "mean-visible")
            e = run_mean_visible(plan);
        else
            e = run_rate(plan);
        t.columns = {"metric", "value", "ci_low", "ci_high"};
        t.add_row({cfg.metric, format_number(e.value), format_number(e.ci_low),
                   format_number(e.ci_high)});
    } else {
        throw ParseError("simulate: unknown metric '" + cfg.metric +
                         "', expected coverage, nosat, mean-visible, "
                         "nearest-ccdf, or rate");
    }
    emit_document(cfg, "simulate", render(cfg, t), timer.seconds());
    return 0;
}

/**
 * Moment-matching fit of the random-orbit model to the configured target
 * constellation; writes a JSON report and, optionally, side-by-side Monte
 * Carlo coverage curves for the target and the fitted model.
 */
inline int cmd_fit(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const GeometryParams g = cfg.geometry();
    const QuadratureSpec quad = cfg.quadrature();
    const SourceParams target_model = cfg.model();
    const auto build = [&](std::uint64_t s) {
        return sample_model(target_model, g, s);
    };
    const LocalMoments moments =
        measure_local(build, cfg.latitude_rad(), cfg.fit_replicates, cfg.seed);
    const GeometryParams fit_g =
        GeometryParams::from_altitude(cfg.r_e, cfg.fit_altitude);
    const FitResult fr = fit_cox(moments, fit_g, quad);

    nlohmann::json report;
    report["tool_version"] = kToolVersion;
    report["target"] = {{"model", cfg.kind},
                        {"latitude_deg", cfg.latitude_deg},
                        {"replicates", cfg.fit_replicates},
                        {"mean_visible_satellites", moments.mean_visible_sats},
                        {"mean_visible_orbits", moments.mean_visible_orbits}};
    report["fitted"] = {
        {"lambda", fr.params.lambda},
        {"mu", fr.params.mu},
        {"altitude_km", cfg.fit_altitude},
        {"mean_crossing_orbits", mean_crossing_orbits(fr.params.lambda, fit_g)},
        {"mean_occupied_orbits", mean_occupied_orbits(fr.params, fit_g, quad)},
        {"mean_visible_satellites", mean_visible(fr.params, fit_g, quad)}};
    report["iterations"] = fr.iterations;
    report["residuals"] = {{"orbits", fr.residual_orbits},
                           {"satellites", fr.residual_sats}};
    emit_document(cfg, "fit", report.dump(2) + "\n", timer.seconds());

    if (cfg.fit_curves) {
        if (cfg.out.empty())
            throw ParseError("fit: side-by-side curves need --out");
        const std::vector<double> thresholds_db = cfg.thresholds();
        if (thresholds_db.empty()) throw ParseError("fit: empty threshold grid");
        SimPlan tp = base_plan(cfg, g);
        tp.model = target_model;
        tp.thresholds_db = thresholds_db;
        const CoverageCurve target_curve = run_sinr_ccdf(tp);
        SimPlan fp = base_plan(cfg, fit_g);
        fp.model = fr.params;
        fp.thresholds_db = thresholds_db;
        const CoverageCurve fitted_curve = run_sinr_ccdf(fp);
        Table t;
        t.columns = {"threshold_db",  "target", "target_ci_low",
                     "target_ci_high", "fitted", "fitted_ci_low",
                     "fitted_ci_high"};
        for (std::size_t i = 0; i < thresholds_db.size(); ++i)
            t.add_row({format_number(thresholds_db[i]),
                       format_number(target_curve.values[i]),
                       format_number(target_curve.ci_low[i]),
                       format_number(target_curve.ci_high[i]),
                       format_number(fitted_curve.values[i]),
                       format_number(fitted_curve.ci_low[i]),
                       format_number(fitted_curve.ci_high[i])});
        write_output_file(cfg, "fit", cfg.out + ".curves." + cfg.format,
                          render(cfg, t), timer.seconds());
    }
    return 0;
}

/** One seeded constellation draw as a per-satellite snapshot. */
inline int cmd_sample(const RunConfig& cfg) {
    detail::Stopwatch timer;
    const Constellation c = sample_model(cfg.model(), cfg.geometry(), cfg.seed);
    emit_document(cfg, "sample", render(cfg, snapshot_table(c)),
                  timer.seconds());
    return 0;
}

}  // namespace coxsat
