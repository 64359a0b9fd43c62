#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "coxsat/montecarlo.hpp"

using namespace coxsat;

namespace {
const GeometryParams kShell = GeometryParams::from_altitude(6400.0, 550.0);
const double kNoiseWatts = 1.380649e-23 * 290.0 * 3.0e7;

SimPlan benchmark_plan() {
    SimPlan p;
    p.model = CoxParams{30.0, 30.0};
    p.geometry = kShell;
    p.link = LinkBudget::from_db(30.0, 20.0, 0.0, 2.0, 1, kNoiseWatts, false);
    p.thresholds_db = {-10.0, 0.0, 10.0};
    p.replicates = 5000;
    p.master_seed = 7;
    return p;
}

bool same_curve(const CoverageCurve& a, const CoverageCurve& b) {
    return a.thresholds == b.thresholds && a.values == b.values &&
           a.ci_low == b.ci_low && a.ci_high == b.ci_high;
}
}  // namespace

TEST_CASE("outputs are bit-identical regardless of the worker count") {
    SimPlan p1 = benchmark_plan();
    SimPlan p2 = benchmark_plan();
    p2.threads = 2;
    SimPlan p5 = benchmark_plan();
    p5.threads = 5;

    const CoverageCurve c1 = run_sinr_ccdf(p1);
    REQUIRE(same_curve(c1, run_sinr_ccdf(p2)));
    REQUIRE(same_curve(c1, run_sinr_ccdf(p5)));

    const EstimateWithCI n1 = run_nosat(p1);
    const EstimateWithCI n2 = run_nosat(p2);
    REQUIRE(n1.value == n2.value);
    REQUIRE(n1.ci_low == n2.ci_low);

    REQUIRE(collect_nearest_distances(p1) == collect_nearest_distances(p5));
    REQUIRE(run_rate(p1).value == run_rate(p5).value);
}

TEST_CASE("runs are deterministic in the master seed") {
    SimPlan a = benchmark_plan();
    const CoverageCurve c1 = run_sinr_ccdf(a);
    REQUIRE(same_curve(c1, run_sinr_ccdf(a)));
    SimPlan b = benchmark_plan();
    b.master_seed = 8;
    REQUIRE_FALSE(same_curve(c1, run_sinr_ccdf(b)));
}

TEST_CASE("the coverage curve is a monotone CCDF with ordered intervals") {
    const CoverageCurve c = run_sinr_ccdf(benchmark_plan());
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        REQUIRE(c.values[i] >= 0.0);
        REQUIRE(c.values[i] <= 1.0);
        REQUIRE(c.ci_low[i] <= c.values[i]);
        REQUIRE(c.values[i] <= c.ci_high[i]);
        if (i > 0) REQUIRE(c.values[i] <= c.values[i - 1]);
    }
}

TEST_CASE("paired seeds give deterministic dominance in the link budget") {
    SimPlan weak = benchmark_plan();
    weak.link.with_noise = true;
    SimPlan strong = weak;
    strong.link.g_r = 100.0;  // receive gain lifts every replicate's SINR
    const CoverageCurve cw = run_sinr_ccdf(weak);
    const CoverageCurve cs = run_sinr_ccdf(strong);
    for (std::size_t i = 0; i < cw.values.size(); ++i)
        REQUIRE(cs.values[i] >= cw.values[i]);

    // Removing noise can only raise each replicate's ratio.
    SimPlan pure = weak;
    pure.link.with_noise = false;
    const CoverageCurve cp = run_sinr_ccdf(pure);
    for (std::size_t i = 0; i < cw.values.size(); ++i)
        REQUIRE(cp.values[i] >= cw.values[i]);
}

TEST_CASE("the no-visible event equals the nearest-distance horizon event") {
    SimPlan plan = benchmark_plan();
    plan.model = CoxParams{10.0, 10.0};
    plan.replicates = 20000;
    const EstimateWithCI nosat = run_nosat(plan);
    const EstimateWithCI beyond = run_nearest_ccdf(plan, {kShell.d_max})[0];
    REQUIRE(nosat.value == beyond.value);  // identical replicate draws
    REQUIRE(nosat.ci_low == beyond.ci_low);
    REQUIRE(nosat.ci_high == beyond.ci_high);
}

TEST_CASE("mean visible count matches the cap-fraction closed form") {
    SimPlan plan = benchmark_plan();
    plan.replicates = 20000;
    const EstimateWithCI e = run_mean_visible(plan);
    const double expected = 30.0 * 30.0 * kShell.visible_cap_fraction();
    CAPTURE(e.value, expected);
    REQUIRE(std::abs(e.value - expected) <= 3.0 * e.std_error);
}

TEST_CASE("documented conventions for degenerate replicates hold") {
    // A single uniform satellite: no interferers and no noise, so every
    // replicate is either invisible (never covered) or covered at all
    // finite thresholds; the curve is flat at the visibility probability.
    SimPlan plan = benchmark_plan();
    plan.model = BinomialSpec{1};
    plan.replicates = 20000;
    plan.thresholds_db = {-10.0, 0.0, 20.0};
    const CoverageCurve c = run_sinr_ccdf(plan);
    REQUIRE(c.values[0] == c.values[1]);
    REQUIRE(c.values[1] == c.values[2]);
    const double b = kShell.visible_cap_fraction();
    REQUIRE(std::abs(c.values[0] - b) <=
            3.0 * std::sqrt(b * (1.0 - b) / 20000.0));
    // Infinite ratios carry zero spectral efficiency by convention.
    const EstimateWithCI rate = run_rate(plan);
    REQUIRE(rate.value == 0.0);

    // No orbits at all: nothing is ever visible and the rate is zero.
    SimPlan empty = benchmark_plan();
    empty.model = CoxParams{0.0, 5.0};
    empty.replicates = 200;
    REQUIRE(run_nosat(empty).value == 1.0);
    REQUIRE(run_rate(empty).value == 0.0);
}

TEST_CASE("anisotropic models respond to the observer latitude") {
    SimPlan plan = benchmark_plan();
    plan.model = RegularSpec{20, 0.93, 15};
    plan.replicates = 3000;
    plan.observer_latitude = 0.0;
    const double at_equator = run_mean_visible(plan).value;
    plan.observer_latitude = 1.4;  // near the pole, above the inclination band
    const double near_pole = run_mean_visible(plan).value;
    CAPTURE(at_equator, near_pole);
    REQUIRE(at_equator != near_pole);
}

TEST_CASE("multi-shell plans simulate with per-orbit radii") {
    SimPlan plan = benchmark_plan();
    plan.model = std::vector<ShellSpec>{{6, 20, 525.0, 0.75, 10},
                                        {6, 20, 535.0, 0.93, 10}};
    plan.replicates = 1000;
    plan.observer_latitude = 0.6;
    const EstimateWithCI e = run_mean_visible(plan);
    REQUIRE(e.value > 0.0);
    const CoverageCurve c = run_sinr_ccdf(plan);
    for (double v : c.values) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("invalid plans are rejected up front") {
    SimPlan plan = benchmark_plan();
    plan.replicates = 0;
    REQUIRE_THROWS_AS(run_nosat(plan), std::invalid_argument);

    SimPlan unsorted = benchmark_plan();
    unsorted.thresholds_db = {5.0, -5.0};
    REQUIRE_THROWS_AS(run_sinr_ccdf(unsorted), std::invalid_argument);

    SimPlan empty_grid = benchmark_plan();
    empty_grid.thresholds_db = {};
    REQUIRE_THROWS_AS(run_sinr_ccdf(empty_grid), std::invalid_argument);

    SimPlan no_model = benchmark_plan();
    no_model.model = std::monostate{};
    REQUIRE_THROWS_AS(run_nosat(no_model), std::invalid_argument);
}
