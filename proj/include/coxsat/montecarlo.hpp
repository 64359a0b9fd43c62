#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "coxsat/analytic.hpp"
#include "coxsat/constellation.hpp"
#include "coxsat/estimate.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/rng.hpp"

namespace coxsat {

/**
 * One simulation campaign: which constellation model to draw, the link
 * budget, the threshold grid in dB, and the replication plan. The observer
 * sits at observer_latitude; longitude is fixed at 0 for the rotation
 * invariant models (cox, binomial) and redrawn uniformly per replicate for
 * the deterministic ones (regular, walker, shells).
 */
struct SimPlan {
    SourceParams model;
    GeometryParams geometry;
    LinkBudget link;
    std::vector<double> thresholds_db;
    long replicates = 10000;
    std::uint64_t master_seed = 1;
    double observer_latitude = kHalfPi;
    int threads = 1;

    void validate() const {
        if (replicates < 1)
            throw std::invalid_argument("SimPlan: replicates must be >= 1");
        if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end()))
            throw std::invalid_argument("SimPlan: thresholds must be sorted");
        link.validate();
    }
};

/** Instantiate the plan's model for one replicate seed. */
inline Constellation sample_model(const SourceParams& model,
                                  const GeometryParams& g, std::uint64_t seed) {
    if (std::holds_alternative<CoxParams>(model))
        return sample_cox(std::get<CoxParams>(model), g, seed);
    if (std::holds_alternative<BinomialSpec>(model))
        return sample_binomial(std::get<BinomialSpec>(model).n, g, seed);
    if (std::holds_alternative<RegularSpec>(model)) {
        const RegularSpec& r = std::get<RegularSpec>(model);
        return build_regular(r.n_orbits, r.inclination, r.sats_per_orbit, g, seed);
    }
    if (std::holds_alternative<std::vector<ShellSpec>>(model))
        return build_shells(std::get<std::vector<ShellSpec>>(model), g.r_e, seed);
    throw std::invalid_argument("sample_model: no model selected");
}

namespace detail {

inline bool randomized_longitude(const SourceParams& model) {
    return std::holds_alternative<RegularSpec>(model) ||
           std::holds_alternative<std::vector<ShellSpec>>(model);
}

inline double observer_longitude_for(const SourceParams& model,
                                     std::uint64_t rep_seed) {
    if (!randomized_longitude(model)) return 0.0;
    RandomStream s = RandomStream::keyed(rep_seed, 0, stream_tag::observer);
    return s.uniform(0.0, kTwoPi);
}

/**
 * Run fn(rep) for every replicate index, split over contiguous chunks
 * across at most `threads` workers. fn must write only to its own
 * replicate's slot; results are then identical for any worker count.
 */
template <typename Fn>
inline void for_each_replicate(long replicates, int threads, Fn&& fn) {
    const long t = std::max(1L, std::min<long>(threads, replicates));
    if (t == 1) {
        for (long rep = 0; rep < replicates; ++rep) fn(rep);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    const long chunk = (replicates + t - 1) / t;
    for (long w = 0; w < t; ++w) {
        const long lo = w * chunk;
        const long hi = std::min(replicates, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() {
            for (long rep = lo; rep < hi; ++rep) fn(rep);
        });
    }
    for (std::thread& th : pool) th.join();
}

/**
 * SINR (or SIR) of one replicate under the plan's link budget, with
 * per-satellite unit-mean Gamma power fading in nearest-first order.
 * Returns -infinity when no satellite is visible (never covered) and
 * +infinity when the denominator is empty (no interferers, no noise:
 * covered at every finite threshold).
 */
inline double replicate_sinr(const SimPlan& plan, std::uint64_t rep_seed) {
    const Constellation c = sample_model(plan.model, plan.geometry, rep_seed);
    const double lon = observer_longitude_for(plan.model, rep_seed);
    const std::vector<VisibleSatellite> vis =
        visible_satellites(c, plan.observer_latitude, lon);
    if (vis.empty()) return -std::numeric_limits<double>::infinity();
    RandomStream fading = RandomStream::keyed(rep_seed, 0, stream_tag::fading);
    const LinkBudget& lb = plan.link;
    double serving = 0.0;
    double interference = 0.0;
    for (std::size_t i = 0; i < vis.size(); ++i) {
        const double h = fading.gamma_unit_mean(lb.m);
        const double q = h * std::pow(vis[i].distance * 1000.0, -lb.alpha);
        if (i == 0)
            serving = lb.g * q;
        else
            interference += q;
    }
    const double denom =
        interference +
        (lb.with_noise ? lb.noise_power / (lb.p * lb.g_r) : 0.0);
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return serving / denom;
}

}  // namespace detail

/** Fraction of replicates with no visible satellite. */
inline EstimateWithCI run_nosat(const SimPlan& plan) {
    plan.validate();
    std::vector<unsigned char> empty_slot(static_cast<std::size_t>(plan.replicates));
    detail::for_each_replicate(plan.replicates, plan.threads, [&](long rep) {
        const std::uint64_t rs = replicate_seed(plan.master_seed,
                                                static_cast<std::uint64_t>(rep));
        const Constellation c = sample_model(plan.model, plan.geometry, rs);
        const double lon = detail::observer_longitude_for(plan.model, rs);
        empty_slot[static_cast<std::size_t>(rep)] =
            has_visible(c, plan.observer_latitude, lon) ? 0 : 1;
    });
    long empty = 0;
    for (unsigned char e : empty_slot) empty += e;
    return EstimateWithCI::from_binomial(empty, plan.replicates);
}

/** Mean number of visible satellites per replicate. */
inline EstimateWithCI run_mean_visible(const SimPlan& plan) {
    plan.validate();
    std::vector<double> count_slot(static_cast<std::size_t>(plan.replicates));
    detail::for_each_replicate(plan.replicates, plan.threads, [&](long rep) {
        const std::uint64_t rs = replicate_seed(plan.master_seed,
                                                static_cast<std::uint64_t>(rep));
        const Constellation c = sample_model(plan.model, plan.geometry, rs);
        const double lon = detail::observer_longitude_for(plan.model, rs);
        count_slot[static_cast<std::size_t>(rep)] = static_cast<double>(
            visible_satellites(c, plan.observer_latitude, lon).size());
    });
    double sum = 0.0, sum_sq = 0.0;
    for (double v : count_slot) {
        sum += v;
        sum_sq += v * v;
    }
    return EstimateWithCI::from_samples(sum, sum_sq, plan.replicates);
}

/**
 * Nearest visible-satellite distance per replicate; +infinity encodes the
 * no-satellite event. Deterministic given the plan.
 */
inline std::vector<double> collect_nearest_distances(const SimPlan& plan) {
    plan.validate();
    std::vector<double> dist(static_cast<std::size_t>(plan.replicates));
    detail::for_each_replicate(plan.replicates, plan.threads, [&](long rep) {
        const std::uint64_t rs = replicate_seed(plan.master_seed,
                                                static_cast<std::uint64_t>(rep));
        const Constellation c = sample_model(plan.model, plan.geometry, rs);
        const double lon = detail::observer_longitude_for(plan.model, rs);
        const std::optional<double> d =
            nearest_distance(c, plan.observer_latitude, lon);
        dist[static_cast<std::size_t>(rep)] =
            d.has_value() ? *d : std::numeric_limits<double>::infinity();
    });
    return dist;
}

/** Empirical P(nearest distance > d) for each requested distance. */
inline std::vector<EstimateWithCI> run_nearest_ccdf(
    const SimPlan& plan, const std::vector<double>& distances) {
    const std::vector<double> samples = collect_nearest_distances(plan);
    std::vector<EstimateWithCI> out;
    out.reserve(distances.size());
    for (double d : distances) {
        long beyond = 0;
        for (double s : samples)
            if (s > d) ++beyond;
        out.push_back(EstimateWithCI::from_binomial(beyond, plan.replicates));
    }
    return out;
}

/**
 * Empirical SINR CCDF over the plan's threshold grid. Replicates without a
 * visible satellite count as non-covered everywhere; replicates with an
 * empty denominator count as covered everywhere. One SINR draw serves every
 * threshold, so the curve is monotone by construction.
 */
inline CoverageCurve run_sinr_ccdf(const SimPlan& plan) {
    plan.validate();
    if (plan.thresholds_db.empty())
        throw std::invalid_argument("run_sinr_ccdf: empty threshold grid");
    std::vector<double> sinr_slot(static_cast<std::size_t>(plan.replicates));
    detail::for_each_replicate(plan.replicates, plan.threads, [&](long rep) {
        const std::uint64_t rs = replicate_seed(plan.master_seed,
                                                static_cast<std::uint64_t>(rep));
        sinr_slot[static_cast<std::size_t>(rep)] = detail::replicate_sinr(plan, rs);
    });
    CoverageCurve curve;
    for (double t_db : plan.thresholds_db) {
        const double tau = db_to_linear(t_db);
        long covered = 0;
        for (double s : sinr_slot)
            if (s > tau) ++covered;
        const EstimateWithCI e = EstimateWithCI::from_binomial(covered, plan.replicates);
        curve.thresholds.push_back(tau);
        curve.values.push_back(e.value);
        curve.ci_low.push_back(e.ci_low);
        curve.ci_high.push_back(e.ci_high);
    }
    return curve;
}

/**
 * Mean spectral efficiency log2(1 + SINR) across replicates. No-satellite
 * replicates contribute 0; so does the measure-zero degenerate case of a
 * single visible satellite with neither interference nor noise.
 */
inline EstimateWithCI run_rate(const SimPlan& plan) {
    plan.validate();
    std::vector<double> rate_slot(static_cast<std::size_t>(plan.replicates));
    detail::for_each_replicate(plan.replicates, plan.threads, [&](long rep) {
        const std::uint64_t rs = replicate_seed(plan.master_seed,
                                                static_cast<std::uint64_t>(rep));
        const double sinr = detail::replicate_sinr(plan, rs);
        rate_slot[static_cast<std::size_t>(rep)] =
            std::isfinite(sinr) ? std::log2(1.0 + sinr) : 0.0;
    });
    double sum = 0.0, sum_sq = 0.0;
    for (double v : rate_slot) {
        sum += v;
        sum_sq += v * v;
    }
    return EstimateWithCI::from_samples(sum, sum_sq, plan.replicates);
}

}  // namespace coxsat
