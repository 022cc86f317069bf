#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uqcal/eligibility.hpp"
#include "uqcal/errors.hpp"
#include "uqcal/matrix.hpp"
#include "uqcal/model.hpp"
#include "uqcal/parallel.hpp"

namespace uqcal {

/// Shared ingredients of every per-e weight polytope: the data-side ECDF
/// summaries, the common a-samples, the threshold, and the bands. Reusing
/// these from the eligibility construction keeps the reliability LPs on
/// exactly the same polytopes.
struct PolytopeContext {
    Matrix data_summaries; // n1 x m
    Matrix a_samples;      // k x dim_a
    double q_threshold = 0.0;
    FrequencyBand band1, band2;
    std::size_t jobs = 1;
    bool lazy_rows = true;
};

/// Per-requirement failure indicators at one (e, theta): entry j is
/// 1{g_i(a_j, e, theta) >= 0}, plus the any-requirement OR row.
struct FailureIndicatorVector {
    std::vector<std::vector<double>> per_requirement; // G rows of length k
    std::vector<double> combined;                     // elementwise OR
};

/// g_i(a_j, e, theta) for every shared a-sample; rows follow a_samples.
inline Matrix requirement_values(const SimulationModel& model, const Matrix& a_samples,
                                 std::span<const double> e, const DesignPoint& theta) {
    Matrix g;
    for (std::size_t j = 0; j < a_samples.rows(); ++j) {
        std::span<const double> a(a_samples.row(j), a_samples.cols());
        const std::vector<double> gj = model.requirements(a, e, theta);
        if (g.empty()) g = Matrix(a_samples.rows(), gj.size());
        if (gj.size() != g.cols())
            throw model_error("requirement count changed between evaluations");
        for (std::size_t i = 0; i < gj.size(); ++i) g(j, i) = gj[i];
    }
    return g;
}

inline FailureIndicatorVector failure_indicators(const Matrix& g_values) {
    FailureIndicatorVector out;
    const std::size_t k = g_values.rows();
    out.combined.assign(k, 0.0);
    out.per_requirement.assign(g_values.cols(), std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < g_values.cols(); ++i)
            if (g_values(j, i) >= 0.0) {
                out.per_requirement[i][j] = 1.0;
                out.combined[j] = 1.0;
            }
    return out;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct RminRmaxRow {
    std::vector<double> e;
    double r_min = 0.0;
    double r_max = 0.0;
};

/// Failure-probability ranges, severities and the per-e R_min/R_max table for
/// one design point, all as linear bounds over the eligibility polytopes.
struct ReliabilityReport {
    std::vector<Interval> requirement_ranges; // R_i ranges
    Interval combined_range;                  // R range (any requirement)
    std::vector<double> severities;           // s_i
    std::vector<RminRmaxRow> rmin_rmax;       // per eligible e
    std::size_t eligible_count = 0;
};

/// Bounds for one polytope: per-requirement failure-probability intervals,
/// the combined (any-requirement) interval, and severities. This is the
/// polytope-level core of Problem C; the model-driven layer below feeds it.
struct PerEBounds {
    std::vector<Interval> req;
    Interval combined;
    std::vector<double> severities;
};

inline PerEBounds reliability_bounds(const WeightPolytope& poly, const Matrix& g_values,
                                     bool lazy_rows = true) {
    if (g_values.rows() != poly.tensor.k)
        throw invalid_input("reliability bounds: g rows must match k");
    const FailureIndicatorVector ind = failure_indicators(g_values);
    PerEBounds out;
    out.req.resize(ind.per_requirement.size());
    out.severities.resize(ind.per_requirement.size());
    for (std::size_t i = 0; i < ind.per_requirement.size(); ++i) {
        out.req[i].lo = bound_linear_over_polytope(poly, ind.per_requirement[i],
                                                   BoundSense::minimize, lazy_rows);
        out.req[i].hi = bound_linear_over_polytope(poly, ind.per_requirement[i],
                                                   BoundSense::maximize, lazy_rows);
        // severity objective: expected positive part of g_i
        std::vector<double> gplus(poly.tensor.k, 0.0);
        for (std::size_t j = 0; j < poly.tensor.k; ++j)
            if (g_values(j, i) >= 0.0) gplus[j] = g_values(j, i);
        out.severities[i] = bound_linear_over_polytope(poly, gplus, BoundSense::maximize, lazy_rows);
    }
    out.combined.lo = bound_linear_over_polytope(poly, ind.combined, BoundSense::minimize, lazy_rows);
    out.combined.hi = bound_linear_over_polytope(poly, ind.combined, BoundSense::maximize, lazy_rows);
    return out;
}

namespace detail {

// bounds for one eligible record; rebuilds its polytope from the shared context
inline PerEBounds per_e_bounds(const SimulationModel& model, const PolytopeContext& ctx,
                               const EligibilityRecord& rec, const DesignPoint& theta) {
    const Matrix sims = simulate_summaries(model, ctx.a_samples, rec.e, ctx.band1, ctx.band2);
    WeightPolytope poly(build_indicator_tensor(ctx.data_summaries, sims), ctx.q_threshold);
    const Matrix g = requirement_values(model, ctx.a_samples, rec.e, theta);
    return reliability_bounds(poly, g, ctx.lazy_rows);
}

} // namespace detail

/// Full Problem-C analysis over the eligible records: ranges are min/max over
/// eligible e of the polytope optima, severities are worst case over e and W.
inline ReliabilityReport analyze_reliability(const std::vector<EligibilityRecord>& records,
                                             const SimulationModel& model,
                                             const PolytopeContext& ctx, const DesignPoint& theta) {
    theta.validate();
    std::vector<const EligibilityRecord*> eligible;
    for (const auto& r : records)
        if (r.eligible && r.ok()) eligible.push_back(&r);
    if (eligible.empty()) throw empty_set_error("reliability: no eligible records");

    std::vector<PerEBounds> rows(eligible.size());
    std::vector<std::unique_ptr<SimulationModel>> forks(ctx.jobs ? ctx.jobs : 1);
    for (std::size_t w = 1; w < forks.size(); ++w) forks[w] = model.fork_worker();
    parallel_for(eligible.size(), ctx.jobs, [&](std::size_t worker, std::size_t i) {
        const SimulationModel& m = forks[worker] ? *forks[worker] : model;
        rows[i] = detail::per_e_bounds(m, ctx, *eligible[i], theta);
    });

    ReliabilityReport report;
    report.eligible_count = eligible.size();
    const std::size_t n_req = rows.front().req.size();
    report.requirement_ranges.assign(n_req, Interval{1.0, 0.0});
    report.severities.assign(n_req, 0.0);
    report.combined_range = {1.0, 0.0};
    for (std::size_t i = 0; i < eligible.size(); ++i) {
        for (std::size_t r = 0; r < n_req; ++r) {
            report.requirement_ranges[r].lo =
                std::min(report.requirement_ranges[r].lo, rows[i].req[r].lo);
            report.requirement_ranges[r].hi =
                std::max(report.requirement_ranges[r].hi, rows[i].req[r].hi);
            report.severities[r] = std::max(report.severities[r], rows[i].severities[r]);
        }
        report.combined_range.lo = std::min(report.combined_range.lo, rows[i].combined.lo);
        report.combined_range.hi = std::max(report.combined_range.hi, rows[i].combined.hi);
        report.rmin_rmax.push_back(
            {eligible[i]->e, rows[i].combined.lo, rows[i].combined.hi});
    }
    return report;
}

/// Range of R_i (and the combined R) over eligible e and the weight polytope.
inline ReliabilityReport failure_prob_range(const std::vector<EligibilityRecord>& records,
                                            const SimulationModel& model,
                                            const PolytopeContext& ctx, const DesignPoint& theta) {
    return analyze_reliability(records, model, ctx, theta);
}

/// Worst-case expected positive part of g_i over eligible e and weights.
inline double severity(const std::vector<EligibilityRecord>& records, const SimulationModel& model,
                       const PolytopeContext& ctx, const DesignPoint& theta,
                       std::size_t requirement_index) {
    const ReliabilityReport rep = analyze_reliability(records, model, ctx, theta);
    if (requirement_index >= rep.severities.size())
        throw invalid_input("severity: requirement index out of range");
    return rep.severities[requirement_index];
}

/// Per-eligible-e best/worst combined failure probability, for the ranking
/// scatter plots.
inline std::vector<RminRmaxRow> rmin_rmax_table(const std::vector<EligibilityRecord>& records,
                                                const SimulationModel& model,
                                                const PolytopeContext& ctx,
                                                const DesignPoint& theta) {
    return analyze_reliability(records, model, ctx, theta).rmin_rmax;
}

} // namespace uqcal
