#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uqcal/eligibility.hpp"
#include "uqcal/errors.hpp"
#include "uqcal/model.hpp"
#include "uqcal/parallel.hpp"
#include "uqcal/reliability.hpp"
#include "uqcal/rng.hpp"

namespace uqcal {

/// Inputs the robust objective needs besides theta: the frozen eligible set,
/// the data-side summaries, the aleatory box to draw fresh a-samples from,
/// and the eligibility threshold defining each polytope.
struct RobustObjectiveContext {
    Matrix data_summaries;
    Box box_a;
    std::size_t k = 0; // a-samples per evaluation
    double q_threshold = 0.0;
    FrequencyBand band1, band2;
    std::size_t jobs = 1;
    bool lazy_rows = true;
};

/// Core of the robust design objective: max over the given polytopes of the
/// polytope-min of each combined failure indicator. Polytopes that are empty
/// (their e not eligible under the current a-sample draw) are skipped; if all
/// are empty the evaluation fails.
inline double robust_objective_core(const std::vector<WeightPolytope>& polytopes,
                                    const std::vector<std::vector<double>>& combined_indicators,
                                    bool lazy_rows = true, std::size_t jobs = 1) {
    if (polytopes.size() != combined_indicators.size() || polytopes.empty())
        throw invalid_input("robust objective: polytopes/indicators mismatch");
    std::vector<double> values(polytopes.size(), -1.0); // -1 marks an empty polytope
    parallel_for(polytopes.size(), jobs, [&](std::size_t, std::size_t i) {
        try {
            values[i] = bound_linear_over_polytope(polytopes[i], combined_indicators[i],
                                                   BoundSense::minimize, lazy_rows);
        } catch (const infeasible_error&) {
        }
    });
    double best = -1.0;
    for (double v : values) best = std::max(best, v);
    if (best < 0.0)
        throw empty_set_error("robust_objective: every polytope empty under fresh a-samples");
    return best;
}

/// max over eligible e of min over W in U of sum_j W_j 1{any g_i >= 0}:
/// the best-case failure estimate of the worst eligible e. Fresh a-samples
/// are drawn from the seed at every call, so repeated calls with one seed are
/// identical. Eligible e whose polytope is empty under the fresh samples are
/// skipped; if all are, the evaluation fails.
inline double robust_objective(const DesignPoint& theta,
                               const std::vector<EligibilityRecord>& records,
                               const SimulationModel& model, const RobustObjectiveContext& ctx,
                               std::uint64_t seed) {
    theta.validate();
    std::vector<const EligibilityRecord*> eligible;
    for (const auto& r : records)
        if (r.eligible && r.ok()) eligible.push_back(&r);
    if (eligible.empty()) throw empty_set_error("robust_objective: no eligible records");

    const Matrix a_fresh = sample_uniform(ctx.box_a, ctx.k, seed);
    std::vector<std::optional<WeightPolytope>> polys(eligible.size());
    std::vector<std::vector<double>> indicators(eligible.size());
    std::vector<std::unique_ptr<SimulationModel>> forks(ctx.jobs ? ctx.jobs : 1);
    for (std::size_t w = 1; w < forks.size(); ++w) forks[w] = model.fork_worker();
    parallel_for(eligible.size(), ctx.jobs, [&](std::size_t worker, std::size_t i) {
        const SimulationModel& m = forks[worker] ? *forks[worker] : model;
        const auto& rec = *eligible[i];
        const Matrix sims = detail::simulate_summaries(m, a_fresh, rec.e, ctx.band1, ctx.band2);
        polys[i].emplace(build_indicator_tensor(ctx.data_summaries, sims), ctx.q_threshold);
        indicators[i] = failure_indicators(requirement_values(m, a_fresh, rec.e, theta)).combined;
    });
    std::vector<WeightPolytope> flat;
    flat.reserve(polys.size());
    for (auto& p : polys) flat.push_back(std::move(*p));
    return robust_objective_core(flat, indicators, ctx.lazy_rows, ctx.jobs);
}

struct KwConfig {
    double c0 = 0.1;               // initial perturbation size
    double a0 = 0.1;               // initial step size
    std::size_t n_max = 8;         // outer iterations
    double gamma = 0.25;           // c_n = c0 / n^gamma
    DesignPoint theta_baseline;
    std::uint64_t seed = 0;        // per-evaluation seeds derive from this
    bool return_best_seen = false; // default: paper-faithful last iterate

    void validate() const {
        if (!(c0 > 0.0) || !(a0 > 0.0) || n_max < 1 || !(gamma > 0.0))
            throw invalid_input("kw config: need c0, a0, gamma > 0 and n_max >= 1");
        theta_baseline.validate();
    }
};

/// One central-difference step of the trace: everything needed to replay the
/// two evaluations ({x +- c_n e_i} scaled by the baseline, at `seed`).
struct KwStep {
    std::size_t n = 0, i = 0;
    double c_n = 0.0, a_n = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> x_before; // normalized position entering the step
    double u = 0.0, l = 0.0, g = 0.0;
};

struct KwTrace {
    std::vector<KwStep> steps;
    std::vector<double> iterate_values; // f at end of each outer iteration
};

struct KwResult {
    DesignPoint theta_new;  // selected per config (last iterate or best seen)
    DesignPoint theta_last; // paper-faithful final point
    DesignPoint theta_best; // lowest observed objective
    double f_initial = 0.0;
    double f_last = 0.0;
    double f_best = 0.0;
    KwTrace trace;
};

struct design_error : std::runtime_error {
    design_error(const std::string& what, KwTrace partial, std::exception_ptr why = nullptr)
        : std::runtime_error(what), trace(std::move(partial)), cause(std::move(why)) {}
    KwTrace trace;
    std::exception_ptr cause; // original objective failure, for error mapping
};

/// Coordinate Kiefer-Wolfowitz descent in the Hadamard-normalized space:
/// theta = theta_baseline o x, x starts at all-ones, schedules
/// c_n = c0/n^gamma and a_n = a0/n, central differences per coordinate with
/// common random numbers (u and l share one seed). The objective is
/// f(theta, seed).
inline KwResult kw_optimize(const std::function<double(const DesignPoint&, std::uint64_t)>& f,
                            const KwConfig& cfg) {
    cfg.validate();
    const std::size_t dim = cfg.theta_baseline.theta.size();
    std::vector<double> x(dim, 1.0);
    auto scaled = [&](const std::vector<double>& xs) {
        DesignPoint p;
        p.theta.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) p.theta[d] = cfg.theta_baseline.theta[d] * xs[d];
        return p;
    };

    KwResult res;
    KwTrace& trace = res.trace;
    auto guarded_eval = [&](const DesignPoint& p, std::uint64_t seed) {
        try {
            return f(p, seed);
        } catch (const std::exception& ex) {
            throw design_error(std::string("kw objective evaluation failed: ") + ex.what(), trace,
                               std::current_exception());
        }
    };

    res.f_initial = guarded_eval(cfg.theta_baseline, derive_seed(cfg.seed, 0, 0));
    res.theta_best = cfg.theta_baseline;
    res.f_best = res.f_initial;
    auto consider = [&](const DesignPoint& p, double value) {
        if (value < res.f_best) {
            res.f_best = value;
            res.theta_best = p;
        }
    };

    for (std::size_t n = 1; n <= cfg.n_max; ++n) {
        const double c_n = cfg.c0 / std::pow(double(n), cfg.gamma);
        const double a_n = cfg.a0 / double(n);
        for (std::size_t i = 0; i < dim; ++i) {
            const std::uint64_t seed = derive_seed(cfg.seed, n, i + 1);
            KwStep step{n, i, c_n, a_n, seed, x, 0.0, 0.0, 0.0};
            std::vector<double> xp = x, xm = x;
            xp[i] += c_n;
            xm[i] -= c_n;
            const DesignPoint tp = scaled(xp), tm = scaled(xm);
            step.u = guarded_eval(tp, seed);
            step.l = guarded_eval(tm, seed); // CRN: same seed as u
            step.g = (step.u - step.l) / (2.0 * c_n);
            x[i] -= a_n * step.g;
            consider(tp, step.u);
            consider(tm, step.l);
            trace.steps.push_back(std::move(step));
        }
        const DesignPoint it = scaled(x);
        const double fv = guarded_eval(it, derive_seed(cfg.seed, n, 0));
        trace.iterate_values.push_back(fv);
        consider(it, fv);
    }

    res.theta_last = scaled(x);
    res.f_last = trace.iterate_values.back();
    res.theta_new = cfg.return_best_seen ? res.theta_best : res.theta_last;
    return res;
}

} // namespace uqcal
