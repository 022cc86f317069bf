#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "uqcal/empirical.hpp"
#include "uqcal/errors.hpp"
#include "uqcal/linprog.hpp"
#include "uqcal/matrix.hpp"
#include "uqcal/model.hpp"
#include "uqcal/parallel.hpp"
#include "uqcal/rng.hpp"
#include "uqcal/summary.hpp"

namespace uqcal {

/// I[j,i,r] = 1{ sim_summary(j,r) <= data_summary(i,r) }, the building block
/// of every sandwich constraint. Comparisons are exact; ties are never
/// perturbed.
struct IndicatorTensor {
    std::size_t k = 0, n1 = 0, m = 0;
    std::vector<std::uint8_t> bits; // layout [(r*n1 + i)*k + j]
    Matrix data_summaries;          // n1 x m
    Matrix sim_summaries;           // k x m

    bool bit(std::size_t j, std::size_t i, std::size_t r) const {
        return bits[(r * n1 + i) * k + j] != 0;
    }
};

inline IndicatorTensor build_indicator_tensor(const Matrix& data_summaries,
                                              const Matrix& sim_summaries) {
    if (data_summaries.cols() != sim_summaries.cols())
        throw invalid_input("indicator tensor: summary dimension mismatch");
    if (data_summaries.rows() == 0 || sim_summaries.rows() == 0)
        throw invalid_input("indicator tensor: empty inputs");
    if (!data_summaries.all_finite() || !sim_summaries.all_finite())
        throw invalid_input("indicator tensor: non-finite summary");
    IndicatorTensor t;
    t.n1 = data_summaries.rows();
    t.k = sim_summaries.rows();
    t.m = data_summaries.cols();
    t.data_summaries = data_summaries;
    t.sim_summaries = sim_summaries;
    t.bits.assign(t.k * t.n1 * t.m, 0);
    for (std::size_t r = 0; r < t.m; ++r)
        for (std::size_t i = 0; i < t.n1; ++i) {
            const double d = data_summaries(i, r);
            std::uint8_t* row = t.bits.data() + (r * t.n1 + i) * t.k;
            for (std::size_t j = 0; j < t.k; ++j) row[j] = sim_summaries(j, r) <= d ? 1 : 0;
        }
    return t;
}

namespace detail {

// Reduced view of the sandwich constraints: per summary coordinate, the
// distinct sorted data values with their ECDF limits, plus the simulation
// points sorted by that coordinate so any weight vector's CDF values at all
// distinct data values come from one prefix-sum pass. Duplicated data values
// collapse to a single constraint pair (identical feasible set, smaller LP).
class SandwichSystem {
  public:
    struct Coord {
        std::vector<double> values;       // distinct ascending
        std::vector<double> lo, hi;       // F(v+), F(v-) per value
        std::vector<std::uint32_t> order; // sim indices ascending by coordinate
        std::vector<std::uint32_t> cut;   // #sims with value <= values[vi]
    };

    explicit SandwichSystem(const IndicatorTensor& t) : k_(t.k), n1_(t.n1) {
        beta_ = 1.0 / std::sqrt(double(n1_));
        coords_.resize(t.m);
        std::size_t total = 0;
        for (std::size_t r = 0; r < t.m; ++r) {
            Coord& c = coords_[r];
            Ecdf ecdf(t.data_summaries.col(r));
            c.values = ecdf.sorted_points;
            c.values.erase(std::unique(c.values.begin(), c.values.end()), c.values.end());
            c.lo.reserve(c.values.size());
            c.hi.reserve(c.values.size());
            for (double v : c.values) {
                c.lo.push_back(ecdf_right(ecdf, v));
                c.hi.push_back(ecdf_left(ecdf, v));
            }
            c.order.resize(k_);
            std::iota(c.order.begin(), c.order.end(), 0);
            std::sort(c.order.begin(), c.order.end(), [&](std::uint32_t a, std::uint32_t b) {
                const double va = t.sim_summaries(a, r), vb = t.sim_summaries(b, r);
                return va < vb || (va == vb && a < b);
            });
            c.cut.resize(c.values.size());
            std::size_t pos = 0;
            for (std::size_t vi = 0; vi < c.values.size(); ++vi) {
                while (pos < k_ && t.sim_summaries(c.order[pos], r) <= c.values[vi]) ++pos;
                c.cut[vi] = std::uint32_t(pos);
            }
            row_offset_.push_back(total);
            total += c.values.size();
        }
        n_pairs_ = total;
    }

    std::size_t k() const { return k_; }
    std::size_t n1() const { return n1_; }
    double beta() const { return beta_; }
    std::size_t pair_count() const { return n_pairs_; } // (r, value) pairs; 2 rows each

    // pair identifier <-> (r, vi)
    std::pair<std::size_t, std::size_t> locate(std::size_t pair_id) const {
        std::size_t r = std::upper_bound(row_offset_.begin(), row_offset_.end(), pair_id) -
                        row_offset_.begin() - 1;
        return {r, pair_id - row_offset_[r]};
    }

    const Coord& coord(std::size_t r) const { return coords_[r]; }

    // weighted CDF value at every distinct data value of every coordinate
    void activities(const std::vector<double>& w, std::vector<double>& out) const {
        out.resize(n_pairs_);
        std::vector<double> prefix(k_ + 1);
        for (std::size_t r = 0; r < coords_.size(); ++r) {
            const Coord& c = coords_[r];
            prefix[0] = 0.0;
            for (std::size_t p = 0; p < k_; ++p) prefix[p + 1] = prefix[p] + w[c.order[p]];
            for (std::size_t vi = 0; vi < c.values.size(); ++vi)
                out[row_offset_[r] + vi] = prefix[c.cut[vi]];
        }
    }

    // dense 0/1 coefficient row of a pair
    void fill_indicator(std::size_t pair_id, double* coeffs) const {
        const auto [r, vi] = locate(pair_id);
        const Coord& c = coords_[r];
        std::fill(coeffs, coeffs + k_, 0.0);
        for (std::size_t p = 0; p < c.cut[vi]; ++p) coeffs[c.order[p]] = 1.0;
    }

    double lo(std::size_t pair_id) const {
        const auto [r, vi] = locate(pair_id);
        return coords_[r].lo[vi];
    }
    double hi(std::size_t pair_id) const {
        const auto [r, vi] = locate(pair_id);
        return coords_[r].hi[vi];
    }

  private:
    std::size_t k_, n1_, n_pairs_ = 0;
    double beta_;
    std::vector<Coord> coords_;
    std::vector<std::size_t> row_offset_;
};

// Shared lazy-constraint solve for the three sandwich LP shapes. `extra_coeff`
// is the column of the auxiliary variable (q or the violation bound t); when
// absent the LP is a pure bound problem over the polytope at fixed q.
struct SandwichMode {
    enum Kind { min_q, min_violation, linear } kind = min_q;
    double q_fixed = 0.0;               // min_violation / linear
    std::vector<double> objective;      // linear: c over W
    lp::Sense sense = lp::Sense::minimize;
};

struct SandwichResult {
    bool feasible = true;
    double value = 0.0; // q*, t*, or the linear bound
    std::vector<double> weights;
};

inline SandwichResult solve_sandwich(const SandwichSystem& sys, const SandwichMode& mode,
                                     bool lazy_rows = true) {
    const std::size_t k = sys.k();
    const bool has_aux = mode.kind != SandwichMode::linear;
    const std::size_t n_vars = k + (has_aux ? 1 : 0);
    const double beta = sys.beta();
    // effective bound shift per side
    const double shift = (mode.kind == SandwichMode::min_q) ? 0.0 : mode.q_fixed * beta;
    // aux column coefficient in lower/upper rows
    const double aux_gain = (mode.kind == SandwichMode::min_q) ? beta : 1.0;

    const std::size_t pairs = sys.pair_count();
    // statically redundant sides never constrain a probability vector
    auto lower_redundant = [&](std::size_t p) { return sys.lo(p) - shift <= 1e-15; };
    auto upper_redundant = [&](std::size_t p) { return sys.hi(p) + shift >= 1.0 - 1e-15; };

    std::vector<char> active(2 * pairs, 0);
    std::vector<std::size_t> active_list;
    auto add_row = [&](std::size_t row_id) {
        if (active[row_id]) return false;
        const std::size_t p = row_id / 2;
        if (row_id % 2 == 0 ? lower_redundant(p) : upper_redundant(p)) return false;
        active[row_id] = 1;
        active_list.push_back(row_id);
        return true;
    };

    if (lazy_rows) {
        // seed with the extremes and quartiles of every coordinate, both sides
        std::size_t offset = 0;
        for (std::size_t r = 0; offset < pairs; ++r) {
            const auto& c = sys.coord(r);
            const std::size_t p = c.values.size();
            for (std::size_t vi : {std::size_t(0), p / 4, p / 2, (3 * p) / 4, p - 1}) {
                add_row(2 * (offset + vi));
                add_row(2 * (offset + vi) + 1);
            }
            offset += p;
        }
    } else {
        for (std::size_t id = 0; id < 2 * pairs; ++id) add_row(id);
    }

    std::vector<double> acts;
    SandwichResult out;
    for (std::size_t round = 0;; ++round) {
        if (round > 2 * pairs + 4)
            throw solver_error("sandwich row generation failed to converge", 2 * pairs, n_vars);
        lp::Problem prob;
        prob.n = n_vars;
        prob.c.assign(n_vars, 0.0);
        if (has_aux) {
            prob.c[k] = 1.0;
            prob.sense = lp::Sense::minimize;
        } else {
            std::copy(mode.objective.begin(), mode.objective.end(), prob.c.begin());
            prob.sense = mode.sense;
        }
        std::sort(active_list.begin(), active_list.end());
        for (std::size_t row_id : active_list) {
            const std::size_t p = row_id / 2;
            if (row_id % 2 == 0) {
                auto& row = prob.add_row(lp::Rel::ge, sys.lo(p) - shift);
                sys.fill_indicator(p, row.a.data());
                if (has_aux) row.a[k] = aux_gain;
            } else {
                auto& row = prob.add_row(lp::Rel::le, sys.hi(p) + shift);
                sys.fill_indicator(p, row.a.data());
                if (has_aux) row.a[k] = -aux_gain;
            }
        }
        auto& simplex_row = prob.add_row(lp::Rel::eq, 1.0);
        std::fill(simplex_row.a.begin(), simplex_row.a.begin() + k, 1.0);

        const lp::Solution sol = lp::solve(prob);
        if (sol.status == lp::Status::infeasible) {
            out.feasible = false; // a relaxation is infeasible, so the full LP is too
            return out;
        }
        if (sol.status == lp::Status::unbounded)
            throw solver_error("sandwich LP unbounded", prob.rows.size(), n_vars);

        std::vector<double> w(sol.x.begin(), sol.x.begin() + k);
        const double aux = has_aux ? sol.x[k] : 0.0;
        sys.activities(w, acts);
        const double allowance = shift + (has_aux ? aux_gain * aux : 0.0);

        // most-violated inactive rows; ties resolve by row id
        std::vector<std::pair<double, std::size_t>> violated;
        for (std::size_t p = 0; p < pairs; ++p) {
            const double low_gap = (sys.lo(p) - allowance) - acts[p];
            if (low_gap > 1e-9 && !active[2 * p] && !lower_redundant(p))
                violated.emplace_back(low_gap, 2 * p);
            const double up_gap = acts[p] - (sys.hi(p) + allowance);
            if (up_gap > 1e-9 && !active[2 * p + 1] && !upper_redundant(p))
                violated.emplace_back(up_gap, 2 * p + 1);
        }
        if (violated.empty()) {
            out.value = sol.value;
            out.weights = std::move(w);
            // exact unit mass; the solve leaves it within ~1e-12
            double sum = 0.0;
            for (double v : out.weights) sum += v;
            if (sum > 0.0)
                for (double& v : out.weights) v /= sum;
            return out;
        }
        std::sort(violated.begin(), violated.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        const std::size_t batch = std::min<std::size_t>(violated.size(), 64);
        for (std::size_t i = 0; i < batch; ++i) add_row(violated[i].second);
    }
}

} // namespace detail

struct MinQSolution {
    double q_star = 0.0;
    std::vector<double> weights;
};

/// Optimal value of the min-q LP: the degree of eligibility of the e that
/// produced the tensor, with witness weights attaining it.
inline MinQSolution solve_min_q(const IndicatorTensor& tensor, bool lazy_rows = true) {
    if (tensor.k < 1 || tensor.n1 < 1) throw invalid_input("solve_min_q: empty tensor");
    detail::SandwichSystem sys(tensor);
    detail::SandwichMode mode;
    mode.kind = detail::SandwichMode::min_q;
    auto res = detail::solve_sandwich(sys, mode, lazy_rows);
    if (!res.feasible)
        throw solver_error("min-q LP reported infeasible; this cannot happen", 2 * sys.pair_count(),
                           tensor.k + 1);
    return {res.value, std::move(res.weights)};
}

/// True iff some weight vector satisfies the sandwich at threshold q. Solved
/// as its own LP (minimize the worst constraint violation at fixed q), so it
/// is an independent route that must agree with q >= solve_min_q(...).q_star.
inline bool check_feasible(const IndicatorTensor& tensor, double q, bool lazy_rows = true) {
    if (!(q >= 0.0)) throw invalid_input("check_feasible: q must be >= 0");
    detail::SandwichSystem sys(tensor);
    detail::SandwichMode mode;
    mode.kind = detail::SandwichMode::min_violation;
    mode.q_fixed = q;
    auto res = detail::solve_sandwich(sys, mode, lazy_rows);
    return res.feasible && res.value <= 1e-7;
}

/// Feasible probability weights on the k simulated points for one eligible e.
struct WeightPolytope {
    IndicatorTensor tensor;
    double q_threshold = 0.0;
    std::size_t n1 = 0;

    WeightPolytope(IndicatorTensor t, double threshold)
        : tensor(std::move(t)), q_threshold(threshold), n1(tensor.n1) {
        if (!(threshold > 0.0)) throw invalid_input("polytope threshold must be > 0");
    }
};

enum class BoundSense { minimize, maximize };

/// Optimum of c.W over the polytope. Throws infeasible_error when empty
/// (q_star of the tensor above the threshold).
inline double bound_linear_over_polytope(const WeightPolytope& poly, const std::vector<double>& c,
                                         BoundSense sense, bool lazy_rows = true) {
    if (c.size() != poly.tensor.k) throw invalid_input("polytope bound: objective length != k");
    detail::SandwichSystem sys(poly.tensor);
    detail::SandwichMode mode;
    mode.kind = detail::SandwichMode::linear;
    mode.q_fixed = poly.q_threshold;
    mode.objective = c;
    mode.sense = sense == BoundSense::minimize ? lp::Sense::minimize : lp::Sense::maximize;
    auto res = detail::solve_sandwich(sys, mode, lazy_rows);
    if (!res.feasible)
        throw infeasible_error("weight polytope is empty at threshold " +
                               std::to_string(poly.q_threshold));
    return res.value;
}

/// One epistemic sample with its LP verdict. `error` is set (and eligible is
/// false) when the model or solver failed for this sample.
struct EligibilityRecord {
    std::vector<double> e;
    double q_star = std::numeric_limits<double>::quiet_NaN();
    bool eligible = false;
    std::optional<std::vector<double>> witness_weights;
    std::string error;

    bool ok() const { return error.empty(); }
};

struct EligibilityOptions {
    std::size_t jobs = 1;
    bool keep_witness = false;
    std::optional<double> threshold_override; // default q_{1-alpha/m}
    bool lazy_rows = true;
};

struct EligibilityOutcome {
    std::vector<EligibilityRecord> records;
    double threshold = 0.0;
    Matrix data_summaries; // n1 x m, reused by downstream polytopes
    std::size_t n1 = 0, k = 0, m = 0;

    std::size_t eligible_count() const {
        std::size_t n = 0;
        for (const auto& r : records) n += r.eligible ? 1 : 0;
        return n;
    }
};

namespace detail {

inline Matrix summarize_series(const std::vector<TimeSeries>& series, const FrequencyBand& band1,
                               const FrequencyBand& band2) {
    if (series.empty()) throw invalid_input("no time series given");
    Matrix out(series.size(), summary_dim);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const SummaryVector s = extract_summary(series[i], band1, band2);
        for (std::size_t r = 0; r < summary_dim; ++r) out(i, r) = s[r];
    }
    return out;
}

// k x m summary matrix of the model run at fixed e over the shared a-samples
inline Matrix simulate_summaries(const SimulationModel& model, const Matrix& a_samples,
                                 std::span<const double> e, const FrequencyBand& band1,
                                 const FrequencyBand& band2) {
    Matrix out(a_samples.rows(), summary_dim);
    for (std::size_t j = 0; j < a_samples.rows(); ++j) {
        std::span<const double> a(a_samples.row(j), a_samples.cols());
        const SummaryVector s = extract_summary(model.simulate(a, e), band1, band2);
        for (std::size_t r = 0; r < summary_dim; ++r) out(j, r) = s[r];
    }
    return out;
}

} // namespace detail

/// Algorithm: simulate the model over the shared a-samples at every sampled e,
/// summarize, solve the min-q LP, and flag e eligible iff
/// q* <= q_{1-alpha/m}. Model/solver failures are recorded per sample; the run
/// only fails when every record does.
inline EligibilityOutcome construct_eligibility_set(
    const std::vector<TimeSeries>& data, const SimulationModel& model, const Matrix& e_samples,
    const Matrix& a_samples, double alpha, const FrequencyBand& band1, const FrequencyBand& band2,
    const EligibilityOptions& opts = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("alpha must be in (0,1)");
    if (e_samples.rows() == 0 || a_samples.rows() == 0)
        throw invalid_input("eligibility: empty e or a samples");

    EligibilityOutcome out;
    out.data_summaries = detail::summarize_series(data, band1, band2);
    out.n1 = data.size();
    out.k = a_samples.rows();
    out.m = summary_dim;
    out.threshold = opts.threshold_override
                        ? *opts.threshold_override
                        : kolmogorov_quantile(1.0 - alpha / double(summary_dim));
    out.records.resize(e_samples.rows());

    std::vector<std::unique_ptr<SimulationModel>> forks(opts.jobs ? opts.jobs : 1);
    for (std::size_t w = 1; w < forks.size(); ++w) forks[w] = model.fork_worker();

    parallel_for(e_samples.rows(), opts.jobs, [&](std::size_t worker, std::size_t l) {
        const SimulationModel& m = forks[worker] ? *forks[worker] : model;
        EligibilityRecord& rec = out.records[l];
        rec.e.assign(e_samples.row(l), e_samples.row(l) + e_samples.cols());
        try {
            const Matrix sims = detail::simulate_summaries(m, a_samples, rec.e, band1, band2);
            const IndicatorTensor tensor = build_indicator_tensor(out.data_summaries, sims);
            MinQSolution sol = solve_min_q(tensor, opts.lazy_rows);
            rec.q_star = sol.q_star;
            rec.eligible = sol.q_star <= out.threshold;
            if (opts.keep_witness) rec.witness_weights = std::move(sol.weights);
        } catch (const std::exception& ex) {
            rec.error = ex.what();
            rec.eligible = false;
        }
    });

    bool any_ok = false;
    for (const auto& r : out.records) any_ok |= r.ok();
    if (!any_ok)
        throw model_error("eligibility: every record failed; first error: " +
                          out.records.front().error);
    return out;
}

struct DimScore {
    std::size_t dim = 0;
    double score = 0.0;
};

namespace detail {

inline double percentile(std::vector<double> sorted, double p) {
    const double pos = p * double(sorted.size() - 1);
    const std::size_t i = std::size_t(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - double(i);
    return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

} // namespace detail

/// Range-shrinkage score per epistemic dimension:
/// 1 - width([p5, p95] of eligible values) / prior width, ranked descending.
/// High score = the data pins that dimension down the most.
inline std::vector<DimScore> range_shrinkage_ranking(const std::vector<EligibilityRecord>& records,
                                                     const Box& prior_box) {
    prior_box.validate();
    std::vector<std::vector<double>> per_dim(prior_box.dim());
    for (const auto& rec : records) {
        if (!rec.eligible || !rec.ok()) continue;
        if (rec.e.size() != prior_box.dim())
            throw invalid_input("ranking: record dimension mismatch");
        for (std::size_t d = 0; d < prior_box.dim(); ++d) per_dim[d].push_back(rec.e[d]);
    }
    if (per_dim.empty() || per_dim[0].empty())
        throw empty_set_error("range_shrinkage_ranking: no eligible records");

    std::vector<DimScore> scores(prior_box.dim());
    for (std::size_t d = 0; d < prior_box.dim(); ++d) {
        std::sort(per_dim[d].begin(), per_dim[d].end());
        const double width = prior_box.hi[d] - prior_box.lo[d];
        const double trimmed =
            detail::percentile(per_dim[d], 0.95) - detail::percentile(per_dim[d], 0.05);
        scores[d].dim = d;
        scores[d].score = width <= 0.0 ? 1.0 : std::clamp(1.0 - trimmed / width, 0.0, 1.0);
    }
    std::sort(scores.begin(), scores.end(), [](const DimScore& a, const DimScore& b) {
        return a.score > b.score || (a.score == b.score && a.dim < b.dim);
    });
    return scores;
}

struct N1StudyRow {
    std::size_t size = 0;
    std::uint64_t seed = 0;
    double eligible_fraction = 0.0;
    std::size_t eligible_count = 0;
    // min/max of eligible values per epistemic dimension (NaN when none)
    std::vector<std::pair<double, double>> dim_ranges;
};

/// Subsampling study: for each (size, seed) draw `size` data series without
/// replacement and rerun the eligibility construction against the same shared
/// e- and a-samples. Simulation summaries are computed once and reused; only
/// the data side of the LP changes.
inline std::vector<N1StudyRow> n1_impact_study(
    const std::vector<TimeSeries>& data, const SimulationModel& model, const Matrix& e_samples,
    const Matrix& a_samples, double alpha, const FrequencyBand& band1, const FrequencyBand& band2,
    const std::vector<std::size_t>& sizes, const std::vector<std::uint64_t>& seeds,
    const EligibilityOptions& opts = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("alpha must be in (0,1)");
    const std::size_t n1 = data.size();
    for (std::size_t s : sizes)
        if (s < 1 || s > n1) throw invalid_input("n1 study: size must be in [1, n1]");
    if (sizes.empty() || seeds.empty()) throw invalid_input("n1 study: need sizes and seeds");

    const Matrix data_summaries = detail::summarize_series(data, band1, band2);
    const double threshold = opts.threshold_override
                                 ? *opts.threshold_override
                                 : kolmogorov_quantile(1.0 - alpha / double(summary_dim));

    const std::size_t n2 = e_samples.rows();
    // cache sim summaries per e; they do not depend on the data subsample
    const std::size_t cache_bytes = n2 * a_samples.rows() * summary_dim * sizeof(double);
    std::vector<Matrix> sim_cache;
    if (cache_bytes <= (std::size_t(1) << 29)) {
        sim_cache.resize(n2);
        std::vector<std::unique_ptr<SimulationModel>> forks(opts.jobs ? opts.jobs : 1);
        for (std::size_t w = 1; w < forks.size(); ++w) forks[w] = model.fork_worker();
        parallel_for(n2, opts.jobs, [&](std::size_t worker, std::size_t l) {
            const SimulationModel& m = forks[worker] ? *forks[worker] : model;
            std::span<const double> e(e_samples.row(l), e_samples.cols());
            sim_cache[l] = detail::simulate_summaries(m, a_samples, e, band1, band2);
        });
    }

    std::vector<N1StudyRow> table;
    for (std::size_t size : sizes) {
        for (std::uint64_t seed : seeds) {
            // partial Fisher-Yates subsample without replacement
            std::vector<std::size_t> idx(n1);
            std::iota(idx.begin(), idx.end(), 0);
            Rng rng(seed);
            for (std::size_t i = 0; i < size; ++i)
                std::swap(idx[i], idx[i + rng.below(n1 - i)]);
            Matrix sub(size, summary_dim);
            for (std::size_t i = 0; i < size; ++i)
                for (std::size_t r = 0; r < summary_dim; ++r) sub(i, r) = data_summaries(idx[i], r);

            N1StudyRow row;
            row.size = size;
            row.seed = seed;
            row.dim_ranges.assign(e_samples.cols(),
                                  {std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()});
            std::vector<char> eligible(n2, 0);
            std::vector<std::unique_ptr<SimulationModel>> forks(opts.jobs ? opts.jobs : 1);
            if (sim_cache.empty())
                for (std::size_t w = 1; w < forks.size(); ++w) forks[w] = model.fork_worker();
            parallel_for(n2, opts.jobs, [&](std::size_t worker, std::size_t l) {
                std::span<const double> e(e_samples.row(l), e_samples.cols());
                const Matrix& sims =
                    sim_cache.empty()
                        ? detail::simulate_summaries(forks[worker] ? *forks[worker] : model,
                                                     a_samples, e, band1, band2)
                        : sim_cache[l];
                const IndicatorTensor tensor = build_indicator_tensor(sub, sims);
                eligible[l] = solve_min_q(tensor, opts.lazy_rows).q_star <= threshold ? 1 : 0;
            });
            for (std::size_t l = 0; l < n2; ++l) {
                if (!eligible[l]) continue;
                ++row.eligible_count;
                for (std::size_t d = 0; d < e_samples.cols(); ++d) {
                    const double v = e_samples(l, d);
                    auto& [lo, hi] = row.dim_ranges[d];
                    if (std::isnan(lo) || v < lo) lo = v;
                    if (std::isnan(hi) || v > hi) hi = v;
                }
            }
            row.eligible_fraction = double(row.eligible_count) / double(n2);
            table.push_back(std::move(row));
        }
    }
    return table;
}

} // namespace uqcal
