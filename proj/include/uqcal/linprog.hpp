#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "uqcal/errors.hpp"

namespace uqcal::lp {

enum class Rel { le, ge, eq };
enum class Sense { minimize, maximize };
enum class Status { optimal, infeasible, unbounded };

struct Row {
    std::vector<double> a;
    Rel rel = Rel::le;
    double rhs = 0.0;
};

/// min/max c.x subject to rows, x >= 0.
struct Problem {
    std::size_t n = 0;
    std::vector<double> c;
    Sense sense = Sense::minimize;
    std::vector<Row> rows;

    Row& add_row(Rel rel, double rhs) {
        rows.push_back(Row{std::vector<double>(n, 0.0), rel, rhs});
        return rows.back();
    }
};

struct Solution {
    Status status = Status::optimal;
    double value = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
};

struct Options {
    double tol_pivot = 1e-9; // entering/ratio threshold
    double tol_feas = 1e-7;  // phase-1 residual accepted as feasible
    std::size_t max_pivots = 0; // 0 = automatic from problem size
};

/// Dense two-phase tableau simplex. Deterministic: Dantzig entering rule with
/// lowest-index ties, switching permanently to Bland's rule after a stall, so
/// degenerate problems terminate. All variables are nonnegative.
class Simplex {
  public:
    static Solution solve(const Problem& prob, const Options& opt = {}) {
        Simplex s(prob, opt);
        return s.run();
    }

  private:
    const Problem& p_;
    Options opt_;
    std::size_t m_, n_total_, width_;
    std::size_t n_slack_ = 0, n_art_ = 0;
    std::vector<double> tab_;      // m_ rows, each width_ = n_total_ + 1 (rhs last)
    std::vector<double> cost_;     // reduced phase-2 costs, width_
    std::vector<double> w_;        // reduced phase-1 costs, width_
    std::vector<int> basis_;       // basic variable per row
    std::vector<char> enterable_;  // artificials are never allowed to enter
    std::size_t pivots_ = 0;
    bool bland_ = false;
    std::size_t stall_ = 0;

    double& t(std::size_t i, std::size_t j) { return tab_[i * width_ + j]; }
    double t(std::size_t i, std::size_t j) const { return tab_[i * width_ + j]; }

    Simplex(const Problem& p, const Options& opt) : p_(p), opt_(opt), m_(p.rows.size()) {
        if (p_.c.size() != p_.n) throw solver_error("objective size mismatch", m_, p_.n);
        for (const auto& r : p_.rows)
            if (r.a.size() != p_.n) throw solver_error("row size mismatch", m_, p_.n);

        for (const auto& r : p_.rows) {
            const bool flip = r.rhs < 0.0;
            const Rel rel = !flip ? r.rel
                                  : (r.rel == Rel::le ? Rel::ge : (r.rel == Rel::ge ? Rel::le : Rel::eq));
            if (rel == Rel::le)
                ++n_slack_;
            else if (rel == Rel::ge)
                ++n_slack_, ++n_art_;
            else
                ++n_art_;
        }
        n_total_ = p_.n + n_slack_ + n_art_;
        width_ = n_total_ + 1;
        tab_.assign(m_ * width_, 0.0);
        basis_.assign(m_, -1);
        enterable_.assign(n_total_, 1);
        cost_.assign(width_, 0.0);
        w_.assign(width_, 0.0);

        const double sign = p_.sense == Sense::minimize ? 1.0 : -1.0;
        for (std::size_t j = 0; j < p_.n; ++j) cost_[j] = sign * p_.c[j];

        std::size_t slack_col = p_.n, art_col = p_.n + n_slack_;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& r = p_.rows[i];
            const bool flip = r.rhs < 0.0;
            const double s = flip ? -1.0 : 1.0;
            for (std::size_t j = 0; j < p_.n; ++j) t(i, j) = s * r.a[j];
            t(i, n_total_) = s * r.rhs;
            const Rel rel = !flip ? r.rel
                                  : (r.rel == Rel::le ? Rel::ge : (r.rel == Rel::ge ? Rel::le : Rel::eq));
            if (rel == Rel::le) {
                t(i, slack_col) = 1.0;
                basis_[i] = int(slack_col++);
            } else if (rel == Rel::ge) {
                t(i, slack_col) = -1.0; // surplus
                ++slack_col;
                t(i, art_col) = 1.0;
                basis_[i] = int(art_col);
                enterable_[art_col++] = 0;
            } else {
                t(i, art_col) = 1.0;
                basis_[i] = int(art_col);
                enterable_[art_col++] = 0;
            }
        }
        // phase-1 reduced costs: w_j = -sum of artificial-basis rows
        if (n_art_ > 0)
            for (std::size_t i = 0; i < m_; ++i)
                if (std::size_t(basis_[i]) >= p_.n + n_slack_)
                    for (std::size_t j = 0; j < width_; ++j) w_[j] -= t(i, j);
        for (std::size_t j = p_.n + n_slack_; j < n_total_; ++j) w_[j] = 0.0;

        if (opt_.max_pivots == 0) opt_.max_pivots = 20000 + 60 * (m_ + n_total_);
    }

    void pivot(std::size_t pr, std::size_t pc) {
        const double pv = t(pr, pc);
        double* prow = &tab_[pr * width_];
        const double inv = 1.0 / pv;
        for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
        prow[pc] = 1.0; // exact
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == pr) continue;
            double* row = &tab_[i * width_];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
            row[pc] = 0.0;
        }
        for (auto* obj : {&cost_, &w_}) {
            const double f = (*obj)[pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) (*obj)[j] -= f * prow[j];
            (*obj)[pc] = 0.0;
        }
        basis_[pr] = int(pc);
        ++pivots_;
    }

    // entering column for the given reduced-cost row, or npos if optimal
    std::size_t choose_entering(const std::vector<double>& red) const {
        constexpr auto npos = std::numeric_limits<std::size_t>::max();
        if (bland_) {
            for (std::size_t j = 0; j < n_total_; ++j)
                if (enterable_[j] && red[j] < -opt_.tol_pivot) return j;
            return npos;
        }
        std::size_t best = npos;
        double best_val = -opt_.tol_pivot;
        for (std::size_t j = 0; j < n_total_; ++j)
            if (enterable_[j] && red[j] < best_val) {
                best_val = red[j];
                best = j;
            }
        return best;
    }

    // min-ratio row; ties resolved toward the smallest basic variable index
    std::size_t choose_leaving(std::size_t pc) const {
        constexpr auto npos = std::numeric_limits<std::size_t>::max();
        std::size_t best = npos;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = t(i, pc);
            if (a <= opt_.tol_pivot) continue;
            const double ratio = t(i, n_total_) / a;
            if (best == npos || ratio < best_ratio - 1e-12 ||
                (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[best])) {
                best = i;
                best_ratio = ratio;
            }
        }
        return best;
    }

    // returns false if unbounded in this phase
    bool iterate(const std::vector<double>& red, double& last_obj) {
        constexpr auto npos = std::numeric_limits<std::size_t>::max();
        while (true) {
            const std::size_t pc = choose_entering(red);
            if (pc == npos) return true;
            const std::size_t pr = choose_leaving(pc);
            if (pr == npos) return false;
            if (pivots_ >= opt_.max_pivots)
                throw solver_error("simplex pivot limit exceeded", m_, n_total_);
            pivot(pr, pc);
            const double obj = current_phase_obj(red);
            if (obj < last_obj - 1e-12) {
                last_obj = obj;
                stall_ = 0;
            } else if (!bland_ && ++stall_ > 2 * (m_ + 8)) {
                bland_ = true; // degeneracy stall: finish under Bland's rule
            }
        }
    }

    double current_phase_obj(const std::vector<double>& red) const {
        // reduced-cost rows carry -objective in the rhs cell
        return -red[n_total_];
    }

    // after phase 1: drop artificial columns, and rows whose artificial could
    // not be pivoted out (those are redundant). Narrower tableau, cheaper
    // phase-2 pivots.
    void compact() {
        const std::size_t new_total = p_.n + n_slack_;
        const std::size_t new_width = new_total + 1;
        std::vector<char> keep_row(m_, 1);
        for (std::size_t i = 0; i < m_; ++i)
            if (std::size_t(basis_[i]) >= new_total) keep_row[i] = 0;
        std::vector<double> tab;
        std::vector<int> basis;
        tab.reserve(m_ * new_width);
        for (std::size_t i = 0; i < m_; ++i) {
            if (!keep_row[i]) continue;
            const double* row = &tab_[i * width_];
            tab.insert(tab.end(), row, row + new_total);
            tab.push_back(row[n_total_]);
            basis.push_back(basis_[i]);
        }
        cost_[new_total] = cost_[n_total_];
        cost_.resize(new_width);
        tab_ = std::move(tab);
        basis_ = std::move(basis);
        m_ = basis_.size();
        n_total_ = new_total;
        width_ = new_width;
        enterable_.assign(n_total_, 1);
        w_.assign(width_, 0.0);
    }

    Solution run() {
        double last;
        if (n_art_ > 0) {
            last = current_phase_obj(w_);
            iterate(w_, last); // phase 1 is always bounded below by 0
            double infeas = -w_[n_total_];
            if (infeas > opt_.tol_feas) return {Status::infeasible, infeas, {}, pivots_};
            // drive any residual artificial out of the basis if possible
            for (std::size_t i = 0; i < m_; ++i) {
                if (std::size_t(basis_[i]) < p_.n + n_slack_) continue;
                for (std::size_t j = 0; j < p_.n + n_slack_; ++j) {
                    if (std::abs(t(i, j)) > opt_.tol_pivot) {
                        pivot(i, j);
                        break;
                    }
                }
            }
            compact();
        }
        bland_ = false;
        stall_ = 0;
        last = current_phase_obj(cost_);
        if (!iterate(cost_, last)) return {Status::unbounded, 0.0, {}, pivots_};

        Solution sol;
        sol.status = Status::optimal;
        sol.pivots = pivots_;
        sol.x.assign(p_.n, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (std::size_t(basis_[i]) < p_.n) sol.x[basis_[i]] = t(i, n_total_);
        for (double& v : sol.x)
            if (v < 0.0 && v > -1e-11) v = 0.0;
        double z = 0.0;
        for (std::size_t j = 0; j < p_.n; ++j) z += p_.c[j] * sol.x[j];
        sol.value = z;
        return sol;
    }
};

inline Solution solve(const Problem& prob, const Options& opt = {}) {
    return Simplex::solve(prob, opt);
}

} // namespace uqcal::lp
