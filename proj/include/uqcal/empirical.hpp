#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "uqcal/errors.hpp"

namespace uqcal {

/// Empirical CDF of a sample. Left/right limits are exact counting
/// definitions; ties are never perturbed.
struct Ecdf {
    std::vector<double> sorted_points;
    std::size_t n = 0;

    Ecdf() = default;
    explicit Ecdf(std::vector<double> points) : sorted_points(std::move(points)) {
        if (sorted_points.empty()) throw invalid_input("ecdf needs at least one point");
        for (double v : sorted_points)
            if (!std::isfinite(v)) throw invalid_input("ecdf point not finite");
        std::sort(sorted_points.begin(), sorted_points.end());
        n = sorted_points.size();
    }
};

/// F(x-) = (#points strictly below x) / n
inline double ecdf_left(const Ecdf& e, double x) {
    const auto it = std::lower_bound(e.sorted_points.begin(), e.sorted_points.end(), x);
    return double(it - e.sorted_points.begin()) / double(e.n);
}

/// F(x+) = (#points <= x) / n
inline double ecdf_right(const Ecdf& e, double x) {
    const auto it = std::upper_bound(e.sorted_points.begin(), e.sorted_points.end(), x);
    return double(it - e.sorted_points.begin()) / double(e.n);
}

/// Atoms of probability on sample points; the weighted counterpart of an ECDF.
struct WeightedSample {
    std::vector<double> points;
    std::vector<double> weights;

    void validate() const {
        if (points.size() != weights.size()) throw invalid_input("weighted sample size mismatch");
        if (points.empty()) throw invalid_input("weighted sample is empty");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw invalid_input("weighted sample has negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw invalid_input("weights must sum to 1");
    }
};

/// sup_x | sum_j W_j 1{p_j <= x} - F(x) |, computed exactly by walking the
/// union of breakpoints and checking both the value and the left limit there.
inline double ks_sup(const WeightedSample& ws, const Ecdf& ecdf) {
    ws.validate();
    std::vector<std::size_t> order(ws.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ws.points[a] < ws.points[b]; });

    double sup = 0.0;
    double g = 0.0, f = 0.0; // running right-limits of the two step functions
    std::size_t iw = 0, ie = 0;
    const auto& ep = ecdf.sorted_points;
    while (iw < order.size() || ie < ep.size()) {
        double x;
        if (iw < order.size() && (ie == ep.size() || ws.points[order[iw]] <= ep[ie]))
            x = ws.points[order[iw]];
        else
            x = ep[ie];
        sup = std::max(sup, std::abs(g - f)); // left limit at x
        while (iw < order.size() && ws.points[order[iw]] == x) g += ws.weights[order[iw++]];
        while (ie < ep.size() && ep[ie] == x) ++ie;
        f = double(ie) / double(ecdf.n);
        sup = std::max(sup, std::abs(g - f)); // value at x
    }
    return sup;
}

namespace detail {

// CDF of sup of a standard Brownian bridge. Alternating series for x >= 1,
// Jacobi theta form for small x where the alternating series converges too
// slowly. Terms truncated below 1e-12.
inline double kolmogorov_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x < 1.0) {
        const double c = std::sqrt(2.0 * M_PI) / x;
        double sum = 0.0;
        for (int j = 1; j < 1000; j += 2) {
            const double term = std::exp(-double(j) * double(j) * M_PI * M_PI / (8.0 * x * x));
            sum += term;
            if (term < 1e-12) break;
        }
        return c * sum;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j < 1000; ++j) {
        const double term = std::exp(-2.0 * double(j) * double(j) * x * x);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return 1.0 - 2.0 * sum;
}

} // namespace detail

/// Quantile of the Kolmogorov distribution (sup of a Brownian bridge),
/// solved by bisection to 1e-6. This is the q in the threshold q_{1-alpha/m}.
inline double kolmogorov_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw invalid_input("kolmogorov_quantile requires p in (0,1)");
    double lo = 1e-8, hi = 10.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (detail::kolmogorov_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace uqcal
