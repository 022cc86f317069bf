#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "uqcal/errors.hpp"

namespace uqcal {

/// One output trajectory y(0..T) on a fixed sampling grid.
struct TimeSeries {
    std::vector<double> values; // signal units
    double dt = 0.0;            // seconds per sample

    void validate() const {
        if (values.size() < 2) throw invalid_input("time series needs at least 2 samples");
        if (!(dt > 0.0)) throw invalid_input("time series dt must be > 0");
        for (double v : values)
            if (!std::isfinite(v)) throw invalid_input("time series contains non-finite value");
    }
};

struct FrequencyBand {
    double lo = 0.0; // Hz, inclusive
    double hi = 0.0; // Hz, inclusive

    void validate() const {
        if (!(lo >= 0.0) || !(hi >= lo)) throw invalid_input("frequency band requires 0 <= lo <= hi");
    }
};

inline FrequencyBand default_band1() { return {0.0, 1.59}; }
inline FrequencyBand default_band2() { return {1.71, 5.98}; }

/// One-sided DFT coefficients C_k with their grid frequencies.
///
/// Convention (used everywhere in this project): the series is written as
///   y(t) = sum_k C_k exp(-2*pi*i*k*t/N),  t = 0..N-1,
/// so the analysis kernel is exp(+2*pi*i*k*t/N) and C_0 is the signal mean.
/// Under this convention a pure cosine of amplitude 1 on the grid gives
/// re = +1/2 at its frequency, and a pure sine gives im = +1/2.
struct SpectrumSlice {
    std::vector<double> freqs; // Hz, strictly increasing from 0
    std::vector<double> re;
    std::vector<double> im;
};

inline constexpr std::size_t summary_dim = 12;

/// The 12-slot spectral summary. Fixed layout:
///   0 re-max value band1   1 its frequency
///   2 re-min value band1   3 its frequency
///   4 re-max value band2   5 its frequency
///   6 re-min value band2   7 its frequency
///   8 im-min value band1   9 its frequency
///  10 im-max value band2  11 its frequency
struct SummaryVector {
    std::array<double, summary_dim> entries{};

    double operator[](std::size_t i) const { return entries[i]; }
    double& operator[](std::size_t i) { return entries[i]; }
};

inline const std::array<const char*, summary_dim>& summary_names() {
    static const std::array<const char*, summary_dim> names = {
        "re_max_val_b1", "re_max_freq_b1", "re_min_val_b1", "re_min_freq_b1",
        "re_max_val_b2", "re_max_freq_b2", "re_min_val_b2", "re_min_freq_b2",
        "im_min_val_b1", "im_min_freq_b1", "im_max_val_b2", "im_max_freq_b2"};
    return names;
}

namespace detail {

// Shared cos/sin table for the N-th roots of unity. Summaries are computed for
// tens of thousands of equal-length series per run; rebuilding the table per
// call would be the dominant cost.
inline std::shared_ptr<const std::vector<double>> unit_circle_table(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<double>>(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        const double th = 2.0 * M_PI * double(j) / double(n);
        (*table)[2 * j] = std::cos(th);
        (*table)[2 * j + 1] = std::sin(th);
    }
    if (cache.size() > 64) cache.clear(); // unbounded growth guard
    cache.emplace(n, table);
    return table;
}

// C_k = (1/N) sum_t y[t] * exp(+2*pi*i*k*t/N), via table lookup at (k*t) mod N.
inline void dft_coefficient(const std::vector<double>& y, const std::vector<double>& tab,
                            std::size_t k, double& re, double& im) {
    const std::size_t n = y.size();
    double sr = 0.0, si = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
        sr += y[t] * tab[2 * idx];
        si += y[t] * tab[2 * idx + 1];
        idx += k;
        if (idx >= n) idx -= n;
    }
    re = sr / double(n);
    im = si / double(n);
}

// Inclusive index range of grid frequencies k/(N*dt) inside [band.lo, band.hi].
// Returns {1, 0} when empty.
inline std::pair<std::size_t, std::size_t> band_k_range(std::size_t n, double dt,
                                                        const FrequencyBand& band,
                                                        std::size_t k_max) {
    const double scale = double(n) * dt;
    double lo = std::ceil(band.lo * scale - 1e-9);
    double hi = std::floor(band.hi * scale + 1e-9);
    if (lo < 0) lo = 0;
    auto klo = std::size_t(lo);
    auto khi = hi < 0 ? std::size_t(0) : std::min(std::size_t(hi), k_max);
    if (hi < lo || klo > k_max) return {1, 0};
    return {klo, khi};
}

} // namespace detail

/// One-sided DFT of a series (k = 0 .. floor(N/2)); see SpectrumSlice for the
/// sign/normalization convention. freqs[k] = k/(N*dt).
inline SpectrumSlice dft(const TimeSeries& ts) {
    ts.validate();
    const std::size_t n = ts.values.size();
    const std::size_t k_max = n / 2;
    auto tab = detail::unit_circle_table(n);
    SpectrumSlice out;
    out.freqs.resize(k_max + 1);
    out.re.resize(k_max + 1);
    out.im.resize(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) {
        out.freqs[k] = double(k) / (double(n) * ts.dt);
        detail::dft_coefficient(ts.values, *tab, k, out.re[k], out.im[k]);
    }
    return out;
}

/// Band-limited peak extraction into the fixed 12-slot layout. Extrema ties
/// break toward the lowest frequency. Requires band1.lo == 0 and
/// band1.hi < band2.lo (non-overlapping, band1 anchored at DC).
inline SummaryVector extract_summary(const TimeSeries& ts, const FrequencyBand& band1,
                                     const FrequencyBand& band2) {
    ts.validate();
    band1.validate();
    band2.validate();
    if (band1.lo != 0.0) throw invalid_input("band1 must start at 0 Hz");
    if (!(band1.hi < band2.lo)) throw invalid_input("bands must be non-overlapping and ordered");

    const std::size_t n = ts.values.size();
    const std::size_t k_max = n / 2;
    const auto [k1lo, k1hi] = detail::band_k_range(n, ts.dt, band1, k_max);
    const auto [k2lo, k2hi] = detail::band_k_range(n, ts.dt, band2, k_max);
    if (k1lo > k1hi) throw invalid_input("band1 contains no grid frequency for this series");
    if (k2lo > k2hi) throw invalid_input("band2 contains no grid frequency for this series");

    auto tab = detail::unit_circle_table(n);
    const double fscale = 1.0 / (double(n) * ts.dt);

    struct Extremum {
        double val, freq;
    };
    auto scan = [&](std::size_t klo, std::size_t khi) {
        // returns {re-max, re-min, im-min, im-max} with lowest-frequency ties
        std::array<Extremum, 4> ex{};
        bool first = true;
        for (std::size_t k = klo; k <= khi; ++k) {
            double re, im;
            detail::dft_coefficient(ts.values, *tab, k, re, im);
            const double f = double(k) * fscale;
            if (first) {
                ex = {Extremum{re, f}, {re, f}, {im, f}, {im, f}};
                first = false;
                continue;
            }
            if (re > ex[0].val) ex[0] = {re, f};
            if (re < ex[1].val) ex[1] = {re, f};
            if (im < ex[2].val) ex[2] = {im, f};
            if (im > ex[3].val) ex[3] = {im, f};
        }
        return ex;
    };

    const auto b1 = scan(k1lo, k1hi);
    const auto b2 = scan(k2lo, k2hi);

    SummaryVector s;
    s[0] = b1[0].val; s[1] = b1[0].freq;
    s[2] = b1[1].val; s[3] = b1[1].freq;
    s[4] = b2[0].val; s[5] = b2[0].freq;
    s[6] = b2[1].val; s[7] = b2[1].freq;
    s[8] = b1[2].val; s[9] = b1[2].freq;
    s[10] = b2[3].val; s[11] = b2[3].freq;
    return s;
}

/// Diagnostic resynthesis from the six retained peaks. A real one-sided
/// coefficient v at frequency f contributes v (f = 0) or 2*v*cos(2*pi*f*t*dt);
/// an imaginary peak contributes 2*v*sin(2*pi*f*t*dt). No accuracy contract
/// beyond qualitative fit.
inline TimeSeries reconstruct_from_summary(const SummaryVector& sv, std::size_t t_count,
                                           double dt) {
    if (t_count < 1 || !(dt > 0.0)) throw invalid_input("reconstruct: need T >= 1 and dt > 0");
    for (double v : sv.entries)
        if (!std::isfinite(v)) throw invalid_input("reconstruct: non-finite summary entry");
    TimeSeries out;
    out.dt = dt;
    out.values.assign(t_count + 1, 0.0);
    for (std::size_t t = 0; t <= t_count; ++t) {
        const double tau = double(t) * dt;
        double y = 0.0;
        for (std::size_t p = 0; p < 8; p += 2) { // four real-part peaks
            const double v = sv[p], f = sv[p + 1];
            y += (f == 0.0) ? v : 2.0 * v * std::cos(2.0 * M_PI * f * tau);
        }
        y += 2.0 * sv[8] * std::sin(2.0 * M_PI * sv[9] * tau);
        y += 2.0 * sv[10] * std::sin(2.0 * M_PI * sv[11] * tau);
        out.values[t] = y;
    }
    return out;
}

} // namespace uqcal
