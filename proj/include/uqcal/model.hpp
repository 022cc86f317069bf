#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "uqcal/errors.hpp"
#include "uqcal/matrix.hpp"
#include "uqcal/rng.hpp"
#include "uqcal/summary.hpp"

namespace uqcal {

/// Axis-aligned box of variable bounds.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    void validate() const {
        if (lo.size() != hi.size() || lo.empty()) throw invalid_input("box lo/hi size mismatch");
        for (std::size_t d = 0; d < lo.size(); ++d) {
            if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || lo[d] > hi[d])
                throw invalid_input("box requires finite lo <= hi");
        }
    }

    bool contains(std::span<const double> x, double slack = 1e-12) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t d = 0; d < lo.size(); ++d)
            if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
        return true;
    }
};

/// i.i.d. uniform rows over the box; reproducible given the seed.
/// Fill order is row-major, so the first dim() draws form row 0.
inline Matrix sample_uniform(const Box& box, std::size_t n, std::uint64_t seed) {
    box.validate();
    Rng rng(seed);
    Matrix out(n, box.dim());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < box.dim(); ++d) out(i, d) = rng.uniform(box.lo[d], box.hi[d]);
    return out;
}

struct DesignPoint {
    std::vector<double> theta;

    void validate() const {
        if (theta.empty()) throw invalid_input("design point is empty");
        for (double v : theta)
            if (!std::isfinite(v)) throw invalid_input("design point not finite");
    }
};

struct ModelInfo {
    std::size_t dim_a = 0;
    std::size_t dim_e = 0;
    std::size_t dim_theta = 0;
    std::size_t n_requirements = 0;
    std::size_t n_samples = 0; // T+1, 0 if unknown until first call
    double dt = 0.0;           // 0 if unknown until first call
};

/// Black-box simulation contract: a trajectory per (a, e) and requirement
/// margins g_1..g_G per (a, e, theta), deterministic in their inputs.
/// g_i >= 0 means requirement i is violated.
class SimulationModel {
  public:
    virtual ~SimulationModel() = default;
    virtual ModelInfo info() const = 0;
    virtual TimeSeries simulate(std::span<const double> a, std::span<const double> e) const = 0;
    virtual std::vector<double> requirements(std::span<const double> a, std::span<const double> e,
                                             const DesignPoint& theta) const = 0;
    /// Fresh handle for a worker thread, or nullptr when *this is already
    /// safe to share across threads.
    virtual std::unique_ptr<SimulationModel> fork_worker() const { return nullptr; }
};

/// Two-component oscillator used for verification: one seasonal component per
/// frequency band, amplitudes driven by e1/e3, frequencies by e2/e4 with
/// aleatory jitter from a so that all 12 spectral summaries vary continuously.
///
///   f1 = 0.35 + e2/4 + 0.6*a1            (inside band1 for all inputs)
///   f2 = 2.30 + e4/2 + 1.0*a2            (inside band2 for all inputs)
///   y(t) = e1 sin(2 pi f1 t dt + 2 pi a1)
///        + (0.3 + a2) e3 cos(2 pi f2 t dt + 2 pi a2)
///
/// Requirements compare the trajectory's peak magnitude, RMS and range
/// against design-dependent thresholds tau_i = theta_{3i} + theta_{3i+1}/2 +
/// theta_{3i+2}/4; failure rates at theta_baseline are non-degenerate.
class SyntheticOscillator final : public SimulationModel {
  public:
    static constexpr std::size_t n_samples = 256;
    static constexpr double dt = 1.0 / 30.0;

    static Box box_a() { return Box{{0.0, 0.0}, {1.0, 1.0}}; }
    static Box box_e() { return Box{{0.0, 0.0, 0.0, 0.0}, {2.0, 2.0, 2.0, 2.0}}; }

    static DesignPoint theta_baseline() {
        return DesignPoint{{1.0, 0.5, 0.2, 0.55, 0.3, 0.1, 2.0, 1.0, 0.4}};
    }

    ModelInfo info() const override { return {2, 4, 9, 3, n_samples, dt}; }

    TimeSeries simulate(std::span<const double> a, std::span<const double> e) const override {
        if (!box_a().contains(a)) throw invalid_input("oscillator: a outside A = [0,1]^2");
        if (!box_e().contains(e)) throw invalid_input("oscillator: e outside E0 = [0,2]^4");
        const double f1 = 0.35 + e[1] / 4.0 + 0.6 * a[0];
        const double f2 = 2.30 + e[3] / 2.0 + 1.0 * a[1];
        const double amp2 = (0.3 + a[1]) * e[2];
        TimeSeries ts;
        ts.dt = dt;
        ts.values.resize(n_samples);
        for (std::size_t t = 0; t < n_samples; ++t) {
            const double tau = double(t) * dt;
            ts.values[t] = e[0] * std::sin(2.0 * M_PI * (f1 * tau + a[0])) +
                           amp2 * std::cos(2.0 * M_PI * (f2 * tau + a[1]));
        }
        return ts;
    }

    std::vector<double> requirements(std::span<const double> a, std::span<const double> e,
                                     const DesignPoint& theta) const override {
        theta.validate();
        if (theta.theta.size() != 9) throw invalid_input("oscillator: theta must have dim 9");
        const TimeSeries ts = simulate(a, e);
        double peak = 0.0, ss = 0.0, vmax = ts.values[0], vmin = ts.values[0];
        for (double v : ts.values) {
            peak = std::max(peak, std::abs(v));
            ss += v * v;
            vmax = std::max(vmax, v);
            vmin = std::min(vmin, v);
        }
        const double metrics[3] = {peak, std::sqrt(ss / double(ts.values.size())), vmax - vmin};
        std::vector<double> g(3);
        for (std::size_t i = 0; i < 3; ++i) {
            const double* th = theta.theta.data() + 3 * i;
            const double threshold = th[0] + 0.5 * th[1] + 0.25 * th[2];
            g[i] = metrics[i] - threshold;
        }
        return g;
    }
};

} // namespace uqcal
