#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "uqcal/summary.hpp"

using namespace uqcal;

namespace {

TimeSeries make_series(std::size_t n, double dt, const std::function<double(std::size_t)>& f) {
    TimeSeries ts;
    ts.dt = dt;
    ts.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) ts.values[t] = f(t);
    return ts;
}

TimeSeries on_grid_wave(std::size_t n, double dt, std::size_t k0, bool cosine, double amp = 1.0) {
    return make_series(n, dt, [=](std::size_t t) {
        const double arg = 2.0 * M_PI * double(k0) * double(t) / double(n);
        return amp * (cosine ? std::cos(arg) : std::sin(arg));
    });
}

TimeSeries random_series(std::mt19937_64& gen, std::size_t n, double dt) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return make_series(n, dt, [&](std::size_t) { return u(gen); });
}

} // namespace

TEST_CASE("dft of a constant signal is DC only") {
    const auto ts = make_series(37, 0.25, [](std::size_t) { return 3.5; });
    const auto spec = dft(ts);
    REQUIRE(spec.re[0] == Catch::Approx(3.5).margin(1e-12));
    REQUIRE(spec.im[0] == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t k = 1; k < spec.re.size(); ++k)
        REQUIRE(std::hypot(spec.re[k], spec.im[k]) <= 1e-9);
}

TEST_CASE("dft of on-grid cosine and sine fixes the convention") {
    const std::size_t n = 64, k0 = 4;
    const double dt = 0.1;

    const auto cos_spec = dft(on_grid_wave(n, dt, k0, true));
    REQUIRE(cos_spec.freqs[k0] == Catch::Approx(double(k0) / (n * dt)));
    REQUIRE(cos_spec.re[k0] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(std::abs(cos_spec.im[k0]) <= 1e-9);

    // analysis kernel e^{+i 2 pi k t / N}: a pure sine lands on +i/2
    const auto sin_spec = dft(on_grid_wave(n, dt, k0, false));
    REQUIRE(std::abs(sin_spec.re[k0]) <= 1e-9);
    REQUIRE(sin_spec.im[k0] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("dft matches the direct complex-summation oracle") {
    std::mt19937_64 gen(42);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 16 + std::size_t(gen() % 48);
        const auto ts = random_series(gen, n, 0.05);
        const auto spec = dft(ts);
        for (std::size_t k = 0; k < spec.re.size(); ++k) {
            const auto c = oracle::dft_coefficient(ts.values, k);
            REQUIRE(spec.re[k] == Catch::Approx(c.real()).margin(1e-10));
            REQUIRE(spec.im[k] == Catch::Approx(c.imag()).margin(1e-10));
        }
    }
}

TEST_CASE("dft rejects invalid input") {
    REQUIRE_THROWS_AS(dft(TimeSeries{{1.0}, 0.1}), invalid_input);
    REQUIRE_THROWS_AS(dft(TimeSeries{{1.0, 2.0}, 0.0}), invalid_input);
    REQUIRE_THROWS_AS(dft(TimeSeries{{1.0, std::nan("")}, 0.1}), invalid_input);
}

TEST_CASE("Parseval sanity on random signals") {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t n = 20 + std::size_t(gen() % 45); // even and odd lengths
        const auto ts = random_series(gen, n, 0.125);
        const auto spec = dft(ts);
        double mean_square = 0.0;
        for (double v : ts.values) mean_square += v * v;
        mean_square /= double(n);
        double power = spec.re[0] * spec.re[0] + spec.im[0] * spec.im[0];
        const std::size_t k_max = spec.re.size() - 1;
        for (std::size_t k = 1; k <= k_max; ++k) {
            const double mag2 = spec.re[k] * spec.re[k] + spec.im[k] * spec.im[k];
            const bool self_conjugate = (n % 2 == 0) && (k == n / 2);
            power += self_conjugate ? mag2 : 2.0 * mag2;
        }
        REQUIRE(power == Catch::Approx(mean_square).epsilon(1e-6));
    }
}

TEST_CASE("extract_summary of a constant signal") {
    const double c = 2.25;
    const std::size_t n = 64;
    const double dt = 0.1;
    const auto sv = extract_summary(make_series(n, dt, [=](std::size_t) { return c; }),
                                    default_band1(), default_band2());
    REQUIRE(sv[0] == Catch::Approx(c).margin(1e-12)); // re-max B1 = c at DC
    REQUIRE(sv[1] == 0.0);
    REQUIRE(sv[2] == Catch::Approx(0.0).margin(1e-12)); // re-min B1 = min(0, c)
    // all band2 extrema vanish (up to roundoff in the off-DC coefficients)
    for (std::size_t slot : {4u, 6u, 10u}) REQUIRE(std::abs(sv[slot]) <= 1e-12);
}

TEST_CASE("extrema ties break toward the lowest frequency") {
    // the all-zero signal has bitwise-zero coefficients everywhere, so every
    // slot is an exact tie and must land on its band's lowest grid frequency
    const std::size_t n = 64;
    const double dt = 0.1;
    const double grid = 1.0 / (double(n) * dt);
    const auto sv = extract_summary(make_series(n, dt, [](std::size_t) { return 0.0; }),
                                    default_band1(), default_band2());
    const double b2_first = std::ceil(default_band2().lo / grid - 1e-9) * grid;
    for (std::size_t slot : {0u, 2u, 4u, 6u, 8u, 10u}) REQUIRE(sv[slot] == 0.0);
    REQUIRE(sv[1] == 0.0);
    REQUIRE(sv[3] == 0.0);
    REQUIRE(sv[9] == 0.0);
    REQUIRE(sv[5] == Catch::Approx(b2_first));
    REQUIRE(sv[7] == Catch::Approx(b2_first));
    REQUIRE(sv[11] == Catch::Approx(b2_first));
}

TEST_CASE("extract_summary finds an on-grid band1 cosine peak") {
    const std::size_t n = 64, k0 = 4;
    const double dt = 0.1;
    const auto sv =
        extract_summary(on_grid_wave(n, dt, k0, true), default_band1(), default_band2());
    REQUIRE(sv[0] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(sv[1] == Catch::Approx(double(k0) / (n * dt)));
}

TEST_CASE("extract_summary separates band1 and band2 components") {
    const std::size_t n = 128, k1 = 8, k2 = 40; // 0.625 Hz and 3.125 Hz at dt = 0.1
    const double dt = 0.1;
    auto ts = make_series(n, dt, [&](std::size_t t) {
        return std::cos(2.0 * M_PI * double(k1) * double(t) / double(n)) +
               0.5 * std::cos(2.0 * M_PI * double(k2) * double(t) / double(n));
    });
    const auto sv = extract_summary(ts, default_band1(), default_band2());
    REQUIRE(sv[1] == Catch::Approx(double(k1) / (n * dt)));
    REQUIRE(sv[0] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(sv[5] == Catch::Approx(double(k2) / (n * dt)));
    REQUIRE(sv[4] == Catch::Approx(0.25).margin(1e-9));
}

TEST_CASE("extract_summary validates bands") {
    const auto ts = on_grid_wave(64, 0.1, 4, true);
    REQUIRE_THROWS_AS(extract_summary(ts, FrequencyBand{0.1, 1.0}, default_band2()),
                      invalid_input);
    REQUIRE_THROWS_AS(extract_summary(ts, FrequencyBand{0.0, 2.0}, FrequencyBand{1.5, 3.0}),
                      invalid_input);
    // band with no grid frequency: grid step is 1/6.4 = 0.15625 Hz
    REQUIRE_THROWS_AS(extract_summary(ts, default_band1(), FrequencyBand{1.60, 1.70}),
                      invalid_input);
}

TEST_CASE("summary invariants: band membership, purity, amplitude scaling") {
    std::mt19937_64 gen(99);
    const auto b1 = default_band1(), b2 = default_band2();
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 48 + std::size_t(gen() % 64);
        const auto ts = random_series(gen, n, 1.0 / 30.0);
        const auto sv = extract_summary(ts, b1, b2);
        for (std::size_t slot : {1u, 3u, 9u}) {
            REQUIRE(sv[slot] >= b1.lo - 1e-12);
            REQUIRE(sv[slot] <= b1.hi + 1e-12);
        }
        for (std::size_t slot : {5u, 7u, 11u}) {
            REQUIRE(sv[slot] >= b2.lo - 1e-12);
            REQUIRE(sv[slot] <= b2.hi + 1e-12);
        }
        const auto again = extract_summary(ts, b1, b2);
        REQUIRE(again.entries == sv.entries);

        TimeSeries scaled = ts;
        const double c = 2.5;
        for (double& v : scaled.values) v *= c;
        const auto ssv = extract_summary(scaled, b1, b2);
        for (std::size_t slot : {0u, 2u, 4u, 6u, 8u, 10u})
            REQUIRE(ssv[slot] == Catch::Approx(c * sv[slot]).margin(1e-12));
        for (std::size_t slot : {1u, 3u, 5u, 7u, 9u, 11u}) REQUIRE(ssv[slot] == sv[slot]);
    }
}

TEST_CASE("reconstruct_from_summary diagnostics") {
    const std::size_t n = 64;
    const double dt = 0.1;

    SECTION("constant signal round-trips exactly") {
        const auto ts = make_series(n, dt, [](std::size_t) { return 1.75; });
        const auto sv = extract_summary(ts, default_band1(), default_band2());
        const auto rec = reconstruct_from_summary(sv, n - 1, dt);
        for (double v : rec.values) REQUIRE(v == Catch::Approx(1.75).margin(1e-9));
    }

    SECTION("single on-grid cosine correlates above 0.95") {
        const auto ts = on_grid_wave(n, dt, 4, true);
        const auto sv = extract_summary(ts, default_band1(), default_band2());
        const auto rec = reconstruct_from_summary(sv, n - 1, dt);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double x = ts.values[t], y = rec.values[t];
            sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
        }
        const double num = double(n) * sxy - sx * sy;
        const double den = std::sqrt((double(n) * sxx - sx * sx) * (double(n) * syy - sy * sy));
        REQUIRE(num / den > 0.95);
    }

    SECTION("zero summary gives the zero signal") {
        const auto rec = reconstruct_from_summary(SummaryVector{}, 10, 0.5);
        for (double v : rec.values) REQUIRE(v == 0.0);
    }
}
