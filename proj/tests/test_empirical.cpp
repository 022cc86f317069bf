#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "uqcal/empirical.hpp"

using namespace uqcal;

TEST_CASE("ecdf left/right limits") {
    const Ecdf e({1.0, 2.0, 3.0});
    REQUIRE(ecdf_left(e, 2.0) == Catch::Approx(1.0 / 3.0));
    REQUIRE(ecdf_right(e, 2.0) == Catch::Approx(2.0 / 3.0));
    REQUIRE(ecdf_left(e, 0.0) == 0.0);
    REQUIRE(ecdf_right(e, 3.0) == 1.0);

    const Ecdf tied({1.0, 1.0, 2.0});
    REQUIRE(ecdf_left(tied, 1.0) == 0.0);
    REQUIRE(ecdf_right(tied, 1.0) == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("ecdf limit properties") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> pts(17);
    for (double& p : pts) p = u(gen);
    const Ecdf e(pts);
    double prev_l = 0.0, prev_r = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.05) {
        const double l = ecdf_left(e, x), r = ecdf_right(e, x);
        REQUIRE(l <= r);
        REQUIRE(l >= prev_l);
        REQUIRE(r >= prev_r);
        prev_l = l;
        prev_r = r;
    }
    REQUIRE(ecdf_left(e, -100.0) == 0.0);
    REQUIRE(ecdf_right(e, 100.0) == 1.0);
}

TEST_CASE("ks_sup pinned cases") {
    SECTION("uniform weights on the ecdf's own points give zero") {
        const Ecdf e({0.5, 1.5, 2.5, 2.5});
        WeightedSample ws{{2.5, 0.5, 2.5, 1.5}, {0.25, 0.25, 0.25, 0.25}};
        REQUIRE(ks_sup(ws, e) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("disjoint step functions give one") {
        const Ecdf e({0.0});
        WeightedSample ws{{5.0}, {1.0}};
        REQUIRE(ks_sup(ws, e) == Catch::Approx(1.0));
    }
}

TEST_CASE("ks_sup matches dense-grid brute force") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> data(10), pts(10), w(10);
        for (double& v : data) v = u(gen);
        for (double& v : pts) v = u(gen);
        double sum = 0.0;
        for (double& v : w) {
            v = 0.01 + std::abs(u(gen));
            sum += v;
        }
        for (double& v : w) v /= sum;
        const Ecdf e(data);
        const WeightedSample ws{pts, w};
        const double exact = ks_sup(ws, e);
        REQUIRE(exact == Catch::Approx(oracle::ks_sup_bruteforce(ws, e)).margin(1e-12));
        REQUIRE(exact <= 1.0 + 1e-15);
    }
}

TEST_CASE("ks_sup is symmetric for equal-weight samples") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> xs(6), ys(6);
        for (double& v : xs) v = u(gen);
        for (double& v : ys) v = u(gen);
        const std::vector<double> w(6, 1.0 / 6.0);
        const double a = ks_sup(WeightedSample{xs, w}, Ecdf(ys));
        const double b = ks_sup(WeightedSample{ys, w}, Ecdf(xs));
        REQUIRE(a == Catch::Approx(b).margin(1e-12));
    }
}

TEST_CASE("kolmogorov_quantile reproduces the calibrated thresholds") {
    // the Bonferroni-corrected threshold for alpha = 0.05, m = 12
    REQUIRE(kolmogorov_quantile(1.0 - 0.05 / 12.0) == Catch::Approx(1.76).margin(0.005));
    // frozen independently (scipy.stats.kstwobign.ppf): 1.3580986, 0.8275736
    REQUIRE(kolmogorov_quantile(0.95) == Catch::Approx(1.3581).margin(1e-3));
    REQUIRE(kolmogorov_quantile(0.5) == Catch::Approx(0.8275736).margin(1e-4));
    REQUIRE(kolmogorov_quantile(0.99) == Catch::Approx(1.6276236).margin(1e-4));
}

TEST_CASE("kolmogorov_quantile is monotone and inverts the series CDF") {
    double prev = 0.0;
    for (double p : {0.05, 0.2, 0.5, 0.8, 0.95, 0.995}) {
        const double q = kolmogorov_quantile(p);
        REQUIRE(q > prev);
        prev = q;
        REQUIRE(detail::kolmogorov_cdf(q) == Catch::Approx(p).margin(1e-5));
    }
    REQUIRE_THROWS_AS(kolmogorov_quantile(0.0), invalid_input);
    REQUIRE_THROWS_AS(kolmogorov_quantile(1.0), invalid_input);
}

TEST_CASE("weighted sample validation") {
    REQUIRE_THROWS_AS((WeightedSample{{1.0}, {0.5}}).validate(), invalid_input);
    REQUIRE_THROWS_AS((WeightedSample{{1.0, 2.0}, {1.5, -0.5}}).validate(), invalid_input);
    REQUIRE_NOTHROW((WeightedSample{{1.0, 2.0}, {0.25, 0.75}}).validate());
}
