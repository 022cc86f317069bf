#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "support/test_models.hpp"
#include "uqcal/eligibility.hpp"

using namespace uqcal;

namespace {

Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols, double lo = -1.0,
                     double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(gen);
    return m;
}

} // namespace

TEST_CASE("indicator tensor basics") {
    SECTION("strictly below and tied values") {
        Matrix data(1, 1), sim(1, 1);
        data(0, 0) = 1.0;
        sim(0, 0) = 0.5;
        REQUIRE(build_indicator_tensor(data, sim).bit(0, 0, 0));
        sim(0, 0) = 1.0; // non-strict comparison
        REQUIRE(build_indicator_tensor(data, sim).bit(0, 0, 0));
        sim(0, 0) = 1.5;
        REQUIRE_FALSE(build_indicator_tensor(data, sim).bit(0, 0, 0));
    }
    SECTION("random instance matches the naive double loop") {
        std::mt19937_64 gen(3);
        const Matrix data = random_matrix(gen, 3, 2), sim = random_matrix(gen, 5, 2);
        const IndicatorTensor t = build_indicator_tensor(data, sim);
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t r = 0; r < 2; ++r)
                    REQUIRE(t.bit(j, i, r) == (sim(j, r) <= data(i, r)));
    }
    SECTION("dimension mismatch") {
        Matrix a(2, 2, 0.0), b(2, 3, 0.0);
        REQUIRE_THROWS_AS(build_indicator_tensor(a, b), invalid_input);
    }
}

TEST_CASE("solve_min_q hand-derivable values") {
    SECTION("n1 = k = 1, m = 1 gives exactly 1") {
        for (double sim_val : {0.0, 1.0, 2.0}) {
            Matrix data(1, 1), sim(1, 1);
            data(0, 0) = 1.0;
            sim(0, 0) = sim_val;
            const auto sol = solve_min_q(build_indicator_tensor(data, sim));
            REQUIRE(sol.q_star == Catch::Approx(1.0).margin(1e-9));
        }
    }
    SECTION("identical distinct multisets give 1/sqrt(n1)") {
        std::mt19937_64 gen(17);
        for (std::size_t n1 : {2u, 3u, 4u, 7u}) {
            std::vector<double> vals(n1);
            std::uniform_real_distribution<double> u(0.0, 10.0);
            for (double& v : vals) v = u(gen);
            std::sort(vals.begin(), vals.end());
            Matrix data(n1, 1), sim(n1, 1);
            for (std::size_t i = 0; i < n1; ++i) {
                data(i, 0) = vals[i];
                sim(n1 - 1 - i, 0) = vals[i]; // different row order
            }
            const auto sol = solve_min_q(build_indicator_tensor(data, sim));
            REQUIRE(sol.q_star == Catch::Approx(1.0 / std::sqrt(double(n1))).margin(1e-6));
        }
    }
}

TEST_CASE("solve_min_q matches vertex enumeration on tiny instances") {
    std::mt19937_64 gen(23);
    for (int rep = 0; rep < 15; ++rep) {
        const std::size_t k = 1 + gen() % 5, n1 = 1 + gen() % 3, m = 1 + gen() % 2;
        const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
        const auto sol = solve_min_q(build_indicator_tensor(data, sim));
        REQUIRE(sol.q_star == Catch::Approx(oracle::min_q_vertex(data, sim)).margin(1e-6));
    }
}

TEST_CASE("lazy row generation equals the full LP") {
    std::mt19937_64 gen(29);
    for (int rep = 0; rep < 6; ++rep) {
        const std::size_t k = 20 + gen() % 40, n1 = 5 + gen() % 10, m = 1 + gen() % 3;
        const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
        const IndicatorTensor t = build_indicator_tensor(data, sim);
        const auto lazy = solve_min_q(t, true);
        const auto full = solve_min_q(t, false);
        REQUIRE(lazy.q_star == Catch::Approx(full.q_star).margin(1e-8));
    }
}

TEST_CASE("witness weights satisfy the constraints they certify") {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t k = 5 + gen() % 20, n1 = 2 + gen() % 6, m = 1 + gen() % 3;
        const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
        const IndicatorTensor t = build_indicator_tensor(data, sim);
        const auto sol = solve_min_q(t);
        double total = 0.0;
        for (double w : sol.weights) {
            REQUIRE(w >= -1e-12);
            total += w;
        }
        REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
        const double beta = 1.0 / std::sqrt(double(n1));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t i = 0; i < n1; ++i) {
                double act = 0.0, lo = 0.0, hi = 0.0;
                for (std::size_t j = 0; j < k; ++j)
                    if (t.bit(j, i, r)) act += sol.weights[j];
                for (std::size_t i2 = 0; i2 < n1; ++i2) {
                    lo += data(i2, r) <= data(i, r) ? 1.0 : 0.0;
                    hi += data(i2, r) < data(i, r) ? 1.0 : 0.0;
                }
                REQUIRE(act >= lo / double(n1) - beta * sol.q_star - 1e-6);
                REQUIRE(act <= hi / double(n1) + beta * sol.q_star + 1e-6);
            }
    }
}

TEST_CASE("q_star structural invariants") {
    std::mt19937_64 gen(37);
    const std::size_t k = 9, n1 = 4, m = 2;
    const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
    const double q0 = solve_min_q(build_indicator_tensor(data, sim)).q_star;

    SECTION("invariant under permuting sim and data rows") {
        std::vector<std::size_t> pj(k), pi(n1);
        std::iota(pj.begin(), pj.end(), 0);
        std::iota(pi.begin(), pi.end(), 0);
        std::shuffle(pj.begin(), pj.end(), gen);
        std::shuffle(pi.begin(), pi.end(), gen);
        Matrix data2(n1, m), sim2(k, m);
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t r = 0; r < m; ++r) data2(i, r) = data(pi[i], r);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t r = 0; r < m; ++r) sim2(j, r) = sim(pj[j], r);
        REQUIRE(solve_min_q(build_indicator_tensor(data2, sim2)).q_star ==
                Catch::Approx(q0).margin(1e-9));
    }

    SECTION("duplicating a sim row never increases q_star") {
        for (std::size_t dup : {std::size_t(0), std::size_t(k / 2), std::size_t(k - 1)}) {
            Matrix sim2(k + 1, m);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t r = 0; r < m; ++r) sim2(j, r) = sim(j, r);
            for (std::size_t r = 0; r < m; ++r) sim2(k, r) = sim(dup, r);
            REQUIRE(solve_min_q(build_indicator_tensor(data, sim2)).q_star <= q0 + 1e-8);
        }
    }
}

TEST_CASE("dense sim support drives q_star toward the half-jump bound") {
    // m = 1, sims spanning the data range densely: the weighted CDF can sit
    // mid-jump everywhere, so q* <= 1/sqrt(n1) (+ tolerance)
    std::mt19937_64 gen(41);
    const std::size_t n1 = 8, k = 400;
    Matrix data(n1, 1), sim(k, 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n1; ++i) data(i, 0) = u(gen);
    for (std::size_t j = 0; j < k; ++j) sim(j, 0) = -0.05 + 1.1 * double(j) / double(k - 1);
    const auto sol = solve_min_q(build_indicator_tensor(data, sim));
    REQUIRE(sol.q_star <= 1.0 / std::sqrt(double(n1)) + 1e-6);
}

TEST_CASE("check_feasible agrees with solve_min_q across the threshold") {
    std::mt19937_64 gen(43);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t k = 3 + gen() % 8, n1 = 1 + gen() % 4, m = 1 + gen() % 2;
        const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
        const IndicatorTensor t = build_indicator_tensor(data, sim);
        const double q_star = solve_min_q(t).q_star;
        REQUIRE(check_feasible(t, q_star + 0.01));
        if (q_star > 0.02) REQUIRE_FALSE(check_feasible(t, q_star - 0.01));
        std::uniform_real_distribution<double> u(0.0, 2.0 * q_star + 0.5);
        const double q = u(gen);
        if (std::abs(q - q_star) > 1e-5) REQUIRE(check_feasible(t, q) == (q >= q_star));
    }
}

TEST_CASE("bound_linear_over_polytope") {
    SECTION("singleton simplex returns c1 for both senses") {
        Matrix data(2, 1), sim(1, 1);
        data(0, 0) = 0.0;
        data(1, 0) = 1.0;
        sim(0, 0) = 0.5;
        WeightPolytope poly(build_indicator_tensor(data, sim), 2.0);
        REQUIRE(bound_linear_over_polytope(poly, {3.25}, BoundSense::minimize) ==
                Catch::Approx(3.25));
        REQUIRE(bound_linear_over_polytope(poly, {3.25}, BoundSense::maximize) ==
                Catch::Approx(3.25));
    }
    SECTION("constant objective returns the constant") {
        std::mt19937_64 gen(47);
        const Matrix data = random_matrix(gen, 3, 2), sim = random_matrix(gen, 6, 2);
        const IndicatorTensor t = build_indicator_tensor(data, sim);
        const double q = solve_min_q(t).q_star + 0.1;
        WeightPolytope poly(t, q);
        const std::vector<double> c(6, 0.75);
        REQUIRE(bound_linear_over_polytope(poly, c, BoundSense::minimize) ==
                Catch::Approx(0.75).margin(1e-9));
        REQUIRE(bound_linear_over_polytope(poly, c, BoundSense::maximize) ==
                Catch::Approx(0.75).margin(1e-9));
    }
    SECTION("tiny instances match vertex enumeration") {
        std::mt19937_64 gen(53);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int rep = 0; rep < 12; ++rep) {
            const std::size_t k = 1 + gen() % 5, n1 = 1 + gen() % 3, m = 1 + gen() % 2;
            const Matrix data = random_matrix(gen, n1, m), sim = random_matrix(gen, k, m);
            const IndicatorTensor t = build_indicator_tensor(data, sim);
            const double q = solve_min_q(t).q_star + 0.05;
            WeightPolytope poly(t, q);
            std::vector<double> c(k);
            for (double& v : c) v = u(gen);
            for (bool maximize : {false, true}) {
                const auto expect = oracle::bound_vertex(data, sim, q, c, maximize);
                REQUIRE(expect.has_value());
                const double got = bound_linear_over_polytope(
                    poly, c, maximize ? BoundSense::maximize : BoundSense::minimize);
                REQUIRE(got == Catch::Approx(*expect).margin(1e-6));
            }
        }
    }
    SECTION("empty polytope raises infeasible_error") {
        Matrix data(1, 1), sim(1, 1);
        data(0, 0) = 1.0;
        sim(0, 0) = 0.5; // q* = 1, so threshold 0.2 is below it
        WeightPolytope poly(build_indicator_tensor(data, sim), 0.2);
        REQUIRE_THROWS_AS(bound_linear_over_polytope(poly, {1.0}, BoundSense::minimize),
                          infeasible_error);
    }
}

namespace {

std::vector<TimeSeries> data_from_model(const SimulationModel& model, std::size_t n1,
                                        std::span<const double> e_true, std::uint64_t seed) {
    const Matrix a = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, n1, seed);
    std::vector<TimeSeries> out;
    for (std::size_t i = 0; i < n1; ++i)
        out.push_back(model.simulate(std::span<const double>(a.row(i), 2), e_true));
    return out;
}

} // namespace

TEST_CASE("construct_eligibility_set on an e-independent model") {
    const testmodel::EIndependent model;
    const std::vector<double> e_true{1.0, 1.0};
    const auto data = data_from_model(model, 12, e_true, 101);
    const Matrix e_samples = sample_uniform(Box{{0.0, 0.0}, {2.0, 2.0}}, 6, 102);
    const Matrix a_samples = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, 60, 103);
    const auto out = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                               default_band1(), default_band2());
    REQUIRE(out.records.size() == 6);
    REQUIRE(out.threshold == Catch::Approx(1.76).margin(0.005));
    // identical LPs for every e: identical q* and a uniform verdict
    for (const auto& rec : out.records) {
        REQUIRE(rec.ok());
        REQUIRE(rec.q_star == Catch::Approx(out.records[0].q_star).margin(1e-12));
        REQUIRE(rec.eligible == out.records[0].eligible);
        REQUIRE(rec.eligible == (rec.q_star <= out.threshold));
    }
}

TEST_CASE("eligible flag matches check_feasible at the construction threshold") {
    const testmodel::EDependent model;
    const std::vector<double> e_true{0.6, 0.8};
    const auto data = data_from_model(model, 9, e_true, 151);
    const Matrix e_samples = sample_uniform(Box{{0.0, 0.0}, {2.0, 2.0}}, 5, 152);
    const Matrix a_samples = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, 35, 153);
    const auto out = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                               default_band1(), default_band2());
    for (const auto& rec : out.records) {
        REQUIRE(rec.ok());
        const Matrix sims =
            detail::simulate_summaries(model, a_samples, rec.e, default_band1(), default_band2());
        const IndicatorTensor tensor = build_indicator_tensor(out.data_summaries, sims);
        // skip records sitting exactly on the threshold within solver noise
        if (std::abs(rec.q_star - out.threshold) < 1e-6) continue;
        REQUIRE(check_feasible(tensor, out.threshold) == rec.eligible);
    }
}

TEST_CASE("construct_eligibility_set is invariant to the jobs count") {
    const testmodel::EDependent model;
    const std::vector<double> e_true{0.6, 0.8};
    const auto data = data_from_model(model, 10, e_true, 201);
    const Matrix e_samples = sample_uniform(Box{{0.0, 0.0}, {2.0, 2.0}}, 8, 202);
    const Matrix a_samples = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, 40, 203);
    EligibilityOptions serial, par;
    serial.jobs = 1;
    par.jobs = 3;
    const auto a = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                             default_band1(), default_band2(), serial);
    const auto b = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                             default_band1(), default_band2(), par);
    for (std::size_t l = 0; l < a.records.size(); ++l) {
        REQUIRE(a.records[l].q_star == b.records[l].q_star);
        REQUIRE(a.records[l].eligible == b.records[l].eligible);
    }
}

TEST_CASE("construct_eligibility_set records per-e failures and continues") {
    const std::vector<double> e_true{0.5, 0.5};
    const testmodel::Flaky model(1.2);
    const testmodel::EIndependent clean;
    const auto data = data_from_model(clean, 8, e_true, 301);
    Matrix e_samples(3, 2);
    e_samples(0, 0) = 0.5; e_samples(0, 1) = 0.5;
    e_samples(1, 0) = 1.9; e_samples(1, 1) = 0.5; // flaky cutoff exceeded
    e_samples(2, 0) = 0.8; e_samples(2, 1) = 0.5;
    const Matrix a_samples = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, 30, 302);
    const auto out = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                               default_band1(), default_band2());
    REQUIRE(out.records[0].ok());
    REQUIRE_FALSE(out.records[1].ok());
    REQUIRE_FALSE(out.records[1].eligible);
    REQUIRE(out.records[2].ok());

    SECTION("all-failed run throws") {
        const testmodel::Flaky hopeless(-1.0);
        REQUIRE_THROWS_AS(construct_eligibility_set(data, hopeless, e_samples, a_samples, 0.05,
                                                    default_band1(), default_band2()),
                          model_error);
    }
}

TEST_CASE("range_shrinkage_ranking") {
    SECTION("pinned scores for uniform and constant dimensions") {
        std::vector<EligibilityRecord> records;
        for (int i = 0; i <= 100; ++i) {
            EligibilityRecord r;
            r.e = {double(i) / 100.0, 0.5}; // dim 0 uniform on [0,1], dim 1 constant
            r.eligible = true;
            records.push_back(r);
        }
        const Box box{{0.0, 0.0}, {1.0, 1.0}};
        const auto scores = range_shrinkage_ranking(records, box);
        REQUIRE(scores[0].dim == 1); // constant dimension is fully pinned
        REQUIRE(scores[0].score == Catch::Approx(1.0));
        REQUIRE(scores[1].dim == 0);
        REQUIRE(scores[1].score == Catch::Approx(0.10).margin(1e-9));
    }
    SECTION("no eligible records throws") {
        std::vector<EligibilityRecord> records(3);
        for (auto& r : records) r.e = {0.5, 0.5};
        REQUIRE_THROWS_AS(range_shrinkage_ranking(records, Box{{0.0, 0.0}, {1.0, 1.0}}),
                          empty_set_error);
    }
}

TEST_CASE("n1_impact_study") {
    const testmodel::EDependent model;
    const std::vector<double> e_true{0.6, 0.8};
    const auto data = data_from_model(model, 12, e_true, 401);
    const Matrix e_samples = sample_uniform(Box{{0.0, 0.0}, {2.0, 2.0}}, 6, 402);
    const Matrix a_samples = sample_uniform(Box{{0.0, 0.0}, {1.0, 1.0}}, 40, 403);

    SECTION("size = n1 reproduces the full-data run") {
        const auto full = construct_eligibility_set(data, model, e_samples, a_samples, 0.05,
                                                    default_band1(), default_band2());
        const auto table = n1_impact_study(data, model, e_samples, a_samples, 0.05,
                                           default_band1(), default_band2(), {12}, {7});
        REQUIRE(table.size() == 1);
        REQUIRE(table[0].eligible_count == full.eligible_count());
    }
    SECTION("size above n1 is rejected") {
        REQUIRE_THROWS_AS(n1_impact_study(data, model, e_samples, a_samples, 0.05,
                                          default_band1(), default_band2(), {13}, {7}),
                          invalid_input);
    }
    SECTION("size 1 is at least as permissive as the full data") {
        const auto table = n1_impact_study(data, model, e_samples, a_samples, 0.05,
                                           default_band1(), default_band2(), {1, 12}, {7, 8});
        double frac1 = 0.0, frac_full = 0.0;
        for (const auto& row : table) {
            if (row.size == 1) frac1 += row.eligible_fraction;
            else frac_full += row.eligible_fraction;
        }
        REQUIRE(frac1 >= frac_full - 1e-12);
    }
}
