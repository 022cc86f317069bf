#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "uqcal/config.hpp"
#include "uqcal/csv.hpp"
#include "uqcal/design.hpp"
#include "uqcal/eligibility.hpp"
#include "uqcal/external_model.hpp"
#include "uqcal/model.hpp"
#include "uqcal/reliability.hpp"
#include "uqcal/version.hpp"

namespace uqcal::cli {

// Seed derivation tags; each pipeline phase draws from its own stream so any
// phase can be replayed in isolation. Documented in the README.
inline constexpr std::uint64_t seed_tag_e_samples = 1;
inline constexpr std::uint64_t seed_tag_a_samples = 2;
inline constexpr std::uint64_t seed_tag_subsample = 3;
inline constexpr std::uint64_t seed_tag_design = 4;

inline std::unique_ptr<SimulationModel> make_model(const RunConfig& cfg) {
    if (cfg.model == "oscillator") return std::make_unique<SyntheticOscillator>();
    if (cfg.model.rfind("external:", 0) == 0) {
        const auto argv = ExternalModel::split_command(cfg.model.substr(9));
        return std::make_unique<ExternalModel>(argv, cfg.box_a.dim(), cfg.box_e.dim(),
                                               cfg.theta.size(), cfg.model_timeout_s);
    }
    throw invalid_input("config: unknown model '" + cfg.model +
                        "' (use 'oscillator' or 'external:<command>')");
}

inline DesignPoint resolve_theta(const RunConfig& cfg) {
    if (!cfg.theta.empty()) return DesignPoint{cfg.theta};
    if (cfg.model == "oscillator") return SyntheticOscillator::theta_baseline();
    throw invalid_input("config: external models need an explicit theta");
}

inline double resolve_threshold(const RunConfig& cfg) {
    return cfg.threshold ? *cfg.threshold
                         : kolmogorov_quantile(1.0 - cfg.alpha / double(summary_dim));
}

namespace detail_cli {

inline std::filesystem::path out_path(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    return std::filesystem::path(out_dir) / name;
}

inline void write_provenance(const std::string& out_dir, const RunConfig& cfg,
                             const std::string& command, std::size_t n1) {
    std::ofstream out(out_path(out_dir, "provenance.txt"));
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    out << "tool = uqcal " << version_string << "\n"
        << "command = " << command << "\n"
        << "config_hash = " << hash << "\n"
        << "threshold = " << csv::format_full(resolve_threshold(cfg)) << "\n";
    if (n1 > 0)
        out << "k_over_n1 = " << csv::format_full(double(cfg.k) / double(n1))
            << "  # the asymptotic guarantee wants k >> n1\n";
    out << "-- canonical config --\n" << canonical_config(cfg);
}

} // namespace detail_cli

/// `summarize`: data CSV -> n1 x 12 summary matrix in the fixed layout.
inline void cmd_summarize(const std::string& data_file, const RunConfig& cfg,
                          const std::string& out_dir) {
    cfg.validate();
    const auto series = csv::load_series(data_file);
    const Matrix s = detail::summarize_series(series, cfg.band1, cfg.band2);
    csv::Writer w(detail_cli::out_path(out_dir, "summaries.csv").string());
    std::vector<std::string> header(summary_names().begin(), summary_names().end());
    w.row(header);
    for (std::size_t i = 0; i < s.rows(); ++i) {
        std::vector<std::string> row;
        for (std::size_t r = 0; r < s.cols(); ++r) row.push_back(csv::format_full(s(i, r)));
        w.row(row);
    }
    w.close();
}

/// `eligibility`: the full construction end to end. Writes records.csv,
/// per-dimension
/// scatter files, a range-shrinkage ranking (when any e is eligible) and
/// provenance.txt.
inline void cmd_eligibility(const std::string& data_file, const RunConfig& cfg,
                            const std::string& out_dir) {
    cfg.validate();
    const auto series = csv::load_series(data_file);
    const auto model = make_model(cfg);
    const Matrix e_samples =
        sample_uniform(cfg.box_e, cfg.n2, derive_seed(cfg.seed, seed_tag_e_samples));
    const Matrix a_samples =
        sample_uniform(cfg.box_a, cfg.k, derive_seed(cfg.seed, seed_tag_a_samples));
    EligibilityOptions opts;
    opts.jobs = cfg.jobs;
    opts.threshold_override = cfg.threshold;
    const EligibilityOutcome out = construct_eligibility_set(
        series, *model, e_samples, a_samples, cfg.alpha, cfg.band1, cfg.band2, opts);

    const std::size_t dim_e = cfg.box_e.dim();
    {
        csv::Writer w(detail_cli::out_path(out_dir, "records.csv").string());
        std::vector<std::string> header;
        for (std::size_t d = 0; d < dim_e; ++d) header.push_back("e" + std::to_string(d + 1));
        header.insert(header.end(), {"q_star", "threshold", "eligible", "error"});
        w.row(header);
        for (const auto& rec : out.records) {
            std::vector<std::string> row;
            for (double v : rec.e) row.push_back(csv::format_full(v));
            row.push_back(rec.ok() ? csv::format_full(rec.q_star) : "nan");
            row.push_back(csv::format_full(out.threshold));
            row.push_back(rec.eligible ? "1" : "0");
            row.push_back(rec.error);
            w.row(row);
        }
        w.close();
    }
    for (std::size_t d = 0; d < dim_e; ++d) {
        const std::string name = "scatter_e" + std::to_string(d + 1) + ".csv";
        csv::Writer w(detail_cli::out_path(out_dir, name).string());
        w.row({"e" + std::to_string(d + 1),
               "q_star_threshold_" + csv::format_full(out.threshold)});
        for (const auto& rec : out.records) {
            if (!rec.ok()) continue;
            w.row({csv::format_full(rec.e[d]), csv::format_full(rec.q_star)});
        }
        w.close();
    }
    if (out.eligible_count() > 0) {
        const auto scores = range_shrinkage_ranking(out.records, cfg.box_e);
        csv::Writer w(detail_cli::out_path(out_dir, "ranking.csv").string());
        w.row({"rank", "dimension", "score"});
        for (std::size_t i = 0; i < scores.size(); ++i)
            w.row({std::to_string(i + 1), "e" + std::to_string(scores[i].dim + 1),
                   csv::format_full(scores[i].score)});
        w.close();
    }
    detail_cli::write_provenance(out_dir, cfg, "eligibility", series.size());
}

struct LoadedRecords {
    std::vector<EligibilityRecord> records;
    double threshold = 0.0;
};

inline LoadedRecords load_records(const std::string& path) {
    const auto rows = csv::parse_file(path);
    if (rows.size() < 2) throw invalid_input("records file has no data rows: " + path);
    const auto& header = rows[0];
    std::size_t dim_e = 0;
    while (dim_e < header.size() && header[dim_e] == "e" + std::to_string(dim_e + 1)) ++dim_e;
    if (dim_e == 0 || header.size() < dim_e + 4)
        throw invalid_input("records file header not recognized: " + path);
    LoadedRecords out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != header.size())
            throw invalid_input("ragged records row " + std::to_string(i + 1));
        EligibilityRecord rec;
        for (std::size_t d = 0; d < dim_e; ++d)
            rec.e.push_back(csv::parse_double(r[d], i, d));
        rec.error = r[dim_e + 3];
        if (rec.ok()) rec.q_star = csv::parse_double(r[dim_e], i, dim_e);
        out.threshold = csv::parse_double(r[dim_e + 1], i, dim_e + 1);
        rec.eligible = r[dim_e + 2] == "1";
        out.records.push_back(std::move(rec));
    }
    return out;
}

namespace detail_cli {

// Rebuild the polytope context that the eligibility run used: same data
// summaries, and a-samples re-derived from the same master seed.
inline PolytopeContext rebuild_context(const std::string& data_file, const RunConfig& cfg,
                                       double threshold) {
    PolytopeContext ctx;
    const auto series = csv::load_series(data_file);
    ctx.data_summaries = detail::summarize_series(series, cfg.band1, cfg.band2);
    ctx.a_samples = sample_uniform(cfg.box_a, cfg.k, derive_seed(cfg.seed, seed_tag_a_samples));
    ctx.q_threshold = threshold;
    ctx.band1 = cfg.band1;
    ctx.band2 = cfg.band2;
    ctx.jobs = cfg.jobs;
    return ctx;
}

} // namespace detail_cli

/// `reliability`: ranges, severities and the R_min/R_max table at theta.
inline void cmd_reliability(const std::string& data_file, const std::string& records_file,
                            const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const LoadedRecords loaded = load_records(records_file);
    const auto model = make_model(cfg);
    const PolytopeContext ctx = detail_cli::rebuild_context(data_file, cfg, loaded.threshold);
    const DesignPoint theta = resolve_theta(cfg);
    const ReliabilityReport rep = analyze_reliability(loaded.records, *model, ctx, theta);

    {
        csv::Writer w(detail_cli::out_path(out_dir, "reliability_summary.csv").string());
        w.row({"quantity", "lo", "hi", "severity"});
        for (std::size_t i = 0; i < rep.requirement_ranges.size(); ++i)
            w.row({"R" + std::to_string(i + 1), csv::format_full(rep.requirement_ranges[i].lo),
                   csv::format_full(rep.requirement_ranges[i].hi),
                   csv::format_full(rep.severities[i])});
        w.row({"R", csv::format_full(rep.combined_range.lo),
               csv::format_full(rep.combined_range.hi), ""});
        w.close();
    }
    {
        csv::Writer w(detail_cli::out_path(out_dir, "rmin_rmax.csv").string());
        std::vector<std::string> header;
        for (std::size_t d = 0; d < cfg.box_e.dim(); ++d)
            header.push_back("e" + std::to_string(d + 1));
        header.insert(header.end(), {"r_min", "r_max"});
        w.row(header);
        for (const auto& row : rep.rmin_rmax) {
            std::vector<std::string> cells;
            for (double v : row.e) cells.push_back(csv::format_full(v));
            cells.push_back(csv::format_full(row.r_min));
            cells.push_back(csv::format_full(row.r_max));
            w.row(cells);
        }
        w.close();
    }
    {
        // epistemic ranking data restricted to the safer (low R_min) half of
        // the eligible set: which dimensions pin down the low-failure region
        std::vector<double> rmins;
        for (const auto& row : rep.rmin_rmax) rmins.push_back(row.r_min);
        std::sort(rmins.begin(), rmins.end());
        const double cutoff = rmins[(rmins.size() - 1) / 2];
        std::vector<EligibilityRecord> low;
        for (const auto& row : rep.rmin_rmax) {
            if (row.r_min > cutoff) continue;
            EligibilityRecord r;
            r.e = row.e;
            r.q_star = 0.0;
            r.eligible = true;
            low.push_back(std::move(r));
        }
        const auto scores = range_shrinkage_ranking(low, cfg.box_e);
        csv::Writer w(detail_cli::out_path(out_dir, "reliability_ranking.csv").string());
        w.row({"rank", "dimension", "score", "r_min_cutoff"});
        for (std::size_t i = 0; i < scores.size(); ++i)
            w.row({std::to_string(i + 1), "e" + std::to_string(scores[i].dim + 1),
                   csv::format_full(scores[i].score), i == 0 ? csv::format_full(cutoff) : ""});
        w.close();
    }
    detail_cli::write_provenance(out_dir, cfg, "reliability", ctx.data_summaries.rows());
}

/// `design`: Kiefer-Wolfowitz descent on the robust objective. Writes the
/// result summary and the full replayable trace.
inline void cmd_design(const std::string& data_file, const std::string& records_file,
                       const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const LoadedRecords loaded = load_records(records_file);
    {
        bool any = false;
        for (const auto& r : loaded.records) any |= r.eligible && r.ok();
        if (!any) throw empty_set_error("design: records file has no eligible e");
    }
    const auto model = make_model(cfg);
    const PolytopeContext pctx = detail_cli::rebuild_context(data_file, cfg, loaded.threshold);

    RobustObjectiveContext octx;
    octx.data_summaries = pctx.data_summaries;
    octx.box_a = cfg.box_a;
    octx.k = cfg.k;
    octx.q_threshold = loaded.threshold;
    octx.band1 = cfg.band1;
    octx.band2 = cfg.band2;
    octx.jobs = cfg.jobs;

    const auto series = csv::load_series(data_file); // for refresh mode
    const Matrix e_samples =
        sample_uniform(cfg.box_e, cfg.n2, derive_seed(cfg.seed, seed_tag_e_samples));

    KwConfig kw;
    kw.c0 = cfg.kw_c0;
    kw.a0 = cfg.kw_a0;
    kw.n_max = cfg.kw_n_max;
    kw.gamma = cfg.kw_gamma;
    kw.theta_baseline = resolve_theta(cfg);
    kw.seed = derive_seed(cfg.seed, seed_tag_design);
    kw.return_best_seen = cfg.kw_best_seen;

    auto objective = [&](const DesignPoint& theta, std::uint64_t seed) {
        if (!cfg.kw_refresh_eligibility)
            return robust_objective(theta, loaded.records, *model, octx, seed);
        // refresh mode: rebuild the eligible set at this theta's a-sample draw
        EligibilityOptions opts;
        opts.jobs = cfg.jobs;
        opts.threshold_override = loaded.threshold;
        const Matrix a_fresh = sample_uniform(cfg.box_a, cfg.k, seed);
        const EligibilityOutcome fresh = construct_eligibility_set(
            series, *model, e_samples, a_fresh, cfg.alpha, cfg.band1, cfg.band2, opts);
        return robust_objective(theta, fresh.records, *model, octx, seed);
    };

    KwResult res;
    try {
        res = kw_optimize(objective, kw);
    } catch (const design_error& ex) {
        // persist the partial trace, then surface the original failure so the
        // exit code reflects its kind
        csv::Writer w(detail_cli::out_path(out_dir, "design_trace.csv").string());
        w.row({"n", "i", "c_n", "a_n", "seed", "u", "l", "g"});
        for (const auto& s : ex.trace.steps)
            w.row({std::to_string(s.n), std::to_string(s.i), csv::format_full(s.c_n),
                   csv::format_full(s.a_n), std::to_string(s.seed), csv::format_full(s.u),
                   csv::format_full(s.l), csv::format_full(s.g)});
        w.close();
        if (ex.cause) std::rethrow_exception(ex.cause);
        throw;
    }

    {
        csv::Writer w(detail_cli::out_path(out_dir, "design_trace.csv").string());
        std::vector<std::string> header{"n", "i", "c_n", "a_n", "seed", "u", "l", "g"};
        for (std::size_t d = 0; d < kw.theta_baseline.theta.size(); ++d)
            header.push_back("x" + std::to_string(d));
        w.row(header);
        for (const auto& s : res.trace.steps) {
            std::vector<std::string> row{std::to_string(s.n),   std::to_string(s.i),
                                         csv::format_full(s.c_n), csv::format_full(s.a_n),
                                         std::to_string(s.seed), csv::format_full(s.u),
                                         csv::format_full(s.l),  csv::format_full(s.g)};
            for (double v : s.x_before) row.push_back(csv::format_full(v));
            w.row(row);
        }
        w.close();
    }
    {
        csv::Writer w(detail_cli::out_path(out_dir, "design_result.csv").string());
        w.row({"key", "value"});
        w.row({"f_initial", csv::format_full(res.f_initial)});
        w.row({"f_last", csv::format_full(res.f_last)});
        w.row({"f_best", csv::format_full(res.f_best)});
        w.row({"selected", cfg.kw_best_seen ? "best_seen" : "last_iterate"});
        for (std::size_t n = 0; n < res.trace.iterate_values.size(); ++n)
            w.row({"f_iterate_" + std::to_string(n + 1),
                   csv::format_full(res.trace.iterate_values[n])});
        for (std::size_t d = 0; d < res.theta_new.theta.size(); ++d)
            w.row({"theta_new_" + std::to_string(d + 1),
                   csv::format_full(res.theta_new.theta[d])});
        w.close();
    }
    detail_cli::write_provenance(out_dir, cfg, "design", pctx.data_summaries.rows());
}

/// `n1-study`: subsampling study of the data-size impact.
inline void cmd_n1_study(const std::string& data_file, const RunConfig& cfg,
                         const std::string& out_dir) {
    cfg.validate();
    const auto series = csv::load_series(data_file);
    const auto model = make_model(cfg);
    const Matrix e_samples =
        sample_uniform(cfg.box_e, cfg.n2, derive_seed(cfg.seed, seed_tag_e_samples));
    const Matrix a_samples =
        sample_uniform(cfg.box_a, cfg.k, derive_seed(cfg.seed, seed_tag_a_samples));
    std::vector<std::uint64_t> seeds;
    for (std::size_t j = 0; j < cfg.study_seeds; ++j)
        seeds.push_back(derive_seed(cfg.seed, seed_tag_subsample, j));
    EligibilityOptions opts;
    opts.jobs = cfg.jobs;
    opts.threshold_override = cfg.threshold;
    const auto table = n1_impact_study(series, *model, e_samples, a_samples, cfg.alpha, cfg.band1,
                                       cfg.band2, cfg.study_sizes, seeds, opts);

    csv::Writer w(detail_cli::out_path(out_dir, "n1_study.csv").string());
    std::vector<std::string> header{"n1_sub", "seed", "eligible_count", "eligible_fraction"};
    for (std::size_t d = 0; d < cfg.box_e.dim(); ++d) {
        header.push_back("e" + std::to_string(d + 1) + "_lo");
        header.push_back("e" + std::to_string(d + 1) + "_hi");
    }
    w.row(header);
    for (const auto& row : table) {
        std::vector<std::string> cells{std::to_string(row.size), std::to_string(row.seed),
                                       std::to_string(row.eligible_count),
                                       csv::format_full(row.eligible_fraction)};
        for (const auto& [lo, hi] : row.dim_ranges) {
            cells.push_back(std::isnan(lo) ? "" : csv::format_full(lo));
            cells.push_back(std::isnan(hi) ? "" : csv::format_full(hi));
        }
        w.row(cells);
    }
    w.close();
    detail_cli::write_provenance(out_dir, cfg, "n1-study", series.size());
}

} // namespace uqcal::cli
