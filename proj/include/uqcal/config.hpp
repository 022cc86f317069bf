#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uqcal/csv.hpp"
#include "uqcal/design.hpp"
#include "uqcal/errors.hpp"
#include "uqcal/model.hpp"

namespace uqcal {

/// Flat `key = value` run configuration with dotted section keys. Every key
/// has a default; any key can be overridden by --set key=value. Unknown keys
/// are rejected. The canonical serialization (sorted keys, %.17g numerics) is
/// what gets hashed into provenance.
struct RunConfig {
    double alpha = 0.05;
    std::size_t n2 = 1000;
    std::size_t k = 1000;
    std::size_t jobs = 1;
    std::uint64_t seed = 2024;
    std::string model = "oscillator"; // or "external:<command line>"
    double model_timeout_s = 60.0;
    FrequencyBand band1 = default_band1();
    FrequencyBand band2 = default_band2();
    Box box_a = SyntheticOscillator::box_a();
    Box box_e = SyntheticOscillator::box_e();
    std::vector<double> theta;        // empty = model baseline
    std::optional<double> threshold;  // empty = q_{1-alpha/m}
    double kw_c0 = 0.1;
    double kw_a0 = 0.1;
    std::size_t kw_n_max = 8;
    double kw_gamma = 0.25;
    bool kw_best_seen = false;
    bool kw_refresh_eligibility = false;
    std::vector<std::size_t> study_sizes = {20, 40, 80};
    std::size_t study_seeds = 10;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("config: alpha must be in (0,1)");
        if (n2 < 1 || k < 1 || jobs < 1) throw invalid_input("config: counts must be >= 1");
        band1.validate();
        band2.validate();
        box_a.validate();
        box_e.validate();
        if (threshold && !(*threshold > 0.0))
            throw invalid_input("config: threshold must be > 0");
        if (!(kw_c0 > 0.0) || !(kw_a0 > 0.0) || kw_n_max < 1 || !(kw_gamma > 0.0))
            throw invalid_input("config: kw parameters must be positive");
        if (study_sizes.empty() || study_seeds < 1)
            throw invalid_input("config: study needs sizes and seeds");
    }
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += csv::format_full(v[i]);
    }
    return out;
}

inline std::vector<double> split_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw invalid_input("config: bad number in " + key + ": '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw invalid_input("config: empty list for " + key);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline void config_set(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&] {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw invalid_input("config: bad number for " + key + ": '" + value + "'");
        return v;
    };
    auto as_count = [&] {
        const double v = as_double();
        if (v < 0 || v != double(std::uint64_t(v)))
            throw invalid_input("config: bad count for " + key + ": '" + value + "'");
        return std::uint64_t(v);
    };
    auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw invalid_input("config: bad bool for " + key + ": '" + value + "'");
    };

    if (key == "alpha") cfg.alpha = as_double();
    else if (key == "n2") cfg.n2 = as_count();
    else if (key == "k") cfg.k = as_count();
    else if (key == "jobs") cfg.jobs = as_count();
    else if (key == "seed") cfg.seed = as_count();
    else if (key == "model") cfg.model = value;
    else if (key == "model.timeout_s") cfg.model_timeout_s = as_double();
    else if (key == "band1.lo") cfg.band1.lo = as_double();
    else if (key == "band1.hi") cfg.band1.hi = as_double();
    else if (key == "band2.lo") cfg.band2.lo = as_double();
    else if (key == "band2.hi") cfg.band2.hi = as_double();
    else if (key == "box_a.lo") cfg.box_a.lo = detail::split_doubles(value, key);
    else if (key == "box_a.hi") cfg.box_a.hi = detail::split_doubles(value, key);
    else if (key == "box_e.lo") cfg.box_e.lo = detail::split_doubles(value, key);
    else if (key == "box_e.hi") cfg.box_e.hi = detail::split_doubles(value, key);
    else if (key == "theta") cfg.theta = detail::split_doubles(value, key);
    else if (key == "threshold") {
        if (value == "auto") cfg.threshold.reset();
        else cfg.threshold = as_double();
    }
    else if (key == "kw.c0") cfg.kw_c0 = as_double();
    else if (key == "kw.a0") cfg.kw_a0 = as_double();
    else if (key == "kw.n_max") cfg.kw_n_max = as_count();
    else if (key == "kw.gamma") cfg.kw_gamma = as_double();
    else if (key == "kw.best_seen") cfg.kw_best_seen = as_bool();
    else if (key == "kw.refresh_eligibility") cfg.kw_refresh_eligibility = as_bool();
    else if (key == "study.sizes") {
        cfg.study_sizes.clear();
        for (double v : detail::split_doubles(value, key)) {
            if (v < 1 || v != double(std::size_t(v)))
                throw invalid_input("config: study.sizes must be positive integers");
            cfg.study_sizes.push_back(std::size_t(v));
        }
    }
    else if (key == "study.seeds") cfg.study_seeds = as_count();
    else throw invalid_input("config: unknown key '" + key + "'");
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open config: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw invalid_input("config line " + std::to_string(lineno) + ": expected key = value");
        config_set(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

/// Canonical form: fixed key order, normalized numerals. Hash-stable across
/// parse/serialize round trips.
inline std::string canonical_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto put = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    put("alpha", csv::format_full(cfg.alpha));
    put("band1.hi", csv::format_full(cfg.band1.hi));
    put("band1.lo", csv::format_full(cfg.band1.lo));
    put("band2.hi", csv::format_full(cfg.band2.hi));
    put("band2.lo", csv::format_full(cfg.band2.lo));
    put("box_a.hi", detail::join_doubles(cfg.box_a.hi));
    put("box_a.lo", detail::join_doubles(cfg.box_a.lo));
    put("box_e.hi", detail::join_doubles(cfg.box_e.hi));
    put("box_e.lo", detail::join_doubles(cfg.box_e.lo));
    put("jobs", std::to_string(cfg.jobs));
    put("k", std::to_string(cfg.k));
    put("kw.a0", csv::format_full(cfg.kw_a0));
    put("kw.best_seen", cfg.kw_best_seen ? "true" : "false");
    put("kw.c0", csv::format_full(cfg.kw_c0));
    put("kw.gamma", csv::format_full(cfg.kw_gamma));
    put("kw.n_max", std::to_string(cfg.kw_n_max));
    put("kw.refresh_eligibility", cfg.kw_refresh_eligibility ? "true" : "false");
    put("model", cfg.model);
    put("model.timeout_s", csv::format_full(cfg.model_timeout_s));
    put("n2", std::to_string(cfg.n2));
    put("seed", std::to_string(cfg.seed));
    {
        std::string sizes;
        for (std::size_t i = 0; i < cfg.study_sizes.size(); ++i) {
            if (i) sizes += ',';
            sizes += std::to_string(cfg.study_sizes[i]);
        }
        put("study.sizes", sizes);
    }
    put("study.seeds", std::to_string(cfg.study_seeds));
    put("theta", cfg.theta.empty() ? "default" : detail::join_doubles(cfg.theta));
    put("threshold", cfg.threshold ? csv::format_full(*cfg.threshold) : std::string("auto"));
    return out.str();
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
    // FNV-1a 64 over the canonical form
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace uqcal
