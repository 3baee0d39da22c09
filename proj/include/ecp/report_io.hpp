#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ecp/csv.hpp"
#include "ecp/diagnostics.hpp"
#include "ecp/experiment.hpp"
#include "ecp/multiplier.hpp"

namespace ecp {

using nlohmann::json;

inline json to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["model"] = cfg.model_spec;
    j["n_schedule"] = cfg.n_schedule;
    j["replicates"] = cfg.replicates;
    j["bootstrap"] = cfg.bootstrap;
    j["grid_m"] = cfg.grid_m;
    j["functional"] = to_string(cfg.functional);
    j["multiplier_law"] =
        cfg.law == MultiplierLaw::standard_normal ? "standard_normal" : "rademacher";
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["force"] = cfg.force;
    j["thresholds"] = {{"slope_window", {cfg.slope_window_lo, cfg.slope_window_hi}},
                       {"scaled_ratio_max", cfg.ratio_max},
                       {"ks_max", cfg.ks_max}};
    j["outer_datasets"] = cfg.outer_datasets;
    j["derivative_estimator"] = {{"spacing_constant", cfg.deriv.spacing_constant},
                                 {"clamp", cfg.deriv.clamp}};
    return j;
}

inline json to_json(const ExperimentReport& rep) {
    json j;
    j["experiment"] = rep.experiment_id;
    j["config"] = to_json(rep.config);
    j["version"] = rep.version;
    j["wall_seconds"] = rep.wall_seconds;
    j["notes"] = rep.notes;
    j["flags"] = rep.flags;

    if (!rep.rate_rows.empty()) {
        json rows = json::array();
        for (const auto& r : rep.rate_rows)
            rows.push_back({{"n", r.n},
                            {"median_remainder", r.median},
                            {"q90_remainder", r.q90},
                            {"rate_factor", r.rate_factor},
                            {"scaled", r.scaled}});
        j["per_n"] = rows;
        j["slope"] = rep.slope;
        j["slope_se"] = rep.slope_se;
        j["scaled_ratio"] = rep.scaled_ratio;
    }
    if (!rep.dist_rows.empty()) {
        json rows = json::array();
        for (const auto& r : rep.dist_rows)
            rows.push_back({{"name", r.name},
                            {"q50", r.q50},
                            {"q90", r.q90},
                            {"q95", r.q95},
                            {"q99", r.q99}});
        j["distributions"] = rows;
    }
    if (!rep.ks_values.empty()) {
        j["ks_values"] = rep.ks_values;
        j["median_ks"] = rep.median_ks;
    }
    if (!std::isnan(rep.bridge_variance)) {
        j["bridge_variance"] = {{"observed", rep.bridge_variance},
                                {"expected", rep.bridge_variance_expected},
                                {"se", rep.bridge_variance_se}};
    }
    if (!std::isnan(rep.covariance_jitter)) j["covariance_jitter"] = rep.covariance_jitter;

    json verdicts = json::object();
    for (const auto& [name, ok] : rep.verdicts) verdicts[name] = ok ? "pass" : "fail";
    j["verdicts"] = verdicts;
    return j;
}

inline json to_json(const ConditionReport& rep) {
    json j;
    j["condition"] = to_string(rep.id);
    j["verdict"] = to_string(rep.verdict);
    j["declared"] = rep.declared;
    j["matches_declaration"] = rep.matches_declaration;
    json ev = json::array();
    for (const auto& e : rep.evidence) {
        json row = {{"scale", e.scale}, {"spacing", e.spacing}, {"value", e.value}};
        if (e.axis >= 0) row["axis"] = e.axis;
        ev.push_back(row);
    }
    j["evidence"] = ev;
    if (!rep.witness.empty()) j["witness"] = rep.witness;
    j["detail"] = rep.detail;
    return j;
}

// ReplicateSet export: CSV of (replicate_index, functional_value) plus a
// JSON quantile summary.
inline void write_replicates_csv(const std::string& path, const ReplicateSet& set) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write replicates CSV: " + path);
    out << "replicate_index,functional_value\n";
    for (std::size_t k = 0; k < set.values.size(); ++k)
        out << k << ',' << fmt_g17(set.values[k]) << '\n';
}

inline json replicate_summary_json(const ReplicateSet& set) {
    json j;
    j["functional"] = to_string(set.functional);
    j["master_seed"] = set.master_seed;
    j["count"] = set.values.size();
    j["quantiles"] = {{"0.5", quantile(set.values, 0.5)},
                      {"0.9", quantile(set.values, 0.9)},
                      {"0.95", quantile(set.values, 0.95)},
                      {"0.99", quantile(set.values, 0.99)}};
    return j;
}

// Writes report.json, <experiment>_summary.csv, <experiment>_replicates.csv
// and, for the rate experiment, rate_plotdata.csv. CSV bodies carry no
// timestamps so reruns with the same config and seed are byte-identical.
inline std::vector<std::string> emit_report(const ExperimentReport& rep,
                                            const std::string& out_dir) {
    for (const auto& [label, values] : rep.replicate_tables)
        if (values.empty())
            throw std::runtime_error("emit_report: empty replicate set for '" + label + "'");
    if (rep.replicate_tables.empty())
        throw std::runtime_error("emit_report: report carries no replicate values");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    const std::string base = rep.experiment_id == "limit-compare" ? "limit_compare"
                                                                  : rep.experiment_id;

    {
        const std::string path = (fs::path(out_dir) / "report.json").string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << to_json(rep).dump(2) << '\n';
        written.push_back(path);
    }

    {
        const std::string path = (fs::path(out_dir) / (base + "_summary.csv")).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        if (!rep.rate_rows.empty()) {
            out << "n,median_remainder,q90_remainder,rate_factor,scaled\n";
            for (const auto& r : rep.rate_rows)
                out << r.n << ',' << fmt_g17(r.median) << ',' << fmt_g17(r.q90) << ','
                    << fmt_g17(r.rate_factor) << ',' << fmt_g17(r.scaled) << '\n';
        } else {
            out << "name,q50,q90,q95,q99\n";
            for (const auto& r : rep.dist_rows)
                out << r.name << ',' << fmt_g17(r.q50) << ',' << fmt_g17(r.q90) << ','
                    << fmt_g17(r.q95) << ',' << fmt_g17(r.q99) << '\n';
        }
        written.push_back(path);
    }

    {
        const std::string path = (fs::path(out_dir) / (base + "_replicates.csv")).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "table,replicate_index,value\n";
        for (const auto& [label, values] : rep.replicate_tables)
            for (std::size_t k = 0; k < values.size(); ++k)
                out << label << ',' << k << ',' << fmt_g17(values[k]) << '\n';
        written.push_back(path);
    }

    if (rep.experiment_id == "rate" && !rep.rate_rows.empty() && !std::isnan(rep.slope)) {
        const std::string path = (fs::path(out_dir) / "rate_plotdata.csv").string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "log_n,log_median,fitted\n";
        // refit the intercept for the plot line
        std::vector<double> lx, ly;
        for (const auto& r : rep.rate_rows) {
            lx.push_back(std::log(static_cast<double>(r.n)));
            ly.push_back(std::log(r.median));
        }
        const auto fit = fit_line(lx, ly);
        for (std::size_t i = 0; i < lx.size(); ++i)
            out << fmt_g17(lx[i]) << ',' << fmt_g17(ly[i]) << ','
                << fmt_g17(fit.intercept + fit.slope * lx[i]) << '\n';
        written.push_back(path);
    }
    return written;
}

}  // namespace ecp
