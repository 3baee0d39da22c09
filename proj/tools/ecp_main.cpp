// Command-line front end: Monte Carlo experiments, condition checks and
// sampling for the empirical-copula-process library.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ecp/ecp.hpp"
#include "ecp/report_io.hpp"

namespace {

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

std::vector<int> parse_n_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("--n: expected a comma-separated list");
    return out;
}

ecp::Functional parse_functional(const std::string& s) {
    if (s == "sup_abs") return ecp::Functional::sup_abs;
    if (s == "cvm") return ecp::Functional::cvm;
    throw std::invalid_argument("--functional must be sup_abs or cvm");
}

struct CliArgs {
    std::string model, n, out, functional, config, from;
    int reps = -1, boot = -1, grid = -1;
    std::uint64_t seed = 0;
    bool seed_set = false, force = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--model", args.model, "model spec, e.g. family=gaussian,dim=2,rho=0.5");
    cmd->add_option("--n", args.n, "sample size, or comma-separated schedule for rate");
    cmd->add_option("--reps", args.reps, "Monte Carlo replicates R");
    cmd->add_option("--boot", args.boot, "multiplier replicates B");
    cmd->add_option("--grid", args.grid, "grid nodes per axis m");
    cmd->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--functional", args.functional, "sup_abs or cvm");
    cmd->add_flag("--force", args.force, "run even when declared conditions are not met");
    cmd->add_option("--config", args.config, "flat key=value config file; flags override");
}

// Precedence: flag > config file > environment (output dir only) > default.
ecp::ExperimentConfig build_config(const std::string& experiment, const CliArgs& args,
                                   int default_grid) {
    ecp::ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.grid_m = default_grid;

    std::map<std::string, std::string> file;
    if (!args.config.empty()) file = read_config_file(args.config);
    const auto from_file = [&](const char* key) -> const std::string* {
        auto it = file.find(key);
        return it == file.end() ? nullptr : &it->second;
    };

    if (const auto* v = from_file("model")) cfg.model_spec = *v;
    if (const auto* v = from_file("n")) cfg.n_schedule = parse_n_list(*v);
    if (const auto* v = from_file("reps")) cfg.replicates = std::stoi(*v);
    if (const auto* v = from_file("boot")) cfg.bootstrap = std::stoi(*v);
    if (const auto* v = from_file("grid")) cfg.grid_m = std::stoi(*v);
    if (const auto* v = from_file("seed")) cfg.seed = std::stoull(*v);
    if (const auto* v = from_file("out")) cfg.out_dir = *v;
    if (const auto* v = from_file("functional")) cfg.functional = parse_functional(*v);
    if (const auto* v = from_file("force")) cfg.force = (*v == "true" || *v == "1");

    if (!args.model.empty()) cfg.model_spec = args.model;
    if (!args.n.empty()) cfg.n_schedule = parse_n_list(args.n);
    if (args.reps > 0) cfg.replicates = args.reps;
    if (args.boot > 0) cfg.bootstrap = args.boot;
    if (args.grid > 0) cfg.grid_m = args.grid;
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (!args.functional.empty()) cfg.functional = parse_functional(args.functional);
    if (args.force) cfg.force = true;

    if (cfg.out_dir.empty()) {
        if (const char* env = std::getenv("ECP_OUT_DIR")) cfg.out_dir = env;
        else cfg.out_dir = "ecp_out";
    }
    return cfg;
}

int run_experiment_command(const std::string& experiment, const CliArgs& args,
                           int default_grid) {
    auto cfg = build_config(experiment, args, default_grid);
    ecp::ExperimentReport rep;
    try {
        rep = ecp::run_experiment(cfg);
    } catch (const ecp::PreconditionRefused& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 2;
    }
    const auto files = ecp::emit_report(rep, cfg.out_dir);
    for (const auto& f : files) std::cout << "wrote " << f << '\n';
    for (const auto& flag : rep.flags) std::cout << "flag: " << flag << '\n';
    bool ok = true;
    for (const auto& [name, pass] : rep.verdicts) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << '\n';
        ok = ok && pass;
    }
    return ok ? 0 : 1;
}

int run_check_conditions(const CliArgs& args) {
    auto cfg = build_config("check-conditions", args, 41);
    const auto model = ecp::make_model(cfg.model_spec);

    ecp::json out;
    out["model"] = model->spec();
    bool consistent = true;

    const auto c21 = ecp::probe_condition_first_order(*model);
    out["C2.1"] = ecp::to_json(c21);
    consistent = consistent && c21.matches_declaration;
    std::cout << "C2.1: " << ecp::to_string(c21.verdict)
              << (c21.matches_declaration ? " (matches declaration)" : " (MISMATCH)") << '\n';

    if (model->caps().analytic_second_derivs) {
        const auto c41 = ecp::estimate_K_condition_second_order(*model);
        out["C4.1"] = ecp::to_json(c41);
        consistent = consistent && c41.matches_declaration;
        std::cout << "C4.1: " << ecp::to_string(c41.verdict) << ", K-hat "
                  << ecp::estimated_K(c41)
                  << (c41.matches_declaration ? " (matches declaration)" : " (MISMATCH)") << '\n';
    }

    if (const auto* ev = dynamic_cast<const ecp::ExtremeValueCopula*>(model.get());
        ev && ev->pickands().has_second()) {
        const auto m = ecp::pickands_M(ev->pickands());
        out["P5.2"] = {{"M", m.value}, {"finite", m.finite}};
        std::cout << "P5.2: M = " << m.value << (m.finite ? " (finite)" : " (NOT refinement-stable)")
                  << '\n';
        consistent = consistent && m.finite;
    }

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto path = (fs::path(cfg.out_dir) / "conditions.json").string();
    std::ofstream file(path);
    file << out.dump(2) << '\n';
    std::cout << "wrote " << path << '\n';
    return consistent ? 0 : 1;
}

int run_sample(const CliArgs& args) {
    auto cfg = build_config("sample", args, 41);
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto path = (fs::path(cfg.out_dir) / "sample.csv").string();
    if (!args.from.empty()) {
        // ingest a raw-sample CSV and write its pseudo-observations
        const auto raw = ecp::read_sample_csv(args.from, ecp::Scale::raw);
        const auto unit = ecp::pseudo_observations(raw);
        ecp::write_sample_csv(path, unit);
        for (int j = 0; j < unit.d; ++j)
            if (unit.column_ties[j])
                std::cout << "note: ties in column " << (j + 1) << " (maximal ranks used)\n";
    } else {
        const auto model = ecp::make_model(cfg.model_spec);
        ecp::Rng rng = ecp::Rng::derive(cfg.seed, {ecp::fnv1a64("sample")});
        ecp::write_sample_csv(path, model->sample(cfg.n_schedule.front(), rng));
    }
    std::cout << "wrote " << path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"empirical copula process experiments"};
    app.require_subcommand(1);

    CliArgs rate_args, mult_args, limit_args, cond_args, sample_args;
    auto* rate = app.add_subcommand("rate", "remainder-rate experiment");
    add_common(rate, rate_args);
    auto* mult = app.add_subcommand("multiplier", "multiplier-validity experiment");
    add_common(mult, mult_args);
    auto* limit = app.add_subcommand("limit-compare", "limit-law agreement experiment");
    add_common(limit, limit_args);
    auto* cond = app.add_subcommand("check-conditions", "numerical condition checkers");
    add_common(cond, cond_args);
    auto* sample = app.add_subcommand("sample", "draw a sample, or rank-transform a raw CSV");
    add_common(sample, sample_args);
    sample->add_option("--from", sample_args.from,
                       "raw sample CSV to ingest (pseudo-observations are written instead)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rate->parsed()) return run_experiment_command("rate", rate_args, 41);
        if (mult->parsed()) return run_experiment_command("multiplier", mult_args, 21);
        if (limit->parsed()) return run_experiment_command("limit-compare", limit_args, 21);
        if (cond->parsed()) return run_check_conditions(cond_args);
        if (sample->parsed()) return run_sample(sample_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
