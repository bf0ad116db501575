#pragma once

#include <uavwpt/config.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/experiments.hpp>
#include <uavwpt/geometry.hpp>
#include <uavwpt/stm.hpp>
#include <uavwpt/ttm.hpp>
#include <uavwpt/verification.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace uavwpt::cli {

enum ExitCode : int { ok = 0, infeasible = 2, numeric = 3, config = 4 };

struct CommandOutcome {
    int exit_code = ok;
    std::string summary;
    std::vector<std::string> artifacts;
};

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<long long> seed;
    std::string field_path;
    // solve
    std::string problem = "stm";
    // sweep
    std::string param;
    std::string values;
    int trials = 0;
    int workers = 1;
    std::string baseline = "hf-eh";
    // verify
    double fault_coeff_b = 1.0;
};

namespace detail {

inline std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j)
        s += (j ? " " : "") + fmt(v[j]);
    return s;
}

inline ScenarioConfig load(const Options& o)
{
    ScenarioConfig cfg = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
    if (o.seed) {
        if (*o.seed < 0)
            throw ConfigError("--seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(*o.seed);
    }
    if (o.trials < 0)
        throw ConfigError("--trials must be nonnegative");
    if (o.workers < 1)
        throw ConfigError("--workers must be at least 1");
    cfg.validate();
    return cfg;
}

inline std::ofstream open_out(const Options& o, const std::string& name, CommandOutcome& r)
{
    std::filesystem::path dir(o.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + o.out_dir + ": " + ec.message());
    std::filesystem::path p = dir / name;
    std::ofstream f(p);
    if (!f)
        throw ConfigError("cannot write " + p.string());
    r.artifacts.push_back(p.string());
    return f;
}

inline geometry::GroupPlan scenario_plan(const ScenarioConfig& cfg, const Options& o)
{
    if (o.field_path.empty()) {
        auto plan = experiments::realize(cfg, 0).plan;
        geometry::check_coverage(plan, cfg.array());
        geometry::check_spacing(plan, cfg.array());
        return plan;
    }
    auto field = geometry::load_field(o.field_path);
    return geometry::plan_groups(field, cfg.array(), static_cast<std::size_t>(cfg.N), cfg.rows_m);
}

}  // namespace detail

inline CommandOutcome cmd_plan(const Options& o, std::ostream& out, std::ostream& err)
{
    CommandOutcome r;
    ScenarioConfig cfg = detail::load(o);
    auto plan = detail::scenario_plan(cfg, o);
    auto f = detail::open_out(o, "plan.csv", r);
    geometry::write_plan_csv(f, plan);
    auto rep = geometry::check_feasibility(plan, cfg.array(), cfg.v_max_mps, cfg.T_s);
    out << "groups " << plan.size() << "\nflight_time " << detail::fmt(rep.flight_time)
        << "\nhorizon " << detail::fmt(rep.horizon) << "\nfeasible " << (rep.feasible ? 1 : 0)
        << "\n";
    if (!rep.feasible) {
        err << "infeasible plan: flight time " << detail::fmt(rep.flight_time) << " s vs horizon "
            << detail::fmt(rep.horizon) << " s; antenna distance sum "
            << detail::fmt(rep.antenna_distance_sum) << " m vs travel budget "
            << detail::fmt(rep.travel_budget) << " m\n";
        r.exit_code = infeasible;
    }
    r.summary = "plan written";
    return r;
}

inline CommandOutcome cmd_solve(const Options& o, std::ostream& out, std::ostream&)
{
    CommandOutcome r;
    ScenarioConfig cfg = detail::load(o);
    auto plan = detail::scenario_plan(cfg, o);
    if (o.problem == "stm") {
        auto p = experiments::make_stm(cfg, plan);
        auto s = stm::solve_stm(p);
        auto k = stm::kkt_residuals(p, s.alloc, s.diag.budget_multiplier);
        auto f = detail::open_out(o, "stm_diagnostics.csv", r);
        stm::write_stm_header(f);
        stm::write_stm_row(f, p, s, k.max_residual);
        out << "tau " << detail::join(s.alloc.tau) << "\nzeta " << detail::join(s.alloc.zeta)
            << "\nthroughput " << detail::fmt(s.diag.objective) << "\nbudget_residual "
            << detail::fmt(s.diag.budget_residual) << "\nmethod " << stm::to_string(s.diag.method)
            << "\n";
    } else if (o.problem == "ttm") {
        auto p = experiments::make_ttm(cfg, plan);
        auto s = ttm::solve_ttm(p);
        auto f = detail::open_out(o, "ttm_diagnostics.csv", r);
        ttm::write_ttm_header(f);
        ttm::write_ttm_row(f, p, cfg.pt_db, s);
        out << "tau " << detail::join(s.alloc.tau) << "\nzeta " << detail::join(s.alloc.zeta)
            << "\ntotal_time " << detail::fmt(s.total_time) << "\nclamped_legs " << s.clamped_legs
            << "\n";
    } else {
        throw ConfigError("solve: problem must be stm or ttm");
    }
    r.summary = "solved " + o.problem;
    return r;
}

inline CommandOutcome cmd_sweep(const Options& o, std::ostream& out, std::ostream& err)
{
    CommandOutcome r;
    ScenarioConfig cfg = detail::load(o);
    experiments::SweepSpec spec;
    spec.param = o.param;
    spec.values = uavwpt::detail::parse_list("--values", o.values);
    spec.trials = o.trials;
    experiments::Problem problem;
    if (o.problem == "stm")
        problem = experiments::Problem::stm;
    else if (o.problem == "ttm")
        problem = experiments::Problem::ttm;
    else
        throw ConfigError("sweep: problem must be stm or ttm");
    if (o.baseline != "hf-eh" && o.baseline != "none")
        throw ConfigError("--baseline must be hf-eh or none");
    auto res = experiments::run_sweep(cfg, spec, problem, o.baseline == "hf-eh", o.workers);
    auto f = detail::open_out(o, "sweep_" + o.param + ".csv", r);
    experiments::write_sweep_csv(f, res);
    experiments::write_sweep_csv(out, res, false);
    for (const auto& p : res.points)
        if (p.excluded > 0)
            err << "warning: " << p.excluded << " trials excluded at " << o.param << "="
                << detail::fmt(p.value) << "\n";
    r.summary = "sweep written";
    return r;
}

inline CommandOutcome cmd_verify(const Options& o, std::ostream& out, std::ostream& err)
{
    CommandOutcome r;
    ScenarioConfig cfg = detail::load(o);
    verification::VerifyOptions v;
    v.seed = cfg.seed;
    v.workers = o.workers;
    v.coeff_b_scale = o.fault_coeff_b;
    auto rows = verification::run_verification(cfg, v);
    auto f = detail::open_out(o, "verify.csv", r);
    verification::write_reports_csv(f, rows);
    verification::write_reports_csv(out, rows);
    std::vector<std::string> failed;
    for (const auto& row : rows)
        if (!row.pass && std::find(failed.begin(), failed.end(), row.oracle) == failed.end())
            failed.push_back(row.oracle);
    for (const auto& name : failed)
        err << "verify: oracle " << name << " failed\n";
    r.exit_code = failed.empty() ? ok : numeric;
    r.summary = failed.empty() ? "all oracles passed" : "oracle failures";
    return r;
}

// Arguments exclude the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"UAV hover and flight time allocation for wireless-powered sensor networks",
                 "uavwpt"};
    app.require_subcommand(1);
    Options o;
    long long seed = 0;

    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", o.config_path, "scenario INI file")->check(CLI::ExistingFile);
        sc->add_option("--out", o.out_dir, "output directory");
        sc->add_option("--seed", seed, "override the config seed");
        sc->add_option("--workers", o.workers, "worker threads");
    };

    auto* plan = app.add_subcommand("plan", "group sensors and write the hover plan");
    common(plan);
    plan->add_option("--field", o.field_path, "sensor positions, one 'x y' per line");

    auto* solve = app.add_subcommand("solve", "solve one instance");
    common(solve);
    solve->add_option("problem", o.problem, "stm or ttm")
        ->required()
        ->check(CLI::IsMember({"stm", "ttm"}));
    solve->add_option("--field", o.field_path, "sensor positions, one 'x y' per line");

    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over one parameter");
    common(sweep);
    sweep->add_option("--param", o.param, "pt_db, N, v_max or I_nats")->required();
    sweep->add_option("--values", o.values, "comma separated values")->required();
    sweep->add_option("--problem", o.problem, "stm or ttm")->check(CLI::IsMember({"stm", "ttm"}));
    sweep->add_option("--trials", o.trials, "trials per point");
    sweep->add_option("--baseline", o.baseline, "hf-eh or none")
        ->check(CLI::IsMember({"hf-eh", "none"}));

    auto* verify = app.add_subcommand("verify", "run the oracle suite");
    common(verify);
    verify->add_option("--fault-coeff-b", o.fault_coeff_b)->group("");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ok : config;
    }
    for (auto* sc : {plan, solve, sweep, verify})
        if (sc->parsed() && sc->count("--seed"))
            o.seed = seed;

    try {
        CommandOutcome r;
        if (plan->parsed())
            r = cmd_plan(o, out, err);
        else if (solve->parsed())
            r = cmd_solve(o, out, err);
        else if (sweep->parsed())
            r = cmd_sweep(o, out, err);
        else
            r = cmd_verify(o, out, err);
        for (const auto& a : r.artifacts)
            err << "wrote " << a << "\n";
        return r.exit_code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const PlanError& e) {
        err << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << "\n";
        return numeric;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return config;
    }
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args), out, err);
}

}  // namespace uavwpt::cli
