#pragma once

#include <uavwpt/channel.hpp>
#include <uavwpt/config.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/geometry.hpp>
#include <uavwpt/rng.hpp>
#include <uavwpt/stm.hpp>
#include <uavwpt/ttm.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace uavwpt::experiments {

enum class Problem { stm, ttm };

inline const char* to_string(Problem p) { return p == Problem::stm ? "stm" : "ttm"; }

struct SweepError : Error {
    using Error::Error;
};

// One random mission: sensors scattered around group anchors spaced by the drawn legs
// along y = 0, with the UAV flying the row y = ytilde.
struct Realization {
    geometry::GroupPlan plan;
    double ytilde = 0.0;
};

inline std::vector<std::size_t> group_sizes(int K, int N)
{
    std::vector<std::size_t> s(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n)
        s[static_cast<std::size_t>(n)] = static_cast<std::size_t>(K / N + (n < K % N ? 1 : 0));
    return s;
}

inline Realization realize(const ScenarioConfig& cfg, std::uint64_t trial)
{
    Rng rng = make_rng(cfg.seed, trial);
    const std::size_t N = static_cast<std::size_t>(cfg.N);
    std::vector<double> D(N);
    for (auto& d : D)
        d = uniform(rng, cfg.D_range_m[0], cfg.D_range_m[1]);
    double ytilde = uniform(rng, cfg.ytilde_range_m[0], cfg.ytilde_range_m[1]);

    geometry::SensorField field;
    std::vector<std::vector<std::size_t>> groups(N);
    std::vector<geometry::Point> hover;
    double anchor = 0.0;
    auto sizes = group_sizes(cfg.K, cfg.N);
    for (std::size_t n = 0; n < N; ++n) {
        anchor += D[n];
        std::vector<geometry::Point> pts;
        for (std::size_t j = 0; j < sizes[n]; ++j) {
            double r = cfg.scatter_m * std::sqrt(uniform01(rng));
            double th = 2.0 * std::numbers::pi * uniform01(rng);
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        double mx = 0.0;
        for (auto& p : pts)
            mx += p.x;
        mx /= static_cast<double>(pts.size());
        for (auto& p : pts) {
            groups[n].push_back(field.sensors.size());
            field.sensors.push_back({anchor + p.x - mx, p.y});
        }
        hover.push_back({anchor, ytilde});
    }
    field.region = geometry::bounding_region(field.sensors);
    std::vector<geometry::RowParity> parity(N, geometry::RowParity::odd);
    Realization r;
    r.ytilde = ytilde;
    r.plan = geometry::assemble_plan(field, groups, hover, parity, {ytilde}, {0.0, ytilde});
    return r;
}

// HF-EH comparison scheme: every sensor is its own group, one receive antenna.
inline ScenarioConfig hf_eh_baseline(const ScenarioConfig& cfg)
{
    ScenarioConfig b = cfg;
    b.N = cfg.K;
    b.M = 2;
    return b;
}

// Singleton stops directly above each sensor, visited in order of x.
inline geometry::GroupPlan baseline_plan(const geometry::GroupPlan& proposed)
{
    const auto& f = proposed.field;
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) { return f.sensors[p].x < f.sensors[q].x; });
    std::vector<std::vector<std::size_t>> groups;
    std::vector<geometry::Point> hover;
    for (auto i : order) {
        groups.push_back({i});
        hover.push_back(f.sensors[i]);
    }
    std::vector<geometry::RowParity> parity(groups.size(), geometry::RowParity::odd);
    return geometry::assemble_plan(f, groups, hover, parity, proposed.rows, proposed.start);
}

inline stm::StmProblem make_stm(const ScenarioConfig& cfg, const geometry::GroupPlan& plan)
{
    stm::StmProblem p;
    p.coeffs = channel::compute_coefficients(plan, cfg.array(), cfg.channel_params());
    p.leg_length = plan.leg_length;
    p.horizon = cfg.T_s;
    p.v_max = cfg.v_max_mps;
    return p;
}

inline ttm::TtmProblem make_ttm(const ScenarioConfig& cfg, const geometry::GroupPlan& plan)
{
    ttm::TtmProblem p;
    p.coeffs = channel::compute_coefficients(plan, cfg.array(), cfg.channel_params());
    p.leg_length = plan.leg_length;
    p.v_max = cfg.v_max_mps;
    for (const auto& g : plan.groups)
        p.demand.push_back(cfg.I_nats * static_cast<double>(g.size()));
    return p;
}

struct TrialOutcome {
    bool ok = false;
    double ours = 0.0;
    std::optional<double> baseline;
    std::string error;
};

// STM sum throughput (nats) or TTM total time (s) for one realization.
inline double solve_value(const ScenarioConfig& cfg, const geometry::GroupPlan& plan,
                          Problem problem)
{
    if (problem == Problem::stm)
        return stm::solve_stm(make_stm(cfg, plan)).diag.objective;
    return ttm::solve_ttm(make_ttm(cfg, plan)).total_time;
}

inline TrialOutcome run_trial(const ScenarioConfig& cfg, std::uint64_t trial, Problem problem,
                              bool with_baseline = true)
{
    TrialOutcome out;
    try {
        Realization r = realize(cfg, trial);
        geometry::check_coverage(r.plan, cfg.array());
        geometry::check_spacing(r.plan, cfg.array());
        out.ours = solve_value(cfg, r.plan, problem);
        if (with_baseline)
            out.baseline = solve_value(hf_eh_baseline(cfg), baseline_plan(r.plan), problem);
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

struct SweepSpec {
    std::string param;  // pt_db | N | v_max | I_nats
    std::vector<double> values;
    int trials = 0;     // 0 keeps the config value

    void validate() const
    {
        if (param != "pt_db" && param != "N" && param != "v_max" && param != "I_nats")
            throw ConfigError("sweep: unknown parameter '" + param + "'");
        if (values.empty())
            throw ConfigError("sweep: no values");
        for (std::size_t j = 1; j < values.size(); ++j)
            if (!(values[j] > values[j - 1]))
                throw ConfigError("sweep: values must be strictly increasing");
        if (param == "N")
            for (double v : values)
                if (v != std::floor(v) || v < 1.0)
                    throw ConfigError("sweep: N values must be positive integers");
        if (trials < 0)
            throw ConfigError("sweep: negative trial count");
    }
};

inline ScenarioConfig apply(const ScenarioConfig& base, const std::string& param, double v)
{
    ScenarioConfig c = base;
    if (param == "pt_db")
        c.pt_db = v;
    else if (param == "N")
        c.N = static_cast<int>(v);
    else if (param == "v_max")
        c.v_max_mps = v;
    else if (param == "I_nats")
        c.I_nats = v;
    else
        throw ConfigError("sweep: unknown parameter '" + param + "'");
    c.validate();
    return c;
}

struct SweepPoint {
    double value = 0.0;
    std::size_t trials = 0;    // successful trials
    std::size_t excluded = 0;
    double mean_ours = 0.0;
    double se_ours = 0.0;
    double mean_baseline = NAN;
    double se_baseline = NAN;
    double improvement = NAN;  // (ours - baseline) / baseline
    std::string first_error;
};

struct AggregateResult {
    std::string param;
    Problem problem = Problem::stm;
    bool baseline = true;
    std::uint64_t seed = 0;
    std::vector<SweepPoint> points;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Sequential sum in index order keeps results independent of scheduling.
inline MeanSe mean_se(const std::vector<double>& v)
{
    MeanSe r;
    if (v.empty())
        return r;
    double s = 0.0;
    for (double x : v)
        s += x;
    r.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double q = 0.0;
        for (double x : v)
            q += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads, storing results by index.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int workers, F&& fn)
{
    std::vector<T> out(count);
    std::size_t w = static_cast<std::size_t>(std::max(1, workers));
    w = std::min(w, std::max<std::size_t>(count, 1));
    if (w <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += w)
                out[i] = fn(i);
        });
    for (auto& th : pool)
        th.join();
    return out;
}

inline SweepPoint run_point(const ScenarioConfig& cfg, double value, int trials, Problem problem,
                            bool with_baseline, int workers)
{
    auto outcomes = parallel_map<TrialOutcome>(
        static_cast<std::size_t>(trials), workers,
        [&](std::size_t i) { return run_trial(cfg, i, problem, with_baseline); });
    SweepPoint pt;
    pt.value = value;
    std::vector<double> ours, base;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            if (pt.first_error.empty())
                pt.first_error = o.error;
            ++pt.excluded;
            continue;
        }
        ours.push_back(o.ours);
        if (o.baseline)
            base.push_back(*o.baseline);
    }
    pt.trials = ours.size();
    auto a = mean_se(ours);
    pt.mean_ours = a.mean;
    pt.se_ours = a.se;
    if (with_baseline && !base.empty()) {
        auto b = mean_se(base);
        pt.mean_baseline = b.mean;
        pt.se_baseline = b.se;
        pt.improvement = (pt.mean_ours - pt.mean_baseline) / pt.mean_baseline;
    }
    return pt;
}

inline AggregateResult run_sweep(const ScenarioConfig& cfg, const SweepSpec& spec,
                                 Problem problem, bool with_baseline = true, int workers = 1)
{
    spec.validate();
    AggregateResult r;
    r.param = spec.param;
    r.problem = problem;
    r.baseline = with_baseline;
    r.seed = cfg.seed;
    int trials = spec.trials > 0 ? spec.trials : cfg.trials;
    for (double v : spec.values) {
        ScenarioConfig c = apply(cfg, spec.param, v);
        SweepPoint pt = run_point(c, v, trials, problem, with_baseline, workers);
        if (pt.trials == 0) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            throw SweepError("sweep: every trial failed at " + spec.param + "=" + buf + ": " +
                             pt.first_error);
        }
        r.points.push_back(pt);
    }
    return r;
}

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& out, const AggregateResult& r, bool timestamp = true)
{
    out << "# uavwpt sweep problem=" << to_string(r.problem) << " param=" << r.param
        << " seed=" << r.seed << " baseline=" << (r.baseline ? "hf-eh" : "none")
        << " units=" << (r.problem == Problem::stm ? "nats" : "seconds") << "\n";
    if (timestamp) {
        std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "# generated " << buf << "\n";
    }
    out << "param,value,trials,mean_ours,se_ours,mean_baseline,se_baseline,improvement\n";
    for (const auto& p : r.points)
        out << r.param << ',' << format_number(p.value) << ',' << p.trials << ','
            << format_number(p.mean_ours) << ',' << format_number(p.se_ours) << ','
            << format_number(p.mean_baseline) << ',' << format_number(p.se_baseline) << ','
            << format_number(p.improvement) << "\n";
    for (const auto& p : r.points)
        if (p.excluded > 0)
            out << "# excluded " << r.param << '=' << format_number(p.value) << ": " << p.excluded
                << " trials (" << p.first_error << ")\n";
}

}  // namespace uavwpt::experiments
