#pragma once

#include <uavwpt/allocation.hpp>
#include <uavwpt/channel.hpp>
#include <uavwpt/config.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/experiments.hpp>
#include <uavwpt/geometry.hpp>
#include <uavwpt/numerics.hpp>
#include <uavwpt/rng.hpp>
#include <uavwpt/stm.hpp>
#include <uavwpt/ttm.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace uavwpt::verification {

// Acceptance tolerances, referenced by name everywhere.
namespace tol {
inline constexpr double flight_energy_rel = 1e-6;
inline constexpr double stm_oracle_rel = 1e-3;
inline constexpr double budget_residual = 1e-8;
inline constexpr double ttm_information = 1e-8;
inline constexpr double ttm_oracle_factor = 1.05;
inline constexpr double concavity_slack = -1e-9;
inline constexpr double kkt_rel = 1e-6;
}  // namespace tol

struct OracleReport {
    std::string oracle;
    std::uint64_t instance_seed = 0;
    double oracle_value = 0.0;
    double solver_value = 0.0;
    double rel_gap = 0.0;
    bool pass = false;
};

inline double relative_gap(double solver, double oracle)
{
    return std::fabs(solver - oracle) / std::max(std::fabs(oracle), 1e-12);
}

// Flight-phase energy by quadrature along the leg into group n.
inline double flight_energy_numeric(const geometry::GroupPlan& plan,
                                    const channel::ChannelParams& params, std::size_t n,
                                    std::size_t i, double zeta)
{
    if (!(zeta >= 0.0))
        throw DomainError("flight_energy_numeric: negative flight time");
    if (n >= plan.size() || i >= plan.field.size())
        throw IndexError("flight_energy_numeric: index out of range");
    if (zeta == 0.0)
        return 0.0;
    const geometry::Point p0 = plan.leg_origin(n);
    const geometry::Point p1 = plan.hover[n];
    const geometry::Point w = plan.field.sensors[i];
    const double D = geometry::distance(p0, p1);
    const double v = D / zeta;
    const double A2 = params.altitude * params.altitude;
    const double scale = params.efficiency(i) * params.pt * params.k0;

    std::function<double(double)> g;
    const bool odd = plan.parity[n] == geometry::RowParity::odd;
    if (D > 0.0 && p0.y == p1.y && (p1.x > p0.x) == odd) {
        // along the row; the parity picks the heading
        const double dy = p1.y - w.y;
        const double sgn = odd ? 1.0 : -1.0;
        g = [=](double t) {
            double dx = sgn * v * t + p0.x - w.x;
            return scale / (dx * dx + dy * dy + A2);
        };
    } else {
        const double ux = D > 0.0 ? (p1.x - p0.x) / D : 0.0;
        const double uy = D > 0.0 ? (p1.y - p0.y) / D : 0.0;
        g = [=](double t) {
            double dx = p0.x + ux * v * t - w.x;
            double dy = p0.y + uy * v * t - w.y;
            return scale / (dx * dx + dy * dy + A2);
        };
    }
    return numerics::integrate_adaptive(g, 0.0, zeta, 1e-12, 4000);
}

struct StmOracleOptions {
    int coarse = 0;              // lattice divisions; 0 picks by N
    double final_step = 1e-9;    // stop when the move size drops below final_step * budget
    bool pin_flights = false;    // keep zeta_1 at its minimum too
};

struct StmOracleResult {
    TimeAllocation alloc;
    double objective = 0.0;
};

namespace detail {

inline void for_each_composition(int parts, int total, std::vector<int>& cur, int k,
                                 const std::function<void(const std::vector<int>&)>& fn)
{
    if (k == parts - 1) {
        cur[k] = total;
        fn(cur);
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur[k] = v;
        for_each_composition(parts, total - v, cur, k + 1, fn);
    }
}

}  // namespace detail

// Exhaustive lattice over the budget simplex, then pairwise-transfer pattern search.
inline StmOracleResult stm_grid_oracle(const stm::StmProblem& p, const StmOracleOptions& opt = {})
{
    p.validate();
    const std::size_t N = p.size();
    if (N > 3)
        throw ConfigError("stm_grid_oracle: supports at most 3 groups");
    const double S = p.horizon - p.min_flight_total();
    // variables: tau_0..tau_N, then the first-leg extension; later legs fly at full speed
    const std::size_t V = opt.pin_flights ? N + 1 : N + 2;

    auto to_alloc = [&](const std::vector<double>& u) {
        TimeAllocation t;
        t.tau.assign(u.begin(), u.begin() + static_cast<long>(N + 1));
        t.zeta.resize(N);
        for (std::size_t n = 0; n < N; ++n)
            t.zeta[n] = p.min_flight(n);
        if (!opt.pin_flights)
            t.zeta[0] += u[N + 1];
        return t;
    };
    auto objective = [&](const std::vector<double>& u) {
        return sum_throughput(p.coeffs, to_alloc(u));
    };

    int m = opt.coarse;
    if (m <= 0)
        m = V <= 3 ? 400 : V <= 4 ? 100 : 40;
    std::vector<double> best(V, 0.0);
    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<int> cur(V);
    std::vector<double> u(V);
    detail::for_each_composition(static_cast<int>(V), m, cur, 0, [&](const std::vector<int>& c) {
        for (std::size_t j = 0; j < V; ++j)
            u[j] = S * c[j] / m;
        double val = objective(u);
        if (val > best_val) {
            best_val = val;
            best = u;
        }
    });

    double step = S / m;
    while (step > opt.final_step * S) {
        bool improved = false;
        for (std::size_t i = 0; i < V; ++i)
            for (std::size_t j = 0; j < V; ++j) {
                if (i == j || best[j] <= 0.0)
                    continue;
                std::vector<double> cand = best;
                double d = std::min(step, best[j]);
                cand[i] += d;
                cand[j] -= d;
                double val = objective(cand);
                if (val > best_val) {
                    best_val = val;
                    best = cand;
                    improved = true;
                }
            }
        if (!improved)
            step *= 0.5;
    }
    return {to_alloc(best), best_val};
}

struct TtmOracleOptions {
    int coarse = 40;             // log-spaced points per hover variable
    double lo = 1e-4;            // hover grid range, seconds
    double hi = 1e10;
    double final_step = 1e-10;   // relative move size at which refinement stops
};

struct TtmOracleResult {
    TimeAllocation alloc;
    double total_time = 0.0;
};

namespace detail {

// Shortest flight meeting the demand, found by bisection on the rate itself.
inline double min_flight_for_demand(const ttm::TtmProblem& p, std::size_t n, double tau_prev,
                                    double tau_n)
{
    const auto& c = p.coeffs;
    const double lb = p.min_flight(n);
    auto info = [&](double z) { return tau_n * channel::group_rate(c, n, tau_prev, z, tau_n); };
    if (info(lb) >= p.demand[n])
        return lb;
    double lo = lb, hi = std::max(2.0 * lb, 1.0);
    while (info(hi) < p.demand[n]) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi))
            return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        (info(mid) >= p.demand[n] ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

inline TtmOracleResult ttm_grid_oracle(const ttm::TtmProblem& p, const TtmOracleOptions& opt = {})
{
    p.validate();
    const std::size_t N = p.size();
    if (N > 2)
        throw ConfigError("ttm_grid_oracle: supports at most 2 groups");

    auto complete = [&](const std::vector<double>& tau) {
        TimeAllocation t;
        t.tau = tau;
        t.zeta.resize(N);
        for (std::size_t n = 0; n < N; ++n)
            t.zeta[n] = detail::min_flight_for_demand(p, n, tau[n], tau[n + 1]);
        return t;
    };
    auto total = [&](const std::vector<double>& tau) { return complete(tau).total(); };

    std::vector<double> grid(static_cast<std::size_t>(opt.coarse));
    for (int k = 0; k < opt.coarse; ++k)
        grid[static_cast<std::size_t>(k)] =
            opt.lo * std::pow(opt.hi / opt.lo, static_cast<double>(k) / (opt.coarse - 1));
    std::vector<double> g0 = grid;
    g0.insert(g0.begin(), 0.0);

    std::vector<double> best;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> tau(N + 1);
    std::function<void(std::size_t)> scan = [&](std::size_t k) {
        if (k == N + 1) {
            double v = total(tau);
            if (v < best_val) {
                best_val = v;
                best = tau;
            }
            return;
        }
        for (double x : (k == 0 ? g0 : grid)) {
            tau[k] = x;
            scan(k + 1);
        }
    };
    scan(0);

    // pattern search in log space over single and paired coordinates
    double step = std::log(opt.hi / opt.lo) / (opt.coarse - 1);
    std::vector<std::vector<int>> dirs;
    for (std::size_t i = 0; i <= N; ++i)
        for (int s : {-1, 1}) {
            std::vector<int> d(N + 1, 0);
            d[i] = s;
            dirs.push_back(d);
            for (std::size_t j = i + 1; j <= N; ++j)
                for (int r : {-1, 1}) {
                    auto e = d;
                    e[j] = r;
                    dirs.push_back(e);
                }
        }
    while (step > opt.final_step) {
        bool improved = false;
        for (const auto& d : dirs) {
            std::vector<double> cand = best;
            for (std::size_t k = 0; k <= N; ++k) {
                if (d[k] == 0)
                    continue;
                if (cand[k] == 0.0)
                    cand[k] = d[k] > 0 ? opt.lo * std::exp(step) : 0.0;
                else
                    cand[k] *= std::exp(d[k] * step);
            }
            if (cand[0] < opt.lo)
                cand[0] = 0.0;
            double v = total(cand);
            if (v < best_val) {
                best_val = v;
                best = cand;
                improved = true;
            }
        }
        if (!improved)
            step *= 0.5;
    }
    TtmOracleResult r;
    r.alloc = complete(best);
    r.total_time = r.alloc.total();
    return r;
}

struct ConcavityReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
};

// tau * R(tau_prev, zeta, tau) of one group at point x = (tau_prev, zeta, tau).
inline double group_h(const channel::GroupCoefficients& c, std::size_t n, const double x[3])
{
    return x[2] * channel::group_rate(c, n, x[0], x[1], x[2]);
}

// Midpoint slack H(l p + (1-l) q) - (l H(p) + (1-l) H(q)).
inline double concavity_slack(const channel::GroupCoefficients& c, std::size_t n,
                              const double p[3], const double q[3], double lambda)
{
    auto mix = [lambda](double a, double b) { return a == b ? a : lambda * a + (1.0 - lambda) * b; };
    double m[3] = {mix(p[0], q[0]), mix(p[1], q[1]), mix(p[2], q[2])};
    return group_h(c, n, m) - mix(group_h(c, n, p), group_h(c, n, q));
}

inline ConcavityReport concavity_suite(const channel::GroupCoefficients& c, std::size_t trials,
                                       std::uint64_t seed, double horizon = 1000.0)
{
    ConcavityReport r;
    Rng rng = make_rng(seed, 0xC0FFEE);
    auto draw = [&]() { return horizon * std::pow(10.0, -6.0 * uniform01(rng)); };
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t n = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(c.size()));
        double p[3] = {draw(), draw(), draw()};
        double q[3] = {draw(), draw(), draw()};
        double lambda = uniform01(rng);
        double s = concavity_slack(c, n, p, q, lambda);
        r.min_slack = std::min(r.min_slack, s);
        if (s < tol::concavity_slack)
            ++r.violations;
        ++r.trials;
    }
    return r;
}

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::size_t energy_instances = 100;
    std::size_t stm_instances = 5;
    std::size_t ttm_instances = 5;
    std::size_t concavity_trials = 10000;
    int workers = 1;
    double coeff_b_scale = 1.0;  // fault injection hook
};

namespace detail {

inline ScenarioConfig oracle_config(const ScenarioConfig& cfg, std::uint64_t seed)
{
    ScenarioConfig c = cfg;
    c.N = 2;
    c.K = std::max(2, std::min(cfg.K, 10));
    c.seed = seed;
    c.validate();
    return c;
}

inline std::vector<OracleReport> energy_reports(const ScenarioConfig& cfg, const VerifyOptions& o)
{
    ScenarioConfig c = cfg;
    c.seed = o.seed;
    auto params = c.channel_params();
    auto rows = experiments::parallel_map<OracleReport>(
        o.energy_instances, o.workers, [&](std::size_t j) {
            auto r = experiments::realize(c, j);
            Rng rng = make_rng(o.seed, 1000000 + j);
            std::size_t n = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(r.plan.size()));
            std::size_t i = r.plan.groups[n][0];
            double zeta = r.plan.leg_length[n] / c.v_max_mps * (1.0 + 9.0 * uniform01(rng));
            double closed = params.efficiency(i) * params.pt * params.k0 * o.coeff_b_scale *
                            channel::coeff_b(r.plan, params.altitude, n, i) * zeta;
            double quad = flight_energy_numeric(r.plan, params, n, i, zeta);
            OracleReport rep{"flight_energy", j, quad, closed, relative_gap(closed, quad), false};
            rep.pass = rep.rel_gap <= tol::flight_energy_rel;
            return rep;
        });
    return rows;
}

}  // namespace detail

inline std::vector<OracleReport> run_verification(const ScenarioConfig& cfg,
                                                  const VerifyOptions& o)
{
    std::vector<OracleReport> out = detail::energy_reports(cfg, o);
    ScenarioConfig c = detail::oracle_config(cfg, o.seed);

    auto stm_rows = experiments::parallel_map<OracleReport>(
        o.stm_instances, o.workers, [&](std::size_t j) {
            auto r = experiments::realize(c, j);
            auto prob = experiments::make_stm(c, r.plan);
            for (auto& b : prob.coeffs.b)
                b *= o.coeff_b_scale;
            auto sol = stm::solve_stm(prob);
            auto orc = stm_grid_oracle(prob);
            OracleReport rep{"stm_grid", j, orc.objective, sol.diag.objective,
                             relative_gap(sol.diag.objective, orc.objective), false};
            rep.pass = sol.diag.objective >= orc.objective * (1.0 - tol::stm_oracle_rel) &&
                       sol.diag.budget_residual <= tol::budget_residual;
            return rep;
        });
    out.insert(out.end(), stm_rows.begin(), stm_rows.end());

    auto ttm_rows = experiments::parallel_map<OracleReport>(
        o.ttm_instances, o.workers, [&](std::size_t j) {
            auto r = experiments::realize(c, j);
            auto prob = experiments::make_ttm(c, r.plan);
            for (auto& b : prob.coeffs.b)
                b *= o.coeff_b_scale;
            auto sol = ttm::solve_ttm(prob);
            auto orc = ttm_grid_oracle(prob);
            OracleReport rep{"ttm_grid", j, orc.total_time, sol.total_time,
                             relative_gap(sol.total_time, orc.total_time), false};
            rep.pass = sol.total_time <= tol::ttm_oracle_factor * orc.total_time;
            return rep;
        });
    out.insert(out.end(), ttm_rows.begin(), ttm_rows.end());

    {
        auto r = experiments::realize(c, 0);
        auto coeffs = channel::compute_coefficients(r.plan, c.array(), c.channel_params());
        auto rep = concavity_suite(coeffs, o.concavity_trials, o.seed, c.T_s);
        OracleReport row{"concavity", 0, tol::concavity_slack, rep.min_slack, 0.0,
                         rep.violations == 0};
        out.push_back(row);
    }
    return out;
}

inline void write_reports_csv(std::ostream& out, const std::vector<OracleReport>& rows)
{
    out << "oracle,instance_seed,oracle_value,solver_value,rel_gap,pass\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%.10g,%.10g,%.3g,%s\n", r.oracle.c_str(),
                      static_cast<unsigned long long>(r.instance_seed), r.oracle_value,
                      r.solver_value, r.rel_gap, r.pass ? "true" : "false");
        out << buf;
    }
}

}  // namespace uavwpt::verification
