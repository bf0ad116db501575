#pragma once

#include <uavwpt/allocation.hpp>
#include <uavwpt/channel.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

// Sum-throughput maximization over hover and flight times under a mission horizon.
//
// Notation: Y_n = 1 + gamma_n f_n where f_n = (a_n tau_{n-1} + b_n zeta_n) / tau_n at the
// optimum, and nu2 is twice the budget multiplier. Stationarity in tau reads
// phi(Y_N) = nu2 and phi(Y_n) + gamma_{n+1} a_{n+1} / Y_{n+1} = nu2 with
// phi(Y) = ln Y - 1 + 1/Y.
namespace uavwpt::stm {

using channel::GroupCoefficients;

struct StmProblem {
    GroupCoefficients coeffs;
    std::vector<double> leg_length;
    double horizon = 0.0;
    double v_max = 0.0;

    std::size_t size() const { return coeffs.size(); }
    double min_flight(std::size_t n) const { return leg_length[n] / v_max; }
    double min_flight_total() const
    {
        double s = 0.0;
        for (std::size_t n = 0; n < size(); ++n)
            s += min_flight(n);
        return s;
    }

    void validate() const
    {
        if (size() == 0)
            throw ConfigError("stm: no groups");
        if (leg_length.size() != size())
            throw ConfigError("stm: one leg length per group required");
        if (!(horizon > 0.0) || !(v_max > 0.0))
            throw ConfigError("stm: horizon and speed must be positive");
        for (std::size_t n = 0; n < size(); ++n) {
            if (!(coeffs.gamma[n] > 0.0) || !(coeffs.a[n] > 0.0) || !(coeffs.b[n] > 0.0))
                throw ConfigError("stm: coefficients must be positive");
            if (!(leg_length[n] >= 0.0))
                throw ConfigError("stm: negative leg length");
        }
        if (min_flight_total() > horizon)
            throw InfeasibleError("stm: minimum flight time exceeds the horizon");
    }
};

enum class StmMethod { closed_form, active_set };

inline const char* to_string(StmMethod m)
{
    return m == StmMethod::closed_form ? "closed_form" : "active_set";
}

struct StmDiagnostics {
    StmMethod method = StmMethod::closed_form;
    double mu_N = 0.0;               // speed-limit multiplier of the last leg (scaled)
    double budget_multiplier = 0.0;  // d(objective)/dT
    std::vector<double> f;
    std::optional<double> F1;
    std::optional<double> F2;
    // charging variable left off its lower bound: 0 is tau_0, 1 is zeta_1
    std::optional<std::size_t> free_variable;
    double objective = 0.0;
    double budget_residual = 0.0;
    std::string fallback_reason;
};

struct StmResult {
    TimeAllocation alloc;
    StmDiagnostics diag;
};

namespace detail {

// Larger root of phi(Y) = s, returned as ln Y.
inline double log_y_from_phi(double s)
{
    if (!(s > 0.0))
        throw DomainError("stm: stationarity level must be positive");
    double d = -std::expm1(-s) / numerics::e_const;
    return s + numerics::lambert_w0_shifted(d);
}

// ln Y_N given mu_N and c = gamma_N b_N.
inline double log_y_last(double c, double mu)
{
    if (c >= 1.0)
        return 1.0 + mu + numerics::lambert_w0((c - 1.0) * std::exp(-mu - 1.0));
    double d = (c * std::exp(-mu) - std::expm1(-mu)) / numerics::e_const;
    return mu + numerics::lambert_w0_shifted(d);
}

struct Chain {
    std::vector<double> log_y;
    bool ok = true;
    std::size_t bad = 0;
};

// Backward recursion from ln Y_N at level nu2.
inline Chain chain_from_last(const GroupCoefficients& c, double log_y_last_value, double nu2)
{
    const std::size_t N = c.size();
    Chain ch;
    ch.log_y.assign(N, 0.0);
    ch.log_y[N - 1] = log_y_last_value;
    for (std::size_t n = N - 1; n-- > 0;) {
        double s = nu2 - c.gamma[n + 1] * c.a[n + 1] * std::exp(-ch.log_y[n + 1]);
        if (!(s > 0.0)) {
            ch.ok = false;
            ch.bad = n;
            return ch;
        }
        ch.log_y[n] = log_y_from_phi(s);
    }
    return ch;
}

inline Chain chain_at_level(const GroupCoefficients& c, double nu2)
{
    return chain_from_last(c, log_y_from_phi(nu2), nu2);
}

inline std::vector<double> f_from_log_y(const GroupCoefficients& c, const std::vector<double>& ly)
{
    std::vector<double> f(ly.size());
    for (std::size_t n = 0; n < ly.size(); ++n)
        f[n] = std::expm1(ly[n]) / c.gamma[n];
    return f;
}

// Forward pass of tau_n = (a_n tau_{n-1} + b_n zeta_n) / f_n.
inline void forward_tau(const GroupCoefficients& c, const std::vector<double>& f,
                        TimeAllocation& t)
{
    for (std::size_t n = 0; n < c.size(); ++n)
        t.tau[n + 1] = (c.a[n] * t.tau[n] + c.b[n] * t.zeta[n]) / f[n];
}

inline double g_mu(const StmProblem& p, double mu)
{
    const auto& c = p.coeffs;
    const std::size_t N = c.size();
    double cN = c.gamma[N - 1] * c.b[N - 1];
    double lyN = log_y_last(cN, mu);
    double nu2 = cN * std::exp(-lyN) + mu;
    Chain ch = chain_from_last(c, lyN, nu2);
    if (!ch.ok)
        throw DomainError("stm: Lambert W argument out of range at group " +
                          std::to_string(ch.bad + 1));
    return c.gamma[0] * c.b[0] * std::exp(-ch.log_y[0]) - cN * std::exp(-lyN) - mu;
}

}  // namespace detail

// Speed multiplier of the last leg under the assumption that leg 1 absorbs the slack.
inline double solve_mu_n(const StmProblem& p, double cap = 1e6)
{
    if (p.size() == 1)
        return 0.0;
    auto g = [&](double mu) { return detail::g_mu(p, mu); };
    return numerics::bisect_root(g, 0.0, 1.0, 0.0, 400, cap);
}

// f_n for all groups at the given mu_N.
inline std::vector<double> compute_f(const StmProblem& p, double mu)
{
    if (!(mu >= 0.0))
        throw DomainError("compute_f: mu_N must be nonnegative");
    const auto& c = p.coeffs;
    const std::size_t N = c.size();
    double cN = c.gamma[N - 1] * c.b[N - 1];
    double lyN = detail::log_y_last(cN, mu);
    double nu2 = cN * std::exp(-lyN) + mu;
    detail::Chain ch = detail::chain_from_last(c, lyN, nu2);
    if (!ch.ok)
        throw DomainError("compute_f: Lambert W argument out of range at group " +
                          std::to_string(ch.bad + 1));
    return detail::f_from_log_y(c, ch.log_y);
}

struct ZetaTerms {
    double F1 = 0.0;
    double F2 = 0.0;
    double zeta1() const { return F1 / F2; }
};

// Budget closure for zeta_1 with every later leg at full speed.
inline ZetaTerms compute_zeta1(const StmProblem& p, const std::vector<double>& f)
{
    const auto& a = p.coeffs.a;
    const auto& b = p.coeffs.b;
    const std::size_t N = p.size();
    if (f.size() != N)
        throw ConfigError("compute_zeta1: f has wrong length");
    ZetaTerms z;
    double prod_f = 1.0;
    for (double v : f)
        prod_f *= v;
    if (N == 1) {
        z.F1 = p.horizon * f[0];
        z.F2 = f[0] + b[0];
    } else {
        double bracket = p.horizon;
        for (std::size_t n = 1; n + 1 < N; ++n) {
            double inner = 0.0;
            for (std::size_t cc = n + 1; cc < N; ++cc) {
                double prod = 1.0;
                for (std::size_t zz = n + 1; zz <= cc; ++zz)
                    prod *= a[zz] / f[zz];
                inner += prod;
            }
            inner += 1.0 + f[n] / b[n];
            bracket -= inner * b[n] * p.min_flight(n) / f[n];
        }
        bracket -= (1.0 + f[N - 1] / b[N - 1]) * b[N - 1] * p.min_flight(N - 1) / f[N - 1];
        z.F1 = bracket * prod_f;

        double tail_f = 1.0;
        double all_a = 1.0;
        for (std::size_t n = 1; n < N; ++n) {
            tail_f *= f[n];
            all_a *= a[n];
        }
        double mixed = 0.0;
        for (std::size_t n = 1; n + 1 < N; ++n) {
            double pa = 1.0;
            for (std::size_t cc = 1; cc <= n; ++cc)
                pa *= a[cc];
            double pf = 1.0;
            for (std::size_t zz = n + 1; zz < N; ++zz)
                pf *= f[zz];
            mixed += pa * pf;
        }
        z.F2 = prod_f + b[0] * (tail_f + all_a + mixed);
    }
    if (!(z.F2 > 0.0))
        throw DomainError("compute_zeta1: F2 must be positive");
    return z;
}

namespace detail {

inline double relative_budget_residual(const StmProblem& p, const TimeAllocation& t)
{
    return std::fabs(t.total() - p.horizon);
}

inline bool solve_closed_form(const StmProblem& p, StmResult& out)
{
    const auto& c = p.coeffs;
    const std::size_t N = c.size();
    double mu;
    std::vector<double> f;
    ZetaTerms z;
    try {
        mu = solve_mu_n(p);
        f = compute_f(p, mu);
        z = compute_zeta1(p, f);
    } catch (const Error& e) {
        out.diag.fallback_reason = e.what();
        return false;
    }
    double zeta1 = z.zeta1();
    if (!(zeta1 >= p.min_flight(0))) {
        out.diag.fallback_reason = "first leg would exceed the speed limit";
        return false;
    }
    double cN = c.gamma[N - 1] * c.b[N - 1];
    double nu2 = cN / (1.0 + c.gamma[N - 1] * f[N - 1]) + mu;
    const double slack = 1e-9 * nu2;
    if (c.gamma[0] * c.a[0] / (1.0 + c.gamma[0] * f[0]) > nu2 + slack) {
        out.diag.fallback_reason = "start hover would earn more than the first leg";
        return false;
    }

    TimeAllocation t;
    t.tau.assign(N + 1, 0.0);
    t.zeta.assign(N, 0.0);
    t.zeta[0] = zeta1;
    for (std::size_t n = 1; n < N; ++n)
        t.zeta[n] = p.min_flight(n);
    forward_tau(c, f, t);
    t.tau[0] = std::max(0.0, p.horizon - t.total());

    out.alloc = t;
    out.diag.method = StmMethod::closed_form;
    out.diag.mu_N = mu;
    out.diag.budget_multiplier = 0.5 * nu2;
    out.diag.f = f;
    out.diag.F1 = z.F1;
    out.diag.F2 = z.F2;
    out.diag.free_variable = 1;
    return true;
}

// Derivative of the total time with respect to one charging variable.
inline double total_slope(const GroupCoefficients& c, const std::vector<double>& f,
                          std::size_t var)
{
    const std::size_t N = c.size();
    double s = 1.0;
    double dtau;
    std::size_t n0;
    if (var == 0) {
        dtau = c.a[0] / f[0];
        n0 = 0;
    } else {
        n0 = var - 1;
        dtau = c.b[n0] / f[n0];
    }
    s += dtau;
    for (std::size_t n = n0 + 1; n < N; ++n) {
        dtau = c.a[n] * dtau / f[n];
        s += dtau;
    }
    return s;
}

// Exact KKT solve over which charging variables sit at their lower bounds.
inline void solve_active_set(const StmProblem& p, StmResult& out)
{
    const auto& c = p.coeffs;
    const std::size_t N = c.size();

    // larger marginal gain of tau_0 and zeta_1, relative to nu2; later legs stay at full speed
    auto excess = [&](double nu2, std::size_t* arg) {
        Chain ch = chain_at_level(c, nu2);
        if (!ch.ok)
            return std::numeric_limits<double>::infinity();
        double best = c.gamma[0] * c.a[0] * std::exp(-ch.log_y[0]) - nu2;
        std::size_t who = 0;
        double q = c.gamma[0] * c.b[0] * std::exp(-ch.log_y[0]) - nu2;
        if (q > best) {
            best = q;
            who = 1;
        }
        if (arg)
            *arg = who;
        return best;
    };

    // smallest nu2 at which no charging variable wants more time
    double lo = 0.0, hi = 1.0;
    while (excess(hi, nullptr) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300)
            throw BracketError("stm: cannot bracket the budget multiplier");
    }
    for (int it = 0; it < 2000; ++it) {
        double mid = lo > 0.0 && hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        (excess(mid, nullptr) > 0.0 ? lo : hi) = mid;
    }
    double nu_hat = hi;

    auto allocation_at = [&](double nu2, std::vector<double>& f) {
        Chain ch = chain_at_level(c, nu2);
        f = f_from_log_y(c, ch.log_y);
        TimeAllocation t;
        t.tau.assign(N + 1, 0.0);
        t.zeta.assign(N, 0.0);
        for (std::size_t n = 0; n < N; ++n)
            t.zeta[n] = p.min_flight(n);
        forward_tau(c, f, t);
        return t;
    };

    std::vector<double> f;
    TimeAllocation t = allocation_at(nu_hat, f);
    double nu2 = nu_hat;
    if (t.total() < p.horizon) {
        std::size_t var = 0;
        excess(nu_hat, &var);
        double extra = (p.horizon - t.total()) / total_slope(c, f, var);
        if (var == 0)
            t.tau[0] += extra;
        else
            t.zeta[var - 1] += extra;
        forward_tau(c, f, t);
        out.diag.free_variable = var;
    } else {
        // every leg at full speed: raise nu2 until the hovers fit the horizon
        double a = nu_hat, b = std::max(2.0 * nu_hat, 1e-300);
        std::vector<double> fb;
        while (allocation_at(b, fb).total() > p.horizon) {
            a = b;
            b *= 2.0;
            if (b > 1e300)
                throw BracketError("stm: cannot bracket the budget multiplier");
        }
        for (int it = 0; it < 2000; ++it) {
            double mid = a > 0.0 && b / a > 4.0 ? std::sqrt(a * b) : 0.5 * (a + b);
            if (!(mid > a && mid < b))
                break;
            std::vector<double> fm;
            (allocation_at(mid, fm).total() > p.horizon ? a : b) = mid;
        }
        nu2 = b;
        t = allocation_at(b, f);
        t.tau[0] = std::max(0.0, p.horizon - t.total());
        out.diag.free_variable.reset();
    }

    double cN = c.gamma[N - 1] * c.b[N - 1];
    out.alloc = t;
    out.diag.method = StmMethod::active_set;
    out.diag.mu_N = nu2 - cN / (1.0 + c.gamma[N - 1] * f[N - 1]);
    out.diag.budget_multiplier = 0.5 * nu2;
    out.diag.f = f;
    out.diag.F1.reset();
    out.diag.F2.reset();
}

}  // namespace detail

inline StmResult solve_stm(const StmProblem& p)
{
    p.validate();
    StmResult r;
    if (!detail::solve_closed_form(p, r))
        detail::solve_active_set(p, r);
    r.diag.objective = sum_throughput(p.coeffs, r.alloc);
    r.diag.budget_residual = detail::relative_budget_residual(p, r.alloc);
    return r;
}

struct KktReport {
    double max_residual = 0.0;        // stationarity, relative to the budget multiplier
    double max_dual_violation = 0.0;  // clamped legs whose marginal gain beats the multiplier
};

// Central-difference check of stationarity against the reported budget multiplier.
inline KktReport kkt_residuals(const StmProblem& p, const TimeAllocation& t, double multiplier)
{
    const auto& c = p.coeffs;
    const std::size_t N = c.size();
    auto H = [&](std::size_t n, const TimeAllocation& x) { return group_throughput(c, n, x); };
    // Richardson-extrapolated central difference over the groups the variable touches
    auto partial = [&](auto&& slot, std::size_t first, std::size_t last) {
        TimeAllocation x = t;
        double& v = slot(x);
        const double base = v;
        auto central = [&](double h) {
            v = base + h;
            double up = 0.0;
            for (std::size_t n = first; n <= last && n < N; ++n)
                up += H(n, x);
            v = base - h;
            double dn = 0.0;
            for (std::size_t n = first; n <= last && n < N; ++n)
                dn += H(n, x);
            v = base;
            return (up - dn) / (2.0 * h);
        };
        double h = 1e-3 * base;
        return (4.0 * central(0.5 * h) - central(h)) / 3.0;
    };

    KktReport r;
    const double nu = multiplier;
    auto note = [&](double g, bool free) {
        if (free)
            r.max_residual = std::max(r.max_residual, std::fabs(g - nu) / nu);
        else
            r.max_dual_violation = std::max(r.max_dual_violation, std::max(0.0, g - nu) / nu);
    };
    // a start hover below 1e-6 T is budget round-off and counts as sitting at its bound
    if (t.tau[0] > 0.0)
        note(partial([](TimeAllocation& x) -> double& { return x.tau[0]; }, 0, 0),
             t.tau[0] > 1e-6 * p.horizon);
    for (std::size_t n = 1; n <= N; ++n) {
        if (!(t.tau[n] > 1e-12 * p.horizon))
            continue;
        note(partial([n](TimeAllocation& x) -> double& { return x.tau[n]; }, n - 1, n), true);
    }
    // only the first leg is a decision variable
    if (t.zeta[0] > 0.0) {
        bool free = t.zeta[0] > p.min_flight(0) * (1.0 + 1e-9);
        note(partial([](TimeAllocation& x) -> double& { return x.zeta[0]; }, 0, 0), free);
    }
    return r;
}

inline void write_stm_header(std::ostream& out)
{
    out << "N,T,v_max,mu_N,objective,budget_residual,kkt_residual\n";
}

inline void write_stm_row(std::ostream& out, const StmProblem& p, const StmResult& r,
                          double kkt)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.3g,%.3g\n", p.size(), p.horizon,
                  p.v_max, r.diag.mu_N, r.diag.objective, r.diag.budget_residual, kkt);
    out << buf;
}

}  // namespace uavwpt::stm
