#pragma once

#include <uavwpt/allocation.hpp>
#include <uavwpt/channel.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

// Total mission time minimization subject to a per-group information demand.
// Group n needs tau_n R_n >= I_n, i.e. E_n(tau_n) <= a_n tau_{n-1} + b_n zeta_n with
// E_n(tau) = tau * expm1(2 I_n / tau) / gamma_n.
namespace uavwpt::ttm {

using channel::GroupCoefficients;

struct TtmProblem {
    GroupCoefficients coeffs;
    std::vector<double> leg_length;
    double v_max = 0.0;
    std::vector<double> demand;  // nats per group

    std::size_t size() const { return coeffs.size(); }
    double min_flight(std::size_t n) const { return leg_length[n] / v_max; }

    void validate() const
    {
        if (size() == 0)
            throw ConfigError("ttm: no groups");
        if (leg_length.size() != size() || demand.size() != size())
            throw ConfigError("ttm: one leg length and one demand per group required");
        if (!(v_max > 0.0))
            throw ConfigError("ttm: speed must be positive");
        for (std::size_t n = 0; n < size(); ++n) {
            if (!(demand[n] > 0.0) || !std::isfinite(demand[n]))
                throw ConfigError("ttm: information demand must be positive");
            if (!(coeffs.gamma[n] > 0.0) || !(coeffs.a[n] > 0.0) || !(coeffs.b[n] > 0.0))
                throw ConfigError("ttm: coefficients must be positive");
            if (!(leg_length[n] >= 0.0))
                throw ConfigError("ttm: negative leg length");
        }
    }
};

struct TtmResult {
    TimeAllocation alloc;
    double total_time = 0.0;
    std::size_t clamped_legs = 0;
    bool refined = false;
    int sweeps = 0;
};

namespace detail {

// Hover energy requirement E_n(tau) expressed through x = 2 I / tau.
inline double energy_need(double gamma, double I, double tau)
{
    double x = 2.0 * I / tau;
    double e = tau * std::expm1(x) / gamma;
    if (!std::isfinite(e))
        throw DomainError("ttm: hover time too short for the demand");
    return e;
}

// tau minimizing tau + (lambda / c) E(tau); offset = c gamma / (lambda e).
inline double tau_for_offset(double I, double offset)
{
    double t = numerics::lambert_w0_shifted(offset);
    if (!(t > 0.0))
        throw DomainError("ttm: degenerate hover time");
    return 2.0 * I / t;
}

inline double hover_ratio(const GroupCoefficients& c, std::size_t n)
{
    if (n + 1 >= c.size())
        return 1.0;
    double rho = 1.0 - c.a[n + 1] / c.b[n + 1];
    if (!(rho > 0.0))
        throw DomainError("ttm: group " + std::to_string(n + 2) +
                          " harvests more while the UAV hovers than while it flies in");
    return rho;
}

}  // namespace detail

// Hover time of group n with every later leg flown slower than the limit.
inline double tau_closed_form(const TtmProblem& p, std::size_t n)
{
    if (n >= p.size())
        throw IndexError("tau_closed_form: group index out of range");
    const auto& c = p.coeffs;
    double rho = detail::hover_ratio(c, n);
    return detail::tau_for_offset(p.demand[n], rho * c.gamma[n] * c.b[n] / numerics::e_const);
}

// Shortest flight into group n that meets its demand; tau_prev is the hover before the leg.
inline double zeta_closed_form(const TtmProblem& p, std::size_t n, double tau_prev, double tau_n)
{
    const auto& c = p.coeffs;
    double need = detail::energy_need(c.gamma[n], p.demand[n], tau_n);
    return std::max((need - c.a[n] * tau_prev) / c.b[n], p.min_flight(n));
}

namespace detail {

inline TimeAllocation closed_form_allocation(const TtmProblem& p, std::size_t& clamped)
{
    const std::size_t N = p.size();
    TimeAllocation t;
    t.tau.assign(N + 1, 0.0);
    t.zeta.assign(N, 0.0);
    for (std::size_t n = N; n-- > 0;)
        t.tau[n + 1] = tau_closed_form(p, n);
    clamped = 0;
    for (std::size_t n = 0; n < N; ++n) {
        const auto& c = p.coeffs;
        double need = energy_need(c.gamma[n], p.demand[n], t.tau[n + 1]);
        double z = (need - c.a[n] * t.tau[n]) / c.b[n];
        if (z < p.min_flight(n))
            ++clamped;
        t.zeta[n] = std::max(z, p.min_flight(n));
    }
    return t;
}

// Dual coordinate ascent over lambda_n in (0, 1/b_n]; exact when legs hit the speed limit.
struct DualState {
    const TtmProblem& p;
    std::vector<double> lambda;

    double c_of(std::size_t n) const
    {
        if (n + 1 >= p.size())
            return 1.0;
        return 1.0 - lambda[n + 1] * p.coeffs.a[n + 1];
    }
    double tau_of(std::size_t n, double lam, double cn) const
    {
        const auto& c = p.coeffs;
        return tau_for_offset(p.demand[n], cn * c.gamma[n] / (lam * numerics::e_const));
    }
    // d(dual)/d(lambda_n) with lambda_n = lam and everything else fixed
    double gradient(std::size_t n, double lam) const
    {
        const auto& c = p.coeffs;
        double tn = tau_of(n, lam, c_of(n));
        double g = energy_need(c.gamma[n], p.demand[n], tn) - c.b[n] * p.min_flight(n);
        if (n > 0) {
            double c_prev = 1.0 - lam * c.a[n];
            g -= c.a[n] * tau_of(n - 1, lambda[n - 1], c_prev);
        }
        return g;
    }
};

inline double solve_coordinate(const DualState& s, std::size_t n)
{
    const double top = 1.0 / s.p.coeffs.b[n];
    if (s.gradient(n, top) >= 0.0)
        return top;
    // gradient -> +inf as lambda -> 0; work in log lambda
    double hi = std::log(top);
    double ghi = s.gradient(n, top);
    double lo = std::log(std::min(s.lambda[n], top)) - 0.5;
    double glo = s.gradient(n, std::exp(lo));
    while (glo <= 0.0) {
        hi = lo;
        ghi = glo;
        lo -= 2.0 * (hi - lo) + 1.0;
        glo = s.gradient(n, std::exp(lo));
    }
    // Illinois false position
    int side = 0;
    double x = lo;
    for (int it = 0; it < 200; ++it) {
        x = (lo * ghi - hi * glo) / (ghi - glo);
        if (!(x > lo && x < hi))
            x = 0.5 * (lo + hi);
        double gx = s.gradient(n, std::exp(x));
        if (gx > 0.0) {
            lo = x;
            glo = gx;
            if (side == 1)
                ghi *= 0.5;
            side = 1;
        } else {
            hi = x;
            ghi = gx;
            if (side == -1)
                glo *= 0.5;
            side = -1;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(x)) || gx == 0.0)
            break;
    }
    return std::exp(x);
}

inline TimeAllocation dual_allocation(const TtmProblem& p, int& sweeps, int max_sweeps = 20000)
{
    const std::size_t N = p.size();
    DualState s{p, {}};
    s.lambda.resize(N);
    for (std::size_t n = 0; n < N; ++n)
        s.lambda[n] = 1.0 / p.coeffs.b[n];
    for (sweeps = 1; sweeps <= max_sweeps; ++sweeps) {
        double change = 0.0;
        for (std::size_t n = N; n-- > 0;) {
            double v = solve_coordinate(s, n);
            change = std::max(change, std::fabs(v - s.lambda[n]) / s.lambda[n]);
            s.lambda[n] = v;
        }
        if (change < 1e-12)
            break;
    }
    TimeAllocation t;
    t.tau.assign(N + 1, 0.0);
    t.zeta.assign(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        t.tau[n + 1] = s.tau_of(n, s.lambda[n], s.c_of(n));
    for (std::size_t n = 0; n < N; ++n)
        t.zeta[n] = zeta_closed_form(p, n, t.tau[n], t.tau[n + 1]);
    return t;
}

}  // namespace detail

inline TtmResult solve_ttm(const TtmProblem& p)
{
    p.validate();
    TtmResult r;
    r.alloc = detail::closed_form_allocation(p, r.clamped_legs);
    r.total_time = r.alloc.total();
    if (r.clamped_legs > 0) {
        int sweeps = 0;
        TimeAllocation d = detail::dual_allocation(p, sweeps);
        r.sweeps = sweeps;
        if (d.total() < r.total_time) {
            r.alloc = d;
            r.total_time = d.total();
            r.refined = true;
            r.clamped_legs = 0;
            for (std::size_t n = 0; n < p.size(); ++n)
                if (d.zeta[n] <= p.min_flight(n) * (1.0 + 1e-12))
                    ++r.clamped_legs;
        }
    }
    return r;
}

inline void write_ttm_header(std::ostream& out)
{
    out << "N,Pt_dB,v_max,I_total,total_time,clamped_legs\n";
}

inline void write_ttm_row(std::ostream& out, const TtmProblem& p, double pt_db,
                          const TtmResult& r)
{
    double I = std::accumulate(p.demand.begin(), p.demand.end(), 0.0);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%zu\n", p.size(), pt_db, p.v_max, I,
                  r.total_time, r.clamped_legs);
    out << buf;
}

}  // namespace uavwpt::ttm
