#pragma once

#include <uavwpt/errors.hpp>
#include <uavwpt/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace uavwpt::channel {

using geometry::ArrayConfig;
using geometry::GroupPlan;
using geometry::Point;
using geometry::RowParity;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double dbw_to_watts(double dbw) { return db_to_linear(dbw); }

struct ChannelParams {
    double k0 = 1e-3;
    double sigma2 = 1e-10;
    double eta = 0.5;
    std::vector<double> eta_sensor;  // overrides eta when non-empty
    double pt = 1.0;                 // watts
    double altitude = 10.0;

    double efficiency(std::size_t i) const { return eta_sensor.empty() ? eta : eta_sensor.at(i); }

    void validate() const
    {
        if (!(k0 > 0.0) || !(sigma2 > 0.0) || !(pt > 0.0) || !(altitude > 0.0))
            throw ConfigError("channel parameters must be positive");
        auto bad = [](double e) { return !(e > 0.0 && e <= 1.0); };
        if (bad(eta) || std::any_of(eta_sensor.begin(), eta_sensor.end(), bad))
            throw ConfigError("harvesting efficiency must lie in (0, 1]");
    }
};

struct GroupCoefficients {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> gamma;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::vector<double>> sensor_a;
    std::vector<std::vector<double>> sensor_b;
    std::vector<std::vector<std::vector<double>>> uplink;  // [group][member][receive antenna]

    std::size_t size() const { return gamma.size(); }

    static GroupCoefficients from_aggregates(std::vector<double> gamma, std::vector<double> a,
                                             std::vector<double> b)
    {
        if (a.size() != gamma.size() || b.size() != gamma.size())
            throw ConfigError("coefficient vectors differ in length");
        GroupCoefficients c;
        c.gamma = std::move(gamma);
        c.a = std::move(a);
        c.b = std::move(b);
        return c;
    }
};

inline double inverse_square(Point p, Point w, double altitude)
{
    double dx = p.x - w.x, dy = p.y - w.y;
    return 1.0 / (dx * dx + dy * dy + altitude * altitude);
}

namespace detail {

inline std::size_t member_slot(const GroupPlan& plan, std::size_t n, std::size_t i)
{
    if (n >= plan.size())
        throw IndexError("group index out of range");
    const auto& g = plan.groups[n];
    auto it = std::find(g.begin(), g.end(), i);
    if (it == g.end())
        throw IndexError("sensor " + std::to_string(i + 1) + " is not in group " +
                         std::to_string(n + 1));
    return static_cast<std::size_t>(it - g.begin());
}

}  // namespace detail

// Receive antenna k in [1, M) over hover point n to member i.
inline double uplink_gain(const GroupPlan& plan, const ArrayConfig& cfg,
                          const ChannelParams& params, std::size_t n, int k, std::size_t i)
{
    if (k == 0)
        throw IndexError("uplink_gain: antenna 0 is transmit-only");
    detail::member_slot(plan, n, i);
    double L = geometry::horizontal_distance(plan, cfg, n, k, i);
    return params.k0 / (L * L + params.altitude * params.altitude);
}

inline double downlink_gain(const GroupPlan& plan, const ChannelParams& params, std::size_t i,
                            Point uav)
{
    if (i >= plan.field.size())
        throw IndexError("downlink_gain: sensor index out of range");
    return params.k0 * inverse_square(uav, plan.field.sensors[i], params.altitude);
}

// Hover coefficient: sensor i of group n charges while the UAV hovers at the origin of leg n.
inline double coeff_a(const GroupPlan& plan, double altitude, std::size_t n, std::size_t i)
{
    detail::member_slot(plan, n, i);
    return inverse_square(plan.leg_origin(n), plan.field.sensors[i], altitude);
}

// Row-leg closed form. x_prev is the leg origin, c the perpendicular slant offset.
inline double coeff_b_row(RowParity parity, double D, double x_prev, double x_i, double c)
{
    if (parity == RowParity::odd)
        return (std::atan((D + x_prev - x_i) / c) - std::atan((x_prev - x_i) / c)) / (D * c);
    return (std::atan((D - x_prev + x_i) / c) - std::atan((-x_prev + x_i) / c)) / (D * c);
}

// Average inverse square distance along the straight leg p0 -> p1.
inline double coeff_b_segment(Point p0, Point p1, Point w, double altitude)
{
    double D = geometry::distance(p0, p1);
    if (D == 0.0)
        return inverse_square(p0, w, altitude);
    double ux = (p1.x - p0.x) / D, uy = (p1.y - p0.y) / D;
    double rx = w.x - p0.x, ry = w.y - p0.y;
    double s0 = rx * ux + ry * uy;
    double perp = rx * uy - ry * ux;
    double c = std::sqrt(altitude * altitude + perp * perp);
    return (std::atan((D - s0) / c) - std::atan(-s0 / c)) / (D * c);
}

inline double coeff_b(const GroupPlan& plan, double altitude, std::size_t n, std::size_t i)
{
    detail::member_slot(plan, n, i);
    Point p0 = plan.leg_origin(n);
    Point p1 = plan.hover[n];
    Point w = plan.field.sensors[i];
    double D = geometry::distance(p0, p1);
    if (D == 0.0)
        return inverse_square(p0, w, altitude);
    bool along_row = p0.y == p1.y;
    RowParity heading = p1.x > p0.x ? RowParity::odd : RowParity::even;
    if (along_row && heading == plan.parity[n]) {
        double dy = p1.y - w.y;
        double c = std::sqrt(altitude * altitude + dy * dy);
        return coeff_b_row(plan.parity[n], D, p0.x, w.x, c);
    }
    return coeff_b_segment(p0, p1, w, altitude);
}

inline double harvested_energy(const ChannelParams& params, double eta, double a_i, double b_i,
                               double tau_prev, double zeta)
{
    if (tau_prev < 0.0 || zeta < 0.0)
        throw DomainError("harvested_energy: negative duration");
    return eta * params.pt * params.k0 * (a_i * tau_prev + b_i * zeta);
}

inline double harvested_energy(const ChannelParams& params, const GroupCoefficients& coeffs,
                               std::size_t n, std::size_t i, double tau_prev, double zeta)
{
    if (n >= coeffs.size())
        throw IndexError("harvested_energy: group index out of range");
    const auto& m = coeffs.members.at(n);
    auto it = std::find(m.begin(), m.end(), i);
    if (it == m.end())
        throw IndexError("harvested_energy: sensor not in group");
    auto j = static_cast<std::size_t>(it - m.begin());
    return harvested_energy(params, params.efficiency(i), coeffs.sensor_a[n][j],
                            coeffs.sensor_b[n][j], tau_prev, zeta);
}

inline double group_gamma(const GroupPlan& plan, const ArrayConfig& cfg,
                          const ChannelParams& params, std::size_t n)
{
    if (n >= plan.size())
        throw IndexError("group_gamma: group index out of range");
    if (plan.groups[n].empty())
        throw PlanError("group_gamma: group " + std::to_string(n + 1) + " is empty");
    if (cfg.antennas < 2)
        throw ConfigError("group_gamma: need at least one receive antenna");
    double s = 0.0;
    for (auto i : plan.groups[n]) {
        double hs = 0.0;
        for (int k = 1; k < cfg.antennas; ++k) {
            double h = uplink_gain(plan, cfg, params, n, k, i);
            hs += h * h;
        }
        s += params.efficiency(i) * hs;
    }
    return params.pt * params.k0 / params.sigma2 * s;
}

inline double rate(double gamma, double a, double b, double tau_prev, double zeta, double tau)
{
    if (!(tau > 0.0))
        throw DomainError("group_rate: hover time must be positive");
    return 0.5 * std::log1p(gamma * (a * tau_prev + b * zeta) / tau);
}

inline double group_rate(const GroupCoefficients& coeffs, std::size_t n, double tau_prev,
                         double zeta, double tau)
{
    if (n >= coeffs.size())
        throw IndexError("group_rate: group index out of range");
    return rate(coeffs.gamma[n], coeffs.a[n], coeffs.b[n], tau_prev, zeta, tau);
}

inline GroupCoefficients compute_coefficients(const GroupPlan& plan, const ArrayConfig& cfg,
                                              const ChannelParams& params)
{
    params.validate();
    GroupCoefficients c;
    const std::size_t N = plan.size();
    c.members = plan.groups;
    c.a.assign(N, 0.0);
    c.b.assign(N, 0.0);
    c.gamma.assign(N, 0.0);
    c.sensor_a.resize(N);
    c.sensor_b.resize(N);
    c.uplink.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        for (auto i : plan.groups[n]) {
            double ai = coeff_a(plan, params.altitude, n, i);
            double bi = coeff_b(plan, params.altitude, n, i);
            c.sensor_a[n].push_back(ai);
            c.sensor_b[n].push_back(bi);
            c.a[n] += ai;
            c.b[n] += bi;
            std::vector<double> h;
            for (int k = 1; k < cfg.antennas; ++k)
                h.push_back(uplink_gain(plan, cfg, params, n, k, i));
            c.uplink[n].push_back(std::move(h));
        }
        c.gamma[n] = group_gamma(plan, cfg, params, n);
    }
    return c;
}

}  // namespace uavwpt::channel
