#pragma once

#include <uavwpt/channel.hpp>

#include <numeric>
#include <vector>

namespace uavwpt {

// tau[0] is the hover at the start point, tau[n + 1] the hover over group n,
// zeta[n] the flight into group n.
struct TimeAllocation {
    std::vector<double> tau;
    std::vector<double> zeta;

    double hover_time() const { return std::accumulate(tau.begin(), tau.end(), 0.0); }
    double flight_time() const { return std::accumulate(zeta.begin(), zeta.end(), 0.0); }
    double total() const { return hover_time() + flight_time(); }
};

// Throughput of group n, tau_n * R_n; zero when the group gets no uplink slot.
inline double group_throughput(const channel::GroupCoefficients& c, std::size_t n,
                               const TimeAllocation& t)
{
    double tn = t.tau[n + 1];
    if (tn <= 0.0)
        return 0.0;
    return tn * channel::group_rate(c, n, t.tau[n], t.zeta[n], tn);
}

inline double sum_throughput(const channel::GroupCoefficients& c, const TimeAllocation& t)
{
    double s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n)
        s += group_throughput(c, n, t);
    return s;
}

}  // namespace uavwpt
