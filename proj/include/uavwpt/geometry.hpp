#pragma once

#include <uavwpt/errors.hpp>
#include <uavwpt/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

// Indices are zero-based throughout: sensor i in [0, K), group n in [0, N).
// Text outputs print them one-based.
namespace uavwpt::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point p, Point q)
{
    return std::hypot(p.x - q.x, p.y - q.y);
}

struct Region {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(Point p) const
    {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct SensorField {
    std::vector<Point> sensors;
    Region region;

    std::size_t size() const { return sensors.size(); }
};

struct ArrayConfig {
    int antennas = 3;       // M; antenna 0 transmits, the rest receive
    double spacing = 0.1;   // delta
    double altitude = 10.0; // A
    double d_max = 35.0;
};

enum class RowParity { odd, even };

inline const char* to_string(RowParity p)
{
    return p == RowParity::odd ? "odd" : "even";
}

struct GroupPlan {
    SensorField field;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<Point> hover;
    std::vector<double> leg_length;  // D_n, leg from the previous hover point (or start)
    std::vector<RowParity> parity;
    std::vector<double> rows;
    Point start;

    std::size_t size() const { return groups.size(); }

    // Where the UAV hovers before flying leg n.
    Point leg_origin(std::size_t n) const { return n == 0 ? start : hover[n - 1]; }
};

inline Region bounding_region(const std::vector<Point>& pts)
{
    Region r{0.0, 0.0, 0.0, 0.0};
    if (pts.empty())
        return r;
    r = {pts[0].x, pts[0].x, pts[0].y, pts[0].y};
    for (auto p : pts) {
        r.x_min = std::min(r.x_min, p.x);
        r.x_max = std::max(r.x_max, p.x);
        r.y_min = std::min(r.y_min, p.y);
        r.y_max = std::max(r.y_max, p.y);
    }
    return r;
}

inline SensorField generate_field(std::size_t K, const Region& region, std::uint64_t seed)
{
    if (K < 1)
        throw ConfigError("generate_field: K must be at least 1");
    if (!(region.x_max > region.x_min) || !(region.y_max > region.y_min))
        throw ConfigError("generate_field: region has zero area");
    Rng rng = make_rng(seed);
    SensorField f;
    f.region = region;
    f.sensors.reserve(K);
    for (std::size_t i = 0; i < K; ++i) {
        double x = uniform(rng, region.x_min, region.x_max);
        double y = uniform(rng, region.y_min, region.y_max);
        f.sensors.push_back({x, y});
    }
    return f;
}

inline double l_max(const ArrayConfig& cfg)
{
    if (!(cfg.d_max > cfg.altitude))
        throw DomainError("l_max: d_max must exceed the altitude");
    return std::sqrt((cfg.d_max - cfg.altitude) * (cfg.d_max + cfg.altitude));
}

// Horizontal distance from antenna k over hover point n to sensor i.
inline double horizontal_distance(const GroupPlan& plan, const ArrayConfig& cfg, std::size_t n,
                                  int k, std::size_t i)
{
    if (n >= plan.size())
        throw IndexError("horizontal_distance: group index out of range");
    if (k < 0 || k >= cfg.antennas)
        throw IndexError("horizontal_distance: antenna index out of range");
    if (i >= plan.field.size())
        throw IndexError("horizontal_distance: sensor index out of range");
    Point h = plan.hover[n];
    Point w = plan.field.sensors[i];
    return std::hypot(h.x - w.x, h.y + k * cfg.spacing - w.y);
}

namespace detail {

inline std::size_t nearest_row(const std::vector<double>& rows, double y)
{
    std::size_t best = 0;
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (std::fabs(rows[r] - y) < std::fabs(rows[best] - y))
            best = r;
    return best;
}

}  // namespace detail

// Fills leg lengths from explicit hover points.
inline GroupPlan assemble_plan(const SensorField& field, std::vector<std::vector<std::size_t>> groups,
                               std::vector<Point> hover, std::vector<RowParity> parity,
                               std::vector<double> rows, Point start)
{
    if (hover.size() != groups.size() || parity.size() != groups.size())
        throw ConfigError("plan: one hover point and parity per group required");
    GroupPlan plan;
    plan.field = field;
    plan.groups = std::move(groups);
    plan.hover = std::move(hover);
    plan.parity = std::move(parity);
    plan.rows = std::move(rows);
    plan.start = start;
    for (std::size_t n = 0; n < plan.size(); ++n) {
        if (plan.groups[n].empty())
            throw PlanError("plan: group " + std::to_string(n + 1) + " is empty");
        for (auto i : plan.groups[n])
            if (i >= field.size())
                throw IndexError("plan: sensor index out of range");
        plan.leg_length.push_back(distance(plan.leg_origin(n), plan.hover[n]));
    }
    return plan;
}

// Hover points at member centroids on the row holding most members. Without an explicit
// start, the UAV starts one mean leg length before the first hover point (fallback_lead
// when there is a single group).
inline GroupPlan build_plan(const SensorField& field, std::vector<std::vector<std::size_t>> groups,
                            std::vector<double> rows, std::optional<Point> start = std::nullopt,
                            double fallback_lead = 0.0)
{
    if (rows.empty())
        throw ConfigError("plan: at least one row is required");
    std::sort(rows.begin(), rows.end());
    const std::size_t N = groups.size();
    std::vector<Point> hover;
    std::vector<RowParity> parity;
    for (std::size_t n = 0; n < N; ++n) {
        const auto& g = groups[n];
        if (g.empty())
            throw PlanError("plan: group " + std::to_string(n + 1) + " is empty");
        std::vector<std::size_t> votes(rows.size(), 0);
        double sx = 0.0;
        for (auto i : g) {
            if (i >= field.size())
                throw IndexError("plan: sensor index out of range");
            sx += field.sensors[i].x;
            ++votes[detail::nearest_row(rows, field.sensors[i].y)];
        }
        std::size_t row = detail::nearest_row(rows, field.sensors[g.front()].y);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (votes[r] > votes[row])
                row = r;
        hover.push_back({sx / static_cast<double>(g.size()), rows[row]});
        parity.push_back(row % 2 == 0 ? RowParity::odd : RowParity::even);
    }

    Point s0;
    if (start) {
        s0 = *start;
    } else {
        double lead = fallback_lead;
        if (N >= 2) {
            double s = 0.0;
            for (std::size_t n = 1; n < N; ++n)
                s += distance(hover[n], hover[n - 1]);
            lead = s / static_cast<double>(N - 1);
        }
        double dir = parity[0] == RowParity::odd ? 1.0 : -1.0;
        s0 = {hover[0].x - dir * lead, hover[0].y};
    }
    return assemble_plan(field, std::move(groups), std::move(hover), std::move(parity),
                         std::move(rows), s0);
}

// Throws PlanError naming the first group that breaks the coverage rule.
inline void check_coverage(const GroupPlan& plan, const ArrayConfig& cfg)
{
    const double L = l_max(cfg);
    for (std::size_t n = 0; n < plan.size(); ++n)
        for (auto i : plan.groups[n])
            if (distance(plan.hover[n], plan.field.sensors[i]) > L)
                throw PlanError("plan: sensor " + std::to_string(i + 1) + " of group " +
                                std::to_string(n + 1) + " lies beyond L_max");
}

inline void check_spacing(const GroupPlan& plan, const ArrayConfig& cfg)
{
    const auto& D = plan.leg_length;
    for (std::size_t n = 1; n < plan.size(); ++n) {
        if (D[n] > cfg.d_max)
            throw PlanError("plan: group " + std::to_string(n + 1) +
                            " is farther than d_max from its predecessor");
        if (n + 1 < plan.size() && !(D[n] + D[n + 1] > cfg.d_max))
            throw PlanError("plan: groups " + std::to_string(n + 1) + " and " +
                            std::to_string(n + 2) + " are too close to d_max spacing");
    }
    for (std::size_t n = 0; n < plan.size(); ++n)
        if (!(D[n] > 0.0))
            throw PlanError("plan: group " + std::to_string(n + 1) + " has a zero-length leg");
}

// Serpentine order: rows bottom to top, odd rows left to right, even rows right to left.
inline std::vector<std::size_t> serpentine_order(const SensorField& field,
                                                 const std::vector<double>& sorted_rows)
{
    std::vector<std::size_t> order(field.size());
    std::iota(order.begin(), order.end(), 0);
    auto row_of = [&](std::size_t i) { return detail::nearest_row(sorted_rows, field.sensors[i].y); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
        std::size_t rp = row_of(p), rq = row_of(q);
        if (rp != rq)
            return rp < rq;
        double xp = field.sensors[p].x, xq = field.sensors[q].x;
        return rp % 2 == 0 ? xp < xq : xp > xq;
    });
    return order;
}

inline GroupPlan plan_groups(const SensorField& field, const ArrayConfig& cfg, std::size_t N,
                             std::vector<double> row_ys, std::optional<Point> start = std::nullopt)
{
    const std::size_t K = field.size();
    if (N < 1 || N > K)
        throw ConfigError("plan_groups: need 1 <= N <= K");
    if (row_ys.empty())
        throw ConfigError("plan_groups: at least one row is required");
    std::sort(row_ys.begin(), row_ys.end());
    const double L = l_max(cfg);
    auto order = serpentine_order(field, row_ys);

    // boundaries[n] = first traversal position of group n
    std::vector<std::size_t> first(N + 1);
    for (std::size_t n = 0, pos = 0; n <= N; ++n) {
        first[n] = pos;
        if (n < N)
            pos += K / N + (n < K % N ? 1 : 0);
    }

    auto make = [&]() {
        std::vector<std::vector<std::size_t>> groups(N);
        for (std::size_t n = 0; n < N; ++n)
            groups[n].assign(order.begin() + first[n], order.begin() + first[n + 1]);
        return build_plan(field, groups, row_ys, start, cfg.d_max);
    };

    GroupPlan plan = make();
    for (std::size_t step = 0; step < K * N + 1; ++step) {
        bool moved = false;
        for (std::size_t n = 0; n < N && !moved; ++n) {
            for (std::size_t p = first[n]; p < first[n + 1]; ++p) {
                if (distance(plan.hover[n], field.sensors[order[p]]) <= L)
                    continue;
                // shift the nearer boundary so the stray sensor joins a neighbour
                std::size_t to_front = p - first[n] + 1;
                std::size_t to_back = first[n + 1] - p;
                std::size_t size = first[n + 1] - first[n];
                if (n > 0 && to_front < size && (to_front <= to_back || n + 1 == N)) {
                    first[n] = p + 1;
                    moved = true;
                } else if (n + 1 < N && to_back < size) {
                    first[n + 1] = p;
                    moved = true;
                }
                if (moved)
                    break;
                throw PlanError("plan_groups: group " + std::to_string(n + 1) +
                                " cannot cover sensor " + std::to_string(order[p] + 1) +
                                " within L_max");
            }
        }
        if (!moved)
            break;
        plan = make();
    }
    check_coverage(plan, cfg);
    check_spacing(plan, cfg);
    return plan;
}

struct FeasibilityReport {
    bool feasible = false;
    double flight_time = 0.0;       // sum D_n / v_max
    double horizon = 0.0;           // T
    double antenna_distance_sum = 0.0;  // sum over groups, receive antennas, members of L_ki
    double travel_budget = 0.0;     // v_max * T
    bool antenna_condition = false;
};

inline FeasibilityReport check_feasibility(const GroupPlan& plan, const ArrayConfig& cfg,
                                           double v_max, double T)
{
    FeasibilityReport r;
    r.horizon = T;
    r.travel_budget = v_max * T;
    for (double d : plan.leg_length)
        r.flight_time += d / v_max;
    for (std::size_t n = 0; n < plan.size(); ++n)
        for (int k = 1; k < cfg.antennas; ++k)
            for (auto i : plan.groups[n])
                r.antenna_distance_sum += horizontal_distance(plan, cfg, n, k, i);
    r.antenna_condition = r.antenna_distance_sum <= r.travel_budget;
    r.feasible = r.flight_time <= T && r.antenna_condition;
    return r;
}

// Plain text, one "x y" pair per line, '#' starts a comment.
inline SensorField parse_field(std::istream& in)
{
    SensorField f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x))
            continue;
        std::string rest;
        if (!(ls >> y) || (ls >> rest))
            throw ConfigError("field file line " + std::to_string(lineno) + ": expected 'x y'");
        if (!std::isfinite(x) || !std::isfinite(y))
            throw ConfigError("field file line " + std::to_string(lineno) + ": non-finite value");
        f.sensors.push_back({x, y});
    }
    if (f.sensors.empty())
        throw ConfigError("field file holds no sensors");
    f.region = bounding_region(f.sensors);
    return f;
}

inline SensorField load_field(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open field file: " + path);
    return parse_field(in);
}

inline void write_plan_csv(std::ostream& out, const GroupPlan& plan)
{
    out << "group,sensor_id,x,y,hover_x,hover_y,D_n,row_parity\n";
    char buf[256];
    for (std::size_t n = 0; n < plan.size(); ++n)
        for (auto i : plan.groups[n]) {
            auto w = plan.field.sensors[i];
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%s\n", n + 1,
                          i + 1, w.x, w.y, plan.hover[n].x, plan.hover[n].y, plan.leg_length[n],
                          to_string(plan.parity[n]));
            out << buf;
        }
}

}  // namespace uavwpt::geometry
