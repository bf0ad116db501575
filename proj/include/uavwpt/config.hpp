#pragma once

#include <uavwpt/channel.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/geometry.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace uavwpt {

struct ScenarioConfig {
    // channel
    double k0_db = -30.0;
    double sigma2_dbm = -70.0;
    double eta = 0.5;
    double pt_db = 4.0;
    double f0_ghz = 3.0;  // metadata only
    // array
    int M = 3;
    double delta_m = 0.1;
    double A_m = 10.0;
    double d_max_m = 35.0;
    // mission
    double v_max_mps = 10.0;
    double T_s = 1000.0;
    double I_nats = 30.0;  // per sensor
    // scenario
    int K = 20;
    int N = 4;
    std::array<double, 2> D_range_m{20.0, 30.0};
    std::array<double, 2> ytilde_range_m{0.0, 5.0};
    double scatter_m = 5.0;
    std::vector<double> rows_m{0.0};  // flight rows for field files
    // run
    int trials = 1000;
    std::uint64_t seed = 1;

    void validate() const
    {
        auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(k0_db) || !finite(sigma2_dbm) || !finite(pt_db))
            fail("k0_db, sigma2_dbm and pt_db must be finite");
        if (!(eta > 0.0 && eta <= 1.0))
            fail("eta must lie in (0, 1]");
        if (M < 2)
            fail("M must be at least 2");
        if (!(delta_m >= 0.0))
            fail("delta_m must be nonnegative");
        if (!(A_m > 0.0))
            fail("A_m must be positive");
        if (!(d_max_m > A_m))
            fail("d_max_m must exceed A_m");
        if (!(v_max_mps > 0.0) || !(T_s > 0.0))
            fail("v_max_mps and T_s must be positive");
        if (!(I_nats >= 0.0) || !finite(I_nats))
            fail("I_nats must be nonnegative");
        if (K < 1)
            fail("K must be at least 1");
        if (N < 1 || N > K)
            fail("N must lie in [1, K]");
        if (!(D_range_m[0] > 0.0 && D_range_m[0] < D_range_m[1]) || !finite(D_range_m[1]))
            fail("D_range_m must be a nonempty positive range");
        if (!(ytilde_range_m[0] < ytilde_range_m[1]) || !finite(ytilde_range_m[0]) ||
            !finite(ytilde_range_m[1]))
            fail("ytilde_range_m must be a nonempty range");
        if (!(scatter_m >= 0.0))
            fail("scatter_m must be nonnegative");
        if (rows_m.empty())
            fail("rows_m needs at least one row");
        if (trials < 1)
            fail("trials must be at least 1");
    }

    channel::ChannelParams channel_params() const
    {
        channel::ChannelParams p;
        p.k0 = channel::db_to_linear(k0_db);
        p.sigma2 = channel::dbm_to_watts(sigma2_dbm);
        p.eta = eta;
        p.pt = channel::dbw_to_watts(pt_db);
        p.altitude = A_m;
        return p;
    }

    geometry::ArrayConfig array() const { return {M, delta_m, A_m, d_max_m}; }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text)
{
    std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": not a number: '" + text + "'");
    }
    if (used != t.size())
        throw ConfigError("config: " + key + ": trailing characters in '" + text + "'");
    return v;
}

inline long long parse_int(const std::string& key, const std::string& text)
{
    std::string t = trim(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": not an integer: '" + text + "'");
    }
    if (used != t.size())
        throw ConfigError("config: " + key + ": not an integer: '" + text + "'");
    return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, item));
    if (out.empty())
        throw ConfigError("config: " + key + ": empty list");
    return out;
}

inline std::array<double, 2> parse_range(const std::string& key, const std::string& text)
{
    auto v = parse_list(key, text);
    if (v.size() != 2)
        throw ConfigError("config: " + key + ": expected 'lo, hi'");
    return {v[0], v[1]};
}

}  // namespace detail

// INI text with sections [channel], [array], [mission], [scenario], [run].
// Comments start with ';' or '#'. Unknown sections or keys are rejected.
inline ScenarioConfig parse_config(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    static const std::map<std::string, std::string> home = {
        {"k0_db", "channel"},      {"sigma2_dbm", "channel"},   {"eta", "channel"},
        {"pt_db", "channel"},      {"f0_ghz", "channel"},       {"M", "array"},
        {"delta_m", "array"},      {"A_m", "array"},            {"d_max_m", "array"},
        {"v_max_mps", "mission"},  {"T_s", "mission"},          {"I_nats", "mission"},
        {"K", "scenario"},         {"N", "scenario"},           {"D_range_m", "scenario"},
        {"ytilde_range_m", "scenario"}, {"scatter_m", "scenario"}, {"rows_m", "scenario"},
        {"trials", "run"},         {"seed", "run"}};

    ScenarioConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            static const char* sections[] = {"channel", "array", "mission", "scenario", "run"};
            if (std::find(std::begin(sections), std::end(sections), section) != std::end(sections))
                continue;
            throw ConfigError("config: '" + section + "' is not inside a known section");
        }
        for (const auto& [key, node] : body) {
            auto it = home.find(key);
            if (it == home.end())
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            if (it->second != section)
                throw ConfigError("config: key '" + key + "' belongs in [" + it->second + "]");
            const std::string v = node.data();
            if (key == "k0_db") c.k0_db = detail::parse_double(key, v);
            else if (key == "sigma2_dbm") c.sigma2_dbm = detail::parse_double(key, v);
            else if (key == "eta") c.eta = detail::parse_double(key, v);
            else if (key == "pt_db") c.pt_db = detail::parse_double(key, v);
            else if (key == "f0_ghz") c.f0_ghz = detail::parse_double(key, v);
            else if (key == "M") c.M = static_cast<int>(detail::parse_int(key, v));
            else if (key == "delta_m") c.delta_m = detail::parse_double(key, v);
            else if (key == "A_m") c.A_m = detail::parse_double(key, v);
            else if (key == "d_max_m") c.d_max_m = detail::parse_double(key, v);
            else if (key == "v_max_mps") c.v_max_mps = detail::parse_double(key, v);
            else if (key == "T_s") c.T_s = detail::parse_double(key, v);
            else if (key == "I_nats") c.I_nats = detail::parse_double(key, v);
            else if (key == "K") c.K = static_cast<int>(detail::parse_int(key, v));
            else if (key == "N") c.N = static_cast<int>(detail::parse_int(key, v));
            else if (key == "D_range_m") c.D_range_m = detail::parse_range(key, v);
            else if (key == "ytilde_range_m") c.ytilde_range_m = detail::parse_range(key, v);
            else if (key == "scatter_m") c.scatter_m = detail::parse_double(key, v);
            else if (key == "rows_m") c.rows_m = detail::parse_list(key, v);
            else if (key == "trials") c.trials = static_cast<int>(detail::parse_int(key, v));
            else if (key == "seed") {
                long long s = detail::parse_int(key, v);
                if (s < 0)
                    throw ConfigError("config: seed must be nonnegative");
                c.seed = static_cast<std::uint64_t>(s);
            }
        }
    }
    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace uavwpt
