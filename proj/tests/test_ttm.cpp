#include <uavwpt/config.hpp>
#include <uavwpt/experiments.hpp>
#include <uavwpt/ttm.hpp>
#include <uavwpt/verification.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace uavwpt;
using namespace uavwpt::ttm;
using channel::GroupCoefficients;

namespace {

TtmProblem synthetic(std::vector<double> g, std::vector<double> a, std::vector<double> b,
                     std::vector<double> D, std::vector<double> I, double v = 10.0)
{
    TtmProblem p;
    p.coeffs = GroupCoefficients::from_aggregates(std::move(g), std::move(a), std::move(b));
    p.leg_length = std::move(D);
    p.demand = std::move(I);
    p.v_max = v;
    return p;
}

TtmProblem realized(const ScenarioConfig& c, std::uint64_t trial)
{
    auto r = experiments::realize(c, trial);
    return experiments::make_ttm(c, r.plan);
}

double delivered(const TtmProblem& p, const TimeAllocation& t, std::size_t n)
{
    return t.tau[n + 1] * channel::group_rate(p.coeffs, n, t.tau[n], t.zeta[n], t.tau[n + 1]);
}

// High-SNR pairs with random coefficients; some legs end up at the speed limit.
TtmProblem random_pair(Rng& rng)
{
    double b0 = uniform(rng, 0.002, 0.01), b1 = uniform(rng, 0.002, 0.01);
    return synthetic({std::pow(10.0, uniform(rng, 0, 4)), std::pow(10.0, uniform(rng, 0, 4))},
                     {b0 * uniform(rng, 0.1, 0.9), b1 * uniform(rng, 0.1, 0.9)}, {b0, b1},
                     {uniform(rng, 20, 30), uniform(rng, 20, 30)},
                     {uniform(rng, 1, 50), uniform(rng, 1, 50)});
}

}  // namespace

TEST(TauClosedForm, LinearInDemand)
{
    auto p = synthetic({40.0, 60.0}, {0.003, 0.002}, {0.006, 0.007}, {25, 25}, {10.0, 20.0});
    double t0 = tau_closed_form(p, 0), t1 = tau_closed_form(p, 1);
    p.demand = {30.0, 50.0};
    EXPECT_NEAR(tau_closed_form(p, 0), 3.0 * t0, 1e-12 * t0);
    EXPECT_NEAR(tau_closed_form(p, 1), 2.5 * t1, 1e-12 * t1);
}

TEST(TauClosedForm, UnitSnrScaleAtLastGroup)
{
    // gamma_N b_N = 1 puts the Lambert W argument at 0, so tau_N = 2 I_N
    auto p = synthetic({100.0}, {0.004}, {0.01}, {25}, {7.0});
    EXPECT_NEAR(tau_closed_form(p, 0), 14.0, 1e-12);
}

TEST(TauClosedForm, HoverDominatedNextGroupIsDomainError)
{
    // a_2 >= b_2 makes the hover factor nonpositive
    auto p = synthetic({40.0, 60.0}, {0.003, 0.008}, {0.006, 0.007}, {25, 25}, {10.0, 20.0});
    try {
        tau_closed_form(p, 0);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("group 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(solve_ttm(p), DomainError);
}

TEST(TauClosedForm, CloseToOracleHoverTimes)
{
    ScenarioConfig c;
    c.N = 2;
    c.K = 10;
    for (std::uint64_t t = 0; t < 3; ++t) {
        auto p = realized(c, t);
        auto o = verification::ttm_grid_oracle(p);
        for (std::size_t n = 0; n < 2; ++n)
            EXPECT_NEAR(tau_closed_form(p, n) / o.alloc.tau[n + 1], 1.0, 0.05);
    }
}

TEST(ZetaClosedForm, ClampWhenHoverEnergySuffices)
{
    auto p = synthetic({40.0, 60.0}, {0.003, 0.002}, {0.006, 0.007}, {25, 25}, {10.0, 20.0});
    double tn = tau_closed_form(p, 1);
    EXPECT_EQ(zeta_closed_form(p, 1, 1e9, tn), 2.5);
}

TEST(ZetaClosedForm, UnclampedMeetsDemandExactly)
{
    Rng rng = make_rng(2);
    for (int k = 0; k < 500; ++k) {
        auto p = random_pair(rng);
        double tau_prev = uniform(rng, 0, 5), tn = uniform(rng, 0.5, 50);
        double z = zeta_closed_form(p, 1, tau_prev, tn);
        if (z <= p.min_flight(1))
            continue;
        double got = tn * channel::group_rate(p.coeffs, 1, tau_prev, z, tn);
        EXPECT_NEAR(got, p.demand[1], 1e-8);
    }
}

TEST(ZetaClosedForm, VanishingDemandGivesMinimumFlight)
{
    auto p = synthetic({40.0}, {0.003}, {0.006}, {25}, {1e-12});
    EXPECT_EQ(zeta_closed_form(p, 0, 0.0, 1.0), 2.5);
}

TEST(SolveTtm, InformationGuaranteeOnRealizations)
{
    ScenarioConfig c;
    for (double pt : {0.0, 10.0, 30.0})
        for (std::uint64_t t = 0; t < 20; ++t) {
            c.pt_db = pt;
            auto p = realized(c, t);
            auto s = solve_ttm(p);
            EXPECT_EQ(s.alloc.tau[0], 0.0);
            EXPECT_NEAR(s.total_time, s.alloc.total(), 1e-9 * s.total_time);
            for (std::size_t n = 0; n < p.size(); ++n) {
                double got = delivered(p, s.alloc, n);
                EXPECT_GE(got, p.demand[n] - 1e-8);
                EXPECT_GE(s.alloc.zeta[n], p.min_flight(n) - 1e-12);
                if (s.alloc.zeta[n] > p.min_flight(n) * (1 + 1e-12)) {
                    EXPECT_NEAR(got, p.demand[n], 1e-8);
                }
            }
        }
}

TEST(SolveTtm, ClampedInstancesAgainstOracle)
{
    Rng rng = make_rng(5);
    int clamped = 0;
    for (int k = 0; k < 12; ++k) {
        auto p = random_pair(rng);
        auto s = solve_ttm(p);
        auto o = verification::ttm_grid_oracle(p);
        EXPECT_LE(s.total_time, 1.05 * o.total_time) << k;
        for (std::size_t n = 0; n < 2; ++n)
            EXPECT_GE(delivered(p, s.alloc, n), p.demand[n] - 1e-8);
        std::size_t at_limit = 0;
        for (std::size_t n = 0; n < 2; ++n)
            if (s.alloc.zeta[n] <= p.min_flight(n) * (1 + 1e-12))
                ++at_limit;
        EXPECT_EQ(at_limit, s.clamped_legs);
        clamped += s.clamped_legs > 0;
    }
    EXPECT_GT(clamped, 0);
}

TEST(SolveTtm, RefinementNeverWorseThanClosedForm)
{
    Rng rng = make_rng(6);
    for (int k = 0; k < 100; ++k) {
        auto p = random_pair(rng);
        std::size_t cl = 0;
        auto cf = ttm::detail::closed_form_allocation(p, cl);
        auto s = solve_ttm(p);
        EXPECT_LE(s.total_time, cf.total() * (1 + 1e-15));
    }
}

TEST(SolveTtm, MonotoneInPowerSpeedAndDemand)
{
    ScenarioConfig c;
    for (std::uint64_t t = 0; t < 10; ++t) {
        double prev = INFINITY;
        for (double pt : {0.0, 2.0, 4.0, 6.0, 8.0, 12.0, 20.0}) {
            c = ScenarioConfig{};
            c.pt_db = pt;
            double v = solve_ttm(realized(c, t)).total_time;
            EXPECT_LE(v, prev * (1 + 1e-12));
            prev = v;
        }
        prev = INFINITY;
        for (double vm : {5.0, 10.0, 15.0, 20.0}) {
            c = ScenarioConfig{};
            c.pt_db = 20.0;
            c.v_max_mps = vm;
            double v = solve_ttm(realized(c, t)).total_time;
            EXPECT_LE(v, prev * (1 + 1e-12));
            prev = v;
        }
        c = ScenarioConfig{};
        auto p = realized(c, t);
        double base = solve_ttm(p).total_time;
        for (auto& I : p.demand)
            I *= 2.0;
        EXPECT_GE(solve_ttm(p).total_time, base);
    }
}

TEST(SolveTtm, MonotoneOnSyntheticSweeps)
{
    Rng rng = make_rng(8);
    for (int k = 0; k < 50; ++k) {
        auto p = random_pair(rng);
        double base = solve_ttm(p).total_time;
        auto q = p;
        for (auto& g : q.coeffs.gamma)
            g *= 1.5;
        EXPECT_LE(solve_ttm(q).total_time, base * (1 + 1e-9));
        q = p;
        q.v_max *= 2.0;
        EXPECT_LE(solve_ttm(q).total_time, base * (1 + 1e-9));
        q = p;
        q.demand[k % 2] *= 1.3;
        EXPECT_GE(solve_ttm(q).total_time, base * (1 - 1e-9));
    }
}

TEST(SolveTtm, ZeroDemandRejected)
{
    auto p = synthetic({40.0}, {0.003}, {0.006}, {25}, {0.0});
    EXPECT_THROW(solve_ttm(p), ConfigError);
}

TEST(Diagnostics, CsvRow)
{
    auto p = synthetic({100.0}, {0.004}, {0.01}, {25}, {7.0});
    auto s = solve_ttm(p);
    std::ostringstream os;
    write_ttm_header(os);
    write_ttm_row(os, p, 2.0, s);
    std::istringstream is(os.str());
    std::string h, row;
    std::getline(is, h);
    std::getline(is, row);
    EXPECT_EQ(h, "N,Pt_dB,v_max,I_total,total_time,clamped_legs");
    EXPECT_EQ(row.substr(0, 9), "1,2,10,7,");
}
