#include <uavwpt/config.hpp>
#include <uavwpt/experiments.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

using namespace uavwpt;
using namespace uavwpt::experiments;

namespace {

std::vector<std::string> data_rows(const std::string& csv)
{
    std::vector<std::string> rows;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#')
            rows.push_back(line);
    return rows;
}

}  // namespace

TEST(GroupSizes, Balanced)
{
    EXPECT_EQ(group_sizes(20, 4), (std::vector<std::size_t>{5, 5, 5, 5}));
    EXPECT_EQ(group_sizes(20, 6), (std::vector<std::size_t>{4, 4, 3, 3, 3, 3}));
}

TEST(Realize, DrawsWithinConfiguredRanges)
{
    ScenarioConfig c;
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto r = realize(c, t);
        EXPECT_GE(r.ytilde, 0.0);
        EXPECT_LT(r.ytilde, 5.0);
        EXPECT_EQ(r.plan.field.size(), 20u);
        for (std::size_t n = 0; n < r.plan.size(); ++n) {
            EXPECT_GE(r.plan.leg_length[n], 20.0);
            EXPECT_LT(r.plan.leg_length[n], 30.0);
            EXPECT_EQ(r.plan.hover[n].y, r.ytilde);
            for (auto i : r.plan.groups[n]) {
                EXPECT_LE(std::abs(r.plan.field.sensors[i].y), c.scatter_m);
                EXPECT_LE(std::abs(r.plan.field.sensors[i].x - r.plan.hover[n].x),
                          2.0 * c.scatter_m);
            }
        }
    }
}

TEST(RunTrial, BitwiseDeterministic)
{
    ScenarioConfig c;
    for (auto problem : {Problem::stm, Problem::ttm})
        for (std::uint64_t t = 0; t < 5; ++t) {
            auto a = run_trial(c, t, problem);
            auto b = run_trial(c, t, problem);
            ASSERT_TRUE(a.ok) << a.error;
            EXPECT_EQ(std::memcmp(&a.ours, &b.ours, sizeof(double)), 0);
            EXPECT_EQ(std::memcmp(&*a.baseline, &*b.baseline, sizeof(double)), 0);
        }
}

TEST(RunTrial, ProposedBeatsBaselineEveryTrial)
{
    ScenarioConfig c;
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto s = run_trial(c, t, Problem::stm);
        ASSERT_TRUE(s.ok) << s.error;
        EXPECT_GE(s.ours, *s.baseline) << t;
        auto m = run_trial(c, t, Problem::ttm);
        ASSERT_TRUE(m.ok) << m.error;
        EXPECT_LE(m.ours, *m.baseline) << t;
    }
}

TEST(Baseline, DerivedConfig)
{
    ScenarioConfig c;
    auto b = hf_eh_baseline(c);
    EXPECT_EQ(b.N, c.K);
    EXPECT_EQ(b.M, 2);
    EXPECT_EQ(b.pt_db, c.pt_db);
    EXPECT_EQ(b.T_s, c.T_s);

    // K = N: only the antenna count differs
    ScenarioConfig k;
    k.K = 4;
    k.N = 4;
    auto kb = hf_eh_baseline(k);
    EXPECT_EQ(kb.N, k.N);
    EXPECT_EQ(kb.K, k.K);
    EXPECT_EQ(kb.M, 2);
    // every other field is the same
    EXPECT_EQ(kb.delta_m, k.delta_m);
    EXPECT_EQ(kb.A_m, k.A_m);
    EXPECT_EQ(kb.seed, k.seed);
}

TEST(Baseline, SingletonStopsAboveSensors)
{
    ScenarioConfig c;
    auto r = realize(c, 3);
    auto bp = baseline_plan(r.plan);
    ASSERT_EQ(bp.size(), 20u);
    for (std::size_t n = 0; n < bp.size(); ++n) {
        ASSERT_EQ(bp.groups[n].size(), 1u);
        auto w = bp.field.sensors[bp.groups[n][0]];
        EXPECT_EQ(bp.hover[n].x, w.x);
        EXPECT_EQ(bp.hover[n].y, w.y);
        if (n > 0) {
            EXPECT_GE(bp.hover[n].x, bp.hover[n - 1].x);
        }
    }
    EXPECT_EQ(bp.start.x, r.plan.start.x);
    EXPECT_EQ(bp.start.y, r.plan.start.y);
}

TEST(Baseline, GammaUsesOneReceiveAntenna)
{
    ScenarioConfig c;
    auto b = hf_eh_baseline(c);
    auto r = realize(c, 1);
    auto bp = baseline_plan(r.plan);
    auto coeffs = channel::compute_coefficients(bp, b.array(), b.channel_params());
    auto p = b.channel_params();
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        ASSERT_EQ(coeffs.uplink[n].size(), 1u);
        ASSERT_EQ(coeffs.uplink[n][0].size(), 1u);
        double h = coeffs.uplink[n][0][0];
        double expect = p.pt * p.k0 / p.sigma2 * p.efficiency(bp.groups[n][0]) * h * h;
        EXPECT_NEAR(coeffs.gamma[n] / expect, 1.0, 1e-14);
    }
}

TEST(MeanSe, Basics)
{
    auto m = mean_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(mean_se({7.0}).se, 0.0);
}

TEST(RunPoint, StandardErrorShrinksWithTrials)
{
    ScenarioConfig c;
    std::vector<double> se;
    for (int n : {100, 400, 1600})
        se.push_back(run_point(c, c.pt_db, n, Problem::stm, false, 1).se_ours);
    EXPECT_GT(se[0] / se[1], 1.5);
    EXPECT_LT(se[0] / se[1], 2.7);
    EXPECT_GT(se[1] / se[2], 1.5);
    EXPECT_LT(se[1] / se[2], 2.7);
}

TEST(RunPoint, ImprovementFormula)
{
    ScenarioConfig c;
    auto p = run_point(c, 4.0, 50, Problem::stm, true, 1);
    EXPECT_EQ(p.trials, 50u);
    EXPECT_EQ(p.excluded, 0u);
    EXPECT_GE(p.se_ours, 0.0);
    EXPECT_DOUBLE_EQ(p.improvement, (p.mean_ours - p.mean_baseline) / p.mean_baseline);
}

TEST(ParallelMap, IndependentOfWorkerCount)
{
    auto f = [](std::size_t i) { return std::sin(static_cast<double>(i)) * 1e3; };
    auto a = parallel_map<double>(1001, 1, f);
    auto b = parallel_map<double>(1001, 7, f);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(parallel_map<double>(0, 4, f).empty());
}

TEST(RunSweep, OneRowPerValueAndWorkerIndependent)
{
    ScenarioConfig c;
    SweepSpec s{"pt_db", {2, 4, 6, 8}, 40};
    auto a = run_sweep(c, s, Problem::stm, true, 1);
    auto b = run_sweep(c, s, Problem::stm, true, 4);
    std::ostringstream oa, ob;
    write_sweep_csv(oa, a);
    write_sweep_csv(ob, b);
    auto ra = data_rows(oa.str()), rb = data_rows(ob.str());
    ASSERT_EQ(ra.size(), 5u);
    EXPECT_EQ(ra[0], "param,value,trials,mean_ours,se_ours,mean_baseline,se_baseline,improvement");
    EXPECT_EQ(ra, rb);
    EXPECT_EQ(ra[1].rfind("pt_db,2,40,", 0), 0u);
    EXPECT_NE(oa.str().find("# uavwpt sweep problem=stm"), std::string::npos);
}

TEST(RunSweep, ThroughputGrowsWithPower)
{
    ScenarioConfig c;
    auto r = run_sweep(c, SweepSpec{"pt_db", {0, 2, 4, 6, 8}, 100}, Problem::stm, true, 1);
    for (std::size_t j = 1; j < r.points.size(); ++j)
        EXPECT_GE(r.points[j].mean_ours, r.points[j - 1].mean_ours);
}

TEST(RunSweep, AllTrialsFailingIsSweepError)
{
    ScenarioConfig c;
    c.T_s = 1.0;  // shorter than any flight
    try {
        run_sweep(c, SweepSpec{"pt_db", {4}, 5}, Problem::stm);
        FAIL() << "expected SweepError";
    } catch (const SweepError& e) {
        EXPECT_NE(std::string(e.what()).find("pt_db=4"), std::string::npos) << e.what();
    }
}

TEST(SweepSpec, Validation)
{
    EXPECT_THROW((SweepSpec{"k0", {1, 2}, 1}.validate()), ConfigError);
    EXPECT_THROW((SweepSpec{"pt_db", {}, 1}.validate()), ConfigError);
    EXPECT_THROW((SweepSpec{"pt_db", {2, 2}, 1}.validate()), ConfigError);
    EXPECT_THROW((SweepSpec{"N", {2.5}, 1}.validate()), ConfigError);
    EXPECT_NO_THROW((SweepSpec{"N", {2, 4}, 1}.validate()));
}

TEST(Apply, SetsParameter)
{
    ScenarioConfig c;
    EXPECT_EQ(apply(c, "N", 6).N, 6);
    EXPECT_EQ(apply(c, "v_max", 15).v_max_mps, 15.0);
    EXPECT_EQ(apply(c, "I_nats", 10).I_nats, 10.0);
    EXPECT_THROW(apply(c, "N", 21), ConfigError);
}
