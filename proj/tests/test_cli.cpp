#include <uavwpt/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using uavwpt::cli::run_cli;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("uavwpt_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    CliRun run(std::vector<std::string> args)
    {
        std::ostringstream out, err;
        int code = run_cli(std::move(args), out, err);
        return {code, out.str(), err.str()};
    }

    std::string write(const std::string& name, const std::string& text)
    {
        auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }

    std::string out_dir() const { return (dir / "out").string(); }
};

std::string config(const std::string& name)
{
    return std::string(UAVWPT_SOURCE_DIR) + "/configs/" + name;
}

}  // namespace

TEST_F(CliTest, PlanDefault)
{
    auto r = run({"plan", "--out", out_dir()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "out" / "plan.csv"));
    EXPECT_NE(r.out.find("groups 4"), std::string::npos);
    EXPECT_NE(r.out.find("feasible 1"), std::string::npos);
}

TEST_F(CliTest, PlanShortHorizonIsInfeasible)
{
    auto r = run({"plan", "--config", config("short_horizon.ini"), "--out", out_dir()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("infeasible plan"), std::string::npos) << r.err;
    EXPECT_TRUE(fs::exists(dir / "out" / "plan.csv"));
}

TEST_F(CliTest, MissingConfig)
{
    auto r = run({"plan", "--config", (dir / "nope.ini").string(), "--out", out_dir()});
    EXPECT_EQ(r.code, 4);
}

TEST_F(CliTest, MalformedConfig)
{
    auto c = write("bad.ini", "[channel]\npt_dbx = 3\n");
    auto r = run({"plan", "--config", c, "--out", out_dir()});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("pt_dbx"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownSubcommandOrFlag)
{
    EXPECT_EQ(run({"fly"}).code, 4);
    EXPECT_EQ(run({"plan", "--bogus"}).code, 4);
    EXPECT_EQ(run({"solve", "lp"}).code, 4);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, SolveStm)
{
    auto r = run({"solve", "stm", "--out", out_dir()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto at = r.out.find("budget_residual ");
    ASSERT_NE(at, std::string::npos);
    double res = std::stod(r.out.substr(at + 16));
    EXPECT_LE(res, 1e-8);
    EXPECT_TRUE(fs::exists(dir / "out" / "stm_diagnostics.csv"));
    EXPECT_NE(r.out.find("tau "), std::string::npos);
    EXPECT_NE(r.out.find("zeta "), std::string::npos);
}

TEST_F(CliTest, SolveTtm)
{
    auto r = run({"solve", "ttm", "--config", config("ttm_demo.ini"), "--out", out_dir()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("total_time "), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "ttm_diagnostics.csv"));
}

TEST_F(CliTest, SolveTtmZeroDemand)
{
    auto c = write("zero.ini", "[mission]\nI_nats = 0\n");
    auto r = run({"solve", "ttm", "--config", c, "--out", out_dir()});
    EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, SolveTtmDegenerateGroupNamesIndex)
{
    // group 2 has a sensor right under the first hover point, so hovering
    // there charges it more than the inbound leg does
    auto c = write("two.ini", "[scenario]\nN = 2\nK = 4\n");
    auto f = write("field.txt", "0 0\n0 1\n2 0\n58 0\n");
    auto r = run({"solve", "ttm", "--config", c, "--field", f, "--out", out_dir()});
    EXPECT_EQ(r.code, 3) << r.out << r.err;
    EXPECT_NE(r.err.find("group 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, SweepRowCount)
{
    auto r = run({"sweep", "--param", "pt_db", "--values", "2,4,6,8", "--trials", "20", "--out",
                  out_dir()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::string line;
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#' && line.rfind("param,", 0) != 0)
            ++rows;
    EXPECT_EQ(rows, 4);
    EXPECT_TRUE(fs::exists(dir / "out" / "sweep_pt_db.csv"));
}

TEST_F(CliTest, SweepBadValues)
{
    EXPECT_EQ(run({"sweep", "--param", "pt_db", "--values", "4,2", "--out", out_dir()}).code, 4);
    EXPECT_EQ(run({"sweep", "--param", "k0", "--values", "1", "--out", out_dir()}).code, 4);
}

TEST_F(CliTest, SweepAllTrialsFail)
{
    auto r = run({"sweep", "--config", config("short_horizon.ini"), "--param", "pt_db",
                  "--values", "4", "--trials", "3", "--out", out_dir()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("pt_db=4"), std::string::npos) << r.err;
}

TEST_F(CliTest, VerifyTwiceIdentical)
{
    auto a = run({"verify", "--seed", "1", "--out", out_dir()});
    auto b = run({"verify", "--seed", "1", "--out", out_dir(), "--workers", "2"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(b.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_TRUE(fs::exists(dir / "out" / "verify.csv"));
}

TEST_F(CliTest, VerifyFaultInjection)
{
    auto r = run({"verify", "--seed", "1", "--fault-coeff-b", "1.01", "--out", out_dir()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("verify: oracle flight_energy failed"), std::string::npos) << r.err;
}
