#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levydrift/estimators.hpp"
#include "levydrift/simulate.hpp"

namespace ld = levydrift;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(LEVY_DRIFT_EXE) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "levydrift_cli_" + name; }

std::vector<std::string> lines_of(const std::string& file) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

const std::string ou_sim = "simulate --model ou --theta 2,0 --sigma 1 --levy cp:1:exp:1 --t-end 10 --n 2000 --seed 7";

}  // namespace

TEST(Cli, SimulateRowCount) {
    const auto file = temp_path("sim.csv");
    const auto r = run(ou_sim + " --out " + file);
    ASSERT_EQ(r.code, 0) << r.output;
    const auto lines = lines_of(file);
    EXPECT_EQ(lines.size(), 2002u);
    EXPECT_EQ(lines.front(), "t,x");
}

TEST(Cli, SimulateIsReproducible) {
    const auto a = run(ou_sim);
    const auto b = run(ou_sim);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.output, b.output);
}

TEST(Cli, MissingThetaIsUsageError) {
    const auto r = run("simulate --model ou --t-end 10 --n 20 --seed 1");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("--theta"), std::string::npos) << r.output;
}

TEST(Cli, UnknownFlagAndModelRejected) {
    EXPECT_EQ(run(ou_sim + " --bogus 3").code, 1);
    EXPECT_EQ(run("simulate --model vasicek --theta 1 --t-end 1 --n 10 --seed 1").code, 1);
}

TEST(Cli, DecomposeColumnsAddUp) {
    const auto file = temp_path("dec.csv");
    ASSERT_EQ(run(ou_sim + " --decompose --out " + file).code, 0);
    const auto lines = lines_of(file);
    ASSERT_EQ(lines.front(), "t,x,xc,xj");
    double x0 = 0.0, xc0 = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream ls(lines[i]);
        double t, x, xc, xj;
        char c;
        ls >> t >> c >> x >> c >> xc >> c >> xj;
        if (i == 1) {
            x0 = x;
            xc0 = xc;
        }
        ASSERT_NEAR(x, x0 + (xc - xc0) + xj, 1e-9 * (1.0 + std::fabs(x))) << "row " << i;
    }
}

// θ* = (2, 0) must fall inside the reported 95% intervals.
TEST(Cli, EstimateCoversTruth) {
    const auto csv = temp_path("est.csv");
    const auto json = temp_path("est.json");
    ASSERT_EQ(run(ou_sim + " --out " + csv).code, 0);
    const auto r = run("estimate --model ou --in " + csv + " --out " + json);
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream in(json);
    const auto j = nlohmann::json::parse(in);
    ASSERT_FALSE(j.at("ci").is_null());
    const double truth[2] = {2.0, 0.0};
    for (int k = 0; k < 2; ++k) {
        EXPECT_LE(j["ci"][k][0].get<double>(), truth[k]);
        EXPECT_GE(j["ci"][k][1].get<double>(), truth[k]);
    }
    EXPECT_TRUE(j.at("fisher").is_array());
}

TEST(Cli, InfiniteCutoffMatchesUnfilteredEstimate) {
    const auto csv = temp_path("inf.csv");
    const auto json = temp_path("inf.json");
    ASSERT_EQ(run(ou_sim + " --out " + csv).code, 0);
    ASSERT_EQ(run("estimate --model ou --vn inf --in " + csv + " --out " + json).code, 0);
    std::ifstream in(json);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("rejected_count"), 0);
    const auto obs = ld::read_observations_csv_file(csv);
    const auto direct = ld::fmle_ou(obs, ld::FilterConfig::explicit_cutoff(INFINITY));
    EXPECT_NEAR(j["theta_hat"][0].get<double>(), direct.theta_hat[0], 1e-9);
    EXPECT_NEAR(j["theta_hat"][1].get<double>(), direct.theta_hat[1], 1e-9);
}

TEST(Cli, ConflictingFilterFlagsRejected) {
    const auto csv = temp_path("conf.csv");
    ASSERT_EQ(run(ou_sim + " --out " + csv).code, 0);
    EXPECT_EQ(run("estimate --model ou --eps 0.2 --vn 0.3 --in " + csv).code, 1);
}

TEST(Cli, BadCsvNamesLine) {
    const auto csv = temp_path("bad.csv");
    {
        std::ofstream out(csv);
        out << "t,x\n0,1\n0.1,1.1\n0.2,oops\n";
    }
    const auto r = run("estimate --model ou --in " + csv);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("line 4"), std::string::npos) << r.output;
    EXPECT_EQ(run("estimate --model ou --in /nonexistent.csv").code, 1);
}

TEST(Cli, TableSmokeRun) {
    const auto csv = temp_path("table.csv");
    const auto r = run("table --id 1 --reps 50 --out " + csv);
    ASSERT_EQ(r.code, 0) << r.output;
    const auto lines = lines_of(csv);
    EXPECT_EQ(lines.size(), 21u);
    EXPECT_EQ(lines.front(), "t_n,n,param,extra,mean,std,jumps_filt,paper_mean,paper_std,paper_jumps,pass");
}

TEST(Cli, McFromConfig) {
    const auto cfg = temp_path("mc.json");
    const auto out = temp_path("mc.csv");
    {
        std::ofstream o(cfg);
        o << R"({"model_name":"ou","theta_true":[2,0],"levy":"cp:1:exp:1","t_n":5,"n":500,"replications":10})";
    }
    const auto r = run("mc --config " + cfg + " --out " + out + " --threads 2");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto lines = lines_of(out);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[1].substr(0, 7), "theta1,");

    std::ofstream(cfg) << R"({"model_name":"ou","theta_true":[2,0],"t_n":5,"n":500,"nonsense":1})";
    EXPECT_EQ(run("mc --config " + cfg).code, 1);
}

TEST(Cli, FisherIsSymmetric) {
    const auto csv = temp_path("fisher.csv");
    const auto json = temp_path("fisher.json");
    ASSERT_EQ(run(ou_sim + " --out " + csv).code, 0);
    ASSERT_EQ(run("fisher --model ou --theta 2,0 --in " + csv + " --out " + json).code, 0);
    std::ifstream in(json);
    const auto j = nlohmann::json::parse(in);
    ASSERT_EQ(j["matrix"].size(), 2u);
    EXPECT_EQ(j["matrix"][0][1].get<double>(), j["matrix"][1][0].get<double>());
    EXPECT_NEAR(j["matrix"][1][1].get<double>(), 1.0, 1e-12);
}

TEST(Cli, CheckReportsCirBoundary) {
    const auto r = run("check --model cir --sigma 0.25");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("boundary"), std::string::npos) << r.output;
}

TEST(Cli, HelpExitsZeroAndListsFlags) {
    const auto top = run("--help");
    EXPECT_EQ(top.code, 0);
    for (const char* sub : {"simulate", "estimate", "mc", "table", "fisher", "check"})
        EXPECT_NE(top.output.find(sub), std::string::npos) << sub;
    const auto est = run("estimate --help");
    EXPECT_EQ(est.code, 0);
    for (const char* flag : {"--eps", "--vn-power", "--vn", "--method", "--endpoint", "--level", "--out"})
        EXPECT_NE(est.output.find(flag), std::string::npos) << flag;
}
