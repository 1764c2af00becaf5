#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" ORBMIN_BIN "\" " + args + " 2>/dev/null";
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string sample(const std::string& name) { return std::string("\"") + ORBMIN_SAMPLES + "/" + name + "\""; }

} // namespace

TEST(Cli, Version) {
    const CliResult r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("1.0.0"), std::string::npos);
}

TEST(Cli, KeplerActionsTable) {
    const CliResult r = run("kepler-actions --alpha-list 1.2:1.8:0.1 --k 2 --format json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["rows"].size(), 7u);
    EXPECT_NEAR(j["rows"][4]["action_circular"].get<double>(), 18.355, 5e-3);
    EXPECT_NEAR(j["rows"][4]["action_collision_ejection"].get<double>(), 18.563, 5e-3);
}

TEST(Cli, ClassifyExitCodes) {
    const CliResult slm = run("classify --config " + sample("kepler_alpha_1.4.json"));
    ASSERT_EQ(slm.code, 0);
    EXPECT_EQ(nlohmann::json::parse(slm.out)["verdict"], "SLM");
    const CliResult saddle = run("classify --config " + sample("kepler_alpha_0.4.json"));
    ASSERT_EQ(saddle.code, 0);
    EXPECT_EQ(nlohmann::json::parse(saddle.out)["verdict"], "SADDLE");
    EXPECT_EQ(run("classify --config " + sample("invalid_unknown_key.json")).code, 4);
    EXPECT_EQ(run("classify --config /nonexistent/config.json").code, 4);
    EXPECT_EQ(run("classify").code, 4);
    EXPECT_EQ(run("kepler-actions --alpha 2.5").code, 4);
    EXPECT_EQ(run("kepler-jacobi --alpha 1 --tmax 1").code, 4);
    EXPECT_EQ(run("no-such-command").code, 4);
}

TEST(Cli, NotPeriodicExitCode) {
    const std::string path = ::testing::TempDir() + "orbmin_open_orbit.json";
    std::ofstream(path) << R"({"model": {"type": "kepler_alpha", "alpha": 1.0},
  "orbit": {"type": "initial_conditions", "T": 6.283185307179586, "u0": [1, 0], "v0": [0, 1.3]}})";
    EXPECT_EQ(run("classify --config \"" + path + "\"").code, 2);
}

TEST(Cli, InitialConditionsSample) {
    const CliResult r = run("classify --config " + sample("kepler_initial_conditions.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["verdict"], "SLM");
}

TEST(Cli, OutputFile) {
    const std::string path = ::testing::TempDir() + "orbmin_actions.csv";
    const CliResult r = run("kepler-actions --alpha 1.6 --k 2 --out \"" + path + "\"");
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    EXPECT_EQ(s.str(), run("kepler-actions --alpha 1.6 --k 2").out);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const std::vector<std::string> commands = {"kepler-jacobi --alpha-list 0.2:1.8:0.2",
                                               "kepler-actions --alpha-list 1.2:1.8:0.1 --k 2", "eight jacobi",
                                               "eight classify-symmetric",
                                               "classify --config " + sample("figure_eight_full.json")};
    for (const std::string& args : commands) {
        const CliResult a = run(args), b = run(args);
        ASSERT_EQ(a.code, 0) << args;
        EXPECT_FALSE(a.out.empty());
        EXPECT_EQ(a.out, b.out) << args;
    }
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
    const std::string args = "kepler-jacobi --alpha-list 0.2:1.8:0.1 --k 2 --period 12.566370614359172";
    const CliResult one = run(args, "ORBIT_MINIMALITY_THREADS=1");
    const CliResult many = run(args, "ORBIT_MINIMALITY_THREADS=8");
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(one.out, many.out);
}
