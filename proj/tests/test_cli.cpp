#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "prabhakar/io.hpp"

using namespace prabhakar;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out, err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("prabhakar-cli-" + std::to_string(::getpid()) + "-" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult run(const std::vector<std::string>& args) const {
        std::string cmd = quote(PRABHAKAR_CLI);
        for (const auto& a : args) cmd += " " + quote(a);
        cmd += " > " + quote((dir_ / "out.txt").string()) + " 2> " + quote((dir_ / "err.txt").string());
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(dir_ / "out.txt");
        r.err = slurp(dir_ / "err.txt");
        return r;
    }

    CliResult solve_config(const std::string& name, std::vector<std::string> extra = {}) const {
        std::vector<std::string> args{"solve", config(name), "--u-csv", path("u.csv"), "--tau-csv", path("tau.csv")};
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    }

    static std::string config(const std::string& name) { return std::string(PRABHAKAR_CONFIGS) + "/" + name; }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, ConstantConfigSolvesToOne) {
    const CliResult r = solve_config("constant.json", {"--n-t", "33", "--n-x", "33"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("residual.status = pass"), std::string::npos) << r.out;
    const io::GridCsv g = io::load_solution_csv(path("u.csv"));
    ASSERT_EQ(g.u.size(), 33u * 33u);
    for (double v : g.u) EXPECT_NEAR(v, 1.0, 1e-3);
    EXPECT_EQ(slurp(path("tau.csv")).rfind("x,tau\n", 0), 0u);
}

TEST_F(Cli, ZeroConfigSolvesToZero) {
    const CliResult r = solve_config("zero.json");
    ASSERT_EQ(r.code, 0) << r.err;
    for (double v : io::load_solution_csv(path("u.csv")).u) EXPECT_LE(std::abs(v), 1e-10);
}

TEST_F(Cli, RegimeViolationExitCode) {
    const CliResult r = solve_config("bad_regime.json");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("a must be negative"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("u.csv")));
}

TEST_F(Cli, VerifyRoundTrip) {
    ASSERT_EQ(solve_config("smooth.json", {"--n-t", "33", "--n-x", "33"}).code, 0);
    const CliResult v = run({"verify", config("smooth.json"), path("u.csv"), "--n-t", "33", "--n-x", "33"});
    EXPECT_EQ(v.code, 0) << v.err;
    EXPECT_NE(v.out.find("residual.status = pass"), std::string::npos) << v.out;
    const CliResult mismatch = run({"verify", config("smooth.json"), path("u.csv")});
    EXPECT_EQ(mismatch.code, 2);
}

TEST_F(Cli, SpecialFunctions) {
    CliResult r = run({"ml", "--alpha", "1", "--beta", "1", "--gamma", "1", "--z", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("value = 2.71828182845905"), std::string::npos) << r.out;
    r = run({"ml2", "--telegraph", "--alpha", "1", "--beta", "0.5", "--gamma", "0.5", "--x", "-0.5", "--y", "-0.5"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Delta1 = 0.5"), std::string::npos) << r.out;
    r = run({"ml3", "--variant", "V2", "--alpha", "1", "--beta", "0.5", "--gamma", "0.5", "--x", "-0.5"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Delta3 = "), std::string::npos) << r.out;
    r = run({"integral", "--alpha", "1", "--beta", "1", "--gamma", "0", "--delta", "0", "--t", "2", "--y", "1"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("value = 2\n"), std::string::npos) << r.out;
}

TEST_F(Cli, InputErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"solve", path("missing.json")}).code, 2);
    EXPECT_EQ(run({"ml", "--alpha", "0", "--beta", "1", "--z", "1"}).code, 2);
    EXPECT_EQ(run({"ml", "--alpha", "1", "--beta", "1", "--z", "1", "--max-terms", "3"}).code, 3);
    EXPECT_EQ(run({"selftest", "--filter", "no-such-check"}).code, 2);
}
