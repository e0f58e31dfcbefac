#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "crdrl/mdp.hpp"

namespace fs = std::filesystem;
using crdrl::cli::parse_args;
using crdrl::cli::run;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("crdrl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& body) {
        const auto p = dir_ / name;
        std::ofstream(p) << body;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int call(const std::vector<std::string>& args) {
        out_.str("");
        err_.str("");
        return run(args, out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, LossPrintsCramerValue) {
    const auto a = file("a.csv", "0,2\n"), b = file("b.csv", "1,3\n");
    ASSERT_EQ(call({"loss", "--metric", "cramer", "--left", a, "--right", b}), 0) << err_.str();
    EXPECT_EQ(out_.str(), "0.5\n");
    ASSERT_EQ(call({"loss", "--metric", "cramer-quad", "--left", a, "--right", b}), 0);
    EXPECT_EQ(out_.str(), "0.5\n");
    ASSERT_EQ(call({"loss", "--metric", "w1", "--left", a, "--right", b}), 0);
    EXPECT_EQ(out_.str(), "1\n");
}

TEST_F(CliTest, ProjectSyntheticMixture) {
    const auto m = file("synth.csv", "-1,0.66666666666666663\n1,0.33333333333333331\n");
    ASSERT_EQ(call({"project", "--mixture", m, "--n", "12"}), 0) << err_.str();
    EXPECT_EQ(out_.str(), "-1,-1,-1,-1,-1,-1,-1,-1,1,1,1,1\n");
}

TEST_F(CliTest, GradWithFiniteDifferences) {
    const auto t = file("t.csv", "0\n"), b = file("b.csv", "1\n");
    ASSERT_EQ(call({"grad", "--loss", "qr", "--theta", t, "--target", b, "--check-fd", "1e-6"}), 0);
    std::istringstream lines(out_.str());
    std::string value, grad, fd;
    std::getline(lines, value);
    std::getline(lines, grad);
    std::getline(lines, fd);
    EXPECT_EQ(value, "value,0.5");
    EXPECT_EQ(grad, "grad,-0.5");
    EXPECT_NEAR(std::stod(fd.substr(3)), -0.5, 1e-4);
}

TEST_F(CliTest, FixedPointOnTwoDiracChain) {
    const auto m = file("m.json", crdrl::mdp_to_json(crdrl::two_dirac_mdp(0.5)));
    const auto out = path("fp.csv");
    ASSERT_EQ(call({"fixed-point", "--mdp", m, "--n", "12", "--out", out, "--no-header"}), 0)
        << err_.str();
    const auto text = slurp(out);
    EXPECT_NE(text.find("\n0,0,-1,-1,-1,-1,-1,-1,-1,-1,1,1,1,1\n"), std::string::npos) << text;
}

TEST_F(CliTest, ContractCheckReportsNoViolations) {
    ASSERT_EQ(call({"contract-check", "--instances", "5", "--n", "4", "--no-header"}), 0)
        << err_.str();
    EXPECT_NE(out_.str().find("# violations=0"), std::string::npos);
}

TEST_F(CliTest, TrainSyntheticW1ShowsCollapse) {
    const auto summary = path("s.json");
    ASSERT_EQ(call({"train-synthetic", "--loss", "w1", "--seeds", "3", "--iters", "1000",
                    "--summary", summary, "--no-header"}),
              0)
        << err_.str();
    const auto text = slurp(summary);
    EXPECT_NE(text.find("\"collapsed_seeds\": 3"), std::string::npos) << text;
    EXPECT_EQ(text.find("generated"), std::string::npos);
}

TEST_F(CliTest, NoHeaderRunsAreByteIdentical) {
    const auto a = path("a.csv"), b = path("b.csv"), sa = path("a.json"), sb = path("b.json");
    for (const auto& [trace, summary] : {std::pair{a, sa}, std::pair{b, sb}}) {
        ASSERT_EQ(call({"train-synthetic", "--seeds", "3", "--iters", "30", "--out", trace,
                        "--summary", summary, "--no-header", "--seed", "5"}),
                  0);
    }
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(sa), slurp(sb));
    EXPECT_EQ(slurp(a).rfind("# config:", 0), 0u);
    EXPECT_NE(slurp(a).find("seed,iteration,d1\n5,1,"), std::string::npos);
}

TEST_F(CliTest, HeaderCarriesTimestampUnlessSuppressed) {
    const auto a = file("a.csv", "0,2\n"), b = file("b.csv", "1,3\n"), o = path("o.csv");
    ASSERT_EQ(call({"loss", "--left", a, "--right", b, "--out", o}), 0);
    EXPECT_EQ(slurp(o).rfind("# crdrl loss generated ", 0), 0u);
    ASSERT_EQ(call({"--no-header", "loss", "--left", a, "--right", b, "--out", o}), 0);
    EXPECT_EQ(slurp(o).rfind("# config:", 0), 0u);
}

TEST_F(CliTest, ErrorsAreOneLineDiagnostics) {
    const auto bad = file("bad.csv", "0,1\n0,abc\n"), good = file("g.csv", "0,1\n");
    EXPECT_NE(call({"loss", "--left", bad, "--right", good}), 0);
    EXPECT_EQ(err_.str().rfind("error: ", 0), 0u);
    EXPECT_NE(err_.str().find(":2"), std::string::npos) << err_.str();
    const std::string diag = err_.str();
    EXPECT_EQ(std::count(diag.begin(), diag.end(), '\n'), 1);

    const auto three = file("three.csv", "0,1,2\n");
    EXPECT_NE(call({"loss", "--left", three, "--right", good}), 0);
    EXPECT_NE(err_.str().find("dimension mismatch"), std::string::npos);

    EXPECT_EQ(call({"loss", "--bogus", "1"}), 2);
    EXPECT_EQ(err_.str().rfind("error: ", 0), 0u);

    const auto json = file("m.json", "{\n  \"n_states\": 1,\n  oops\n}\n");
    EXPECT_NE(call({"fixed-point", "--mdp", json}), 0);
    EXPECT_NE(err_.str().find(":3"), std::string::npos) << err_.str();
}

TEST_F(CliTest, SeedFromEnvironmentUnlessGiven) {
    std::ostringstream sink;
    ::setenv("CRDRL_SEED", "77", 1);
    auto cfg = parse_args({"bench"}, sink);
    EXPECT_EQ(cfg->seed, 77u);
    cfg = parse_args({"bench", "--seed", "3"}, sink);
    EXPECT_EQ(cfg->seed, 3u);
    ::unsetenv("CRDRL_SEED");
    cfg = parse_args({"bench"}, sink);
    EXPECT_EQ(cfg->seed, 0u);
}

TEST_F(CliTest, HelpReturnsZero) {
    EXPECT_EQ(call({"--help"}), 0);
    EXPECT_NE(out_.str().find("train-synthetic"), std::string::npos);
}
