#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "btransport/cli.hpp"

using namespace btransport;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("btransport_cli_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_tokens(const std::string& cmd, std::vector<std::string> tokens, std::string* out_text = nullptr,
               std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int code = 0;
    try {
        code = cli::run(cli::make_config(cmd, tokens), out, err);
    } catch (const PreconditionError& e) {
        err << e.what();
        code = cli::kBadInput;
    }
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

int shell(const std::string& args) {
    const std::string cmd = std::string(BTRANSPORT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(CliConfig, UnknownKeyRejected) {
    EXPECT_THROW(cli::make_config("pipeline", {"bogus=1"}), PreconditionError);
    EXPECT_THROW(cli::make_config("pipeline", {"t0"}), PreconditionError);
    EXPECT_THROW(cli::make_config("frobnicate", {}), PreconditionError);
}

TEST(CliConfig, FileThenCommandLine) {
    const auto d = scratch("cfg");
    fs::create_directories(d);
    {
        std::ofstream f(d / "run.cfg");
        f << "# comment\n t0=0.4 \n\nn=64\n";
    }
    const auto cfg = cli::make_config("pipeline", {"n=128"}, (d / "run.cfg").string());
    EXPECT_EQ(cfg.params.at("t0"), "0.4");
    EXPECT_EQ(cfg.params.at("n"), "128");
    fs::remove_all(d);
}

TEST(CliRun, BadT0IsPreconditionError) {
    std::string err;
    EXPECT_EQ(run_tokens("pipeline", {"t0=1.5"}, nullptr, &err), cli::kBadInput);
    EXPECT_NE(err.find("t0"), std::string::npos) << err;
}

TEST(CliRun, MalformedNumber) {
    std::string err;
    EXPECT_EQ(run_tokens("pipeline", {"n=12x"}, nullptr, &err), cli::kBadInput);
    EXPECT_NE(err.find("n = '12x'"), std::string::npos) << err;
}

TEST(CliRun, PipelineWritesBundleDeterministically) {
    const auto d1 = scratch("p1"), d2 = scratch("p2");
    std::string out;
    ASSERT_EQ(run_tokens("pipeline", {"t0=0.5", "n=64", "out_dir=" + d1.string()}, &out), cli::kOk) << out;
    ASSERT_EQ(run_tokens("pipeline", {"t0=0.5", "n=64", "out_dir=" + d2.string()}), cli::kOk);
    for (const char* f : {"f.csv", "phi.csv", "cantor.csv", "meta"}) {
        ASSERT_TRUE(fs::exists(d1 / f)) << f;
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    }
    EXPECT_NE(out.find("status=pass"), std::string::npos);
    EXPECT_NE(slurp(d1 / "meta").find("t0=0.5\n"), std::string::npos);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(CliRun, EnvironmentOutDir) {
    const auto d = scratch("env");
    ::setenv("BTRANSPORT_OUT_DIR", d.string().c_str(), 1);
    EXPECT_EQ(run_tokens("cantor", {"depth=3", "samples=100"}), cli::kOk);
    ::unsetenv("BTRANSPORT_OUT_DIR");
    EXPECT_TRUE(fs::exists(d / "cantor.csv"));
    fs::remove_all(d);
}

TEST(CliRun, CantorDepthZeroFailsHypothesis) {
    const auto d = scratch("k0");
    std::string out;
    EXPECT_EQ(run_tokens("cantor", {"depth=0", "samples=10", "out_dir=" + d.string()}, &out), cli::kCheckFailed);
    EXPECT_NE(out.find("alpha_quadratic=0"), std::string::npos) << out;
    fs::remove_all(d);
}

TEST(CliRun, SolveFromCsv) {
    const auto d = scratch("solve");
    fs::create_directories(d);
    {
        std::ofstream a(d / "mu0.csv"), b(d / "mu1.csv");
        write_lattice_csv(a, LatticeMeasure(1, 0, {1.0}));
        write_lattice_csv(b, LatticeMeasure(1, -2, {0.25, 0.25, 0.0, 0.25, 0.25}));
    }
    std::string out;
    ASSERT_EQ(run_tokens("solve", {"mu0=" + (d / "mu0.csv").string(), "mu1=" + (d / "mu1.csv").string(),
                                   "out_dir=" + d.string()},
                         &out),
              cli::kOk)
        << out;
    EXPECT_NE(out.find("E_T=2.5"), std::string::npos) << out;
    EXPECT_TRUE(fs::exists(d / "solution.csv"));
    fs::remove_all(d);
}

TEST(CliRun, SolveInfeasibleIsBadInput) {
    const auto d = scratch("solve_bad");
    fs::create_directories(d);
    {
        std::ofstream a(d / "mu0.csv"), b(d / "mu1.csv");
        write_lattice_csv(a, LatticeMeasure(1, -1, {0.5, 0.0, 0.5}));
        write_lattice_csv(b, LatticeMeasure(1, 0, {1.0}));
    }
    EXPECT_EQ(run_tokens("solve", {"mu0=" + (d / "mu0.csv").string(), "mu1=" + (d / "mu1.csv").string(),
                                   "out_dir=" + d.string()}),
              cli::kBadInput);
    EXPECT_EQ(run_tokens("solve", {"mu0=" + (d / "missing.csv").string(), "mu1=" + (d / "mu1.csv").string()}),
              cli::kBadInput);
    fs::remove_all(d);
}

TEST(CliBinary, ExitCodes) {
    EXPECT_EQ(shell("pipeline t0=1.5"), 2);
    EXPECT_EQ(shell("pipeline bogus=1"), 2);
    EXPECT_EQ(shell(""), 2);
    EXPECT_EQ(shell("--help"), 0);
    const auto d = scratch("bin");
    EXPECT_EQ(shell("cantor depth=4 samples=50 out_dir=" + d.string()), 0);
    EXPECT_TRUE(fs::exists(d / "cantor.csv"));
    fs::remove_all(d);
}
