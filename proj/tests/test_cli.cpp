#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = EPINET_CONFIG_DIR;

int run(const std::string& args) {
  const std::string cmd = std::string(EPINET_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("epinet_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, FluidIsByteIdenticalAcrossThreadCounts) {
  const fs::path a = scratch("fluid_a"), b = scratch("fluid_b");
  const std::string cfg = (kConfigs / "poisson_minimal.toml").string();
  ASSERT_EQ(run("fluid --config " + cfg + " --out " + a.string() + " --threads 1 --dt 0.01"), 0);
  ASSERT_EQ(run("fluid --config " + cfg + " --out " + b.string() + " --threads 3 --dt 0.01"), 0);
  const std::string ta = slurp(a / "trajectory.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
}

TEST(Cli, OptimizeIsDeterministic) {
  const fs::path a = scratch("opt_a"), b = scratch("opt_b");
  const std::string cfg = (kConfigs / "bimodal_fig4a.toml").string();
  ASSERT_EQ(run("optimize --config " + cfg + " --out " + a.string() + " --threads 1 --dt 0.01"), 0);
  ASSERT_EQ(run("optimize --config " + cfg + " --out " + b.string() + " --threads 2 --dt 0.01"), 0);
  EXPECT_EQ(slurp(a / "cost.csv"), slurp(b / "cost.csv"));
}

TEST(Cli, SimulateIsDeterministicForASeed) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  fs::create_directories(a);
  const std::string cfg = (a / "small.toml").string();
  std::ofstream(cfg) << "[distribution]\nfamily = \"poisson\"\nparams = { lambda = 5.0 }\n"
                        "[epidemic]\nT = 10.0\ndt = 0.01\n"
                        "[simulation]\nn = 1000\nreplicas = 4\nevents = true\n";
  const std::string common = " --seed 7";
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + a.string() + " --threads 1" + common), 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + b.string() + " --threads 2" + common), 0);
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
  EXPECT_EQ(slurp(a / "ensemble.csv"), slurp(b / "ensemble.csv"));
}

TEST(Cli, FinalSizeReportsR0) {
  const fs::path out = scratch("final");
  ASSERT_EQ(run("final-size --config " + (kConfigs / "poisson_final_size.toml").string() + " --out " +
                out.string()),
            0);
  const std::string ind = slurp(out / "indicators.csv");
  EXPECT_NE(ind.find("3.7499999"), std::string::npos) << ind;
  EXPECT_TRUE(fs::exists(out / "final_size.csv"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.toml") << "[distribution]\nfamily = \"poisson\"\nparams = { lambda = 5.0 }\n"
                                     "[epidemic]\nepsilon = 0.6\n";
  EXPECT_EQ(run("fluid --config " + (dir / "bad.toml").string() + " --out " + dir.string()), 1);
  EXPECT_EQ(run("fluid --config /nonexistent.toml"), 1);
  EXPECT_NE(run("no-such-subcommand"), 0);
  EXPECT_EQ(run("fluid --config " + (kConfigs / "poisson_minimal.toml").string() + " --out " +
                dir.string() + " --dt 0.3"),
            1);
}
