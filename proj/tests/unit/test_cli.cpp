#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chiralq_cli/commands.hpp"

using namespace chiralq;
using namespace chiralq::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chiralq_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig small_winding(const fs::path& out) {
  RunConfig c = parse_config("model.m_z = 1.4\nmesh.level = 2\n");
  c.out_dir = out;
  return c;
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndUnits) {
  const RunConfig c = parse_config(
      "# comment\n"
      "model.m_z = 0.5   # trailing\n"
      "quench.axis = 2\n"
      "quench.depth = inf\n"
      "polarization.k = 0.1, 0.6, 0.1\n"
      "transition.track_depths = 2.5, 2.7\n");
  EXPECT_EQ(c.model.m_z, 0.5);
  EXPECT_EQ(c.quench.axis, 2);
  EXPECT_TRUE(c.quench.is_deep());
  EXPECT_EQ(c.pol_k, Vec3(0.1, 0.6, 0.1));
  EXPECT_EQ(c.track_depths, (std::vector<double>{2.5, 2.7}));
}

TEST(Config, RejectsUnknownRepeatedAndMalformed) {
  EXPECT_THROW(parse_config("model.bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("model.m_z = 1\nmodel.m_z = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("model.m_z = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("model.m_z\n"), ConfigError);
  EXPECT_THROW(parse_config("mesh.level = 2.5\n"), ConfigError);
  try {
    parse_config("\n\nmodel.nope = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Config, ValidateNamesOffendingKey) {
  RunConfig c;
  c.t_end = c.t_start;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.trials = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.grid_step = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(Config, EchoListsEveryKey) {
  const auto echo = RunConfig{}.echo();
  for (const std::string& k : config_keys()) EXPECT_TRUE(echo.contains(k)) << k;
  RunConfig c;
  apply_setting(c, "noise.enabled", "on");
  EXPECT_TRUE(c.noise);
}

TEST(Output, ShaAndFormatting) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Output, UncommittedRunCleansUp) {
  const fs::path dir = scratch("cleanup");
  {
    OutputSet out(dir);
    out.write("a.csv", "x\n1\n");
    EXPECT_TRUE(fs::exists(dir / "a.csv"));
  }
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Output, ManifestHashesMatchFiles) {
  const fs::path dir = scratch("manifest");
  const auto m = run_command("winding", small_winding(dir));
  EXPECT_EQ(m["command"], "winding");
  EXPECT_EQ(m["seed"], 20240601u);
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));
  const auto disk = nlohmann::json::parse(slurp(dir / "manifest.json"));
  ASSERT_FALSE(disk["files"].empty());
  for (const auto& f : disk["files"]) {
    const std::string body = slurp(dir / f["name"].get<std::string>());
    EXPECT_EQ(f["sha256"], sha256_hex(body));
    EXPECT_EQ(f["bytes"], body.size());
  }
  fs::remove_all(dir);
}

TEST(Output, RunsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_command("winding", small_winding(a));
  run_command("winding", small_winding(b));
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;  // carries wall time
    EXPECT_EQ(slurp(e.path()), slurp(b / name)) << name;
    ++compared;
  }
  EXPECT_GT(compared, 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Commands, FailedRunLeavesNothing) {
  const fs::path dir = scratch("fail");
  RunConfig c = small_winding(dir);
  c.model.m_z = 4.0;
  EXPECT_THROW(run_command("bis", c), BisAbsentError);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Commands, NamesAndExitCodes) {
  const auto names = command_names();
  EXPECT_EQ(names.size(), 6u);
  for (const auto& n : names) EXPECT_NE(find_command(n), nullptr);
  EXPECT_THROW(find_command("nope"), ConfigError);
  EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(exit_code_for(BisAbsentError("x")), 3);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}
