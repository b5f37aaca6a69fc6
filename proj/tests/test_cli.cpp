#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "skewlab/cli.hpp"
#include "skewlab/error.hpp"
#include "skewlab/measures.hpp"

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(SKEWLAB_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skewlab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

const char* kTwoState = R"(chain:
  n_states: 2
  transition:
    - [0.5, 0.5]
    - [0.5, 0.5]
maps:
  - state: 1
    family: affine
    params: [0.05, 0.4]
  - state: 2
    family: affine
    params: [0.55, 0.4]
)";

void replace_rows(std::string& text, const std::string& rows) {
  const std::string uniform = "[0.5, 0.5]\n    - [0.5, 0.5]";
  text.replace(text.find(uniform), uniform.size(), rows);
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::precondition;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, ShippedS1Loads) {
  const SystemConfig c = load_config(config_path("s1.cfg"));
  EXPECT_EQ(c.n_states, 2);
  EXPECT_EQ(c.analysis.seed, 7u);
  const SkewSystem s = c.system();
  EXPECT_EQ(s.map(0).as_affine()->offset, 0.05);
  EXPECT_EQ(s.map(1).as_affine()->offset, 0.55);
  EXPECT_TRUE(check_genericity(s).generic());
}

TEST(Config, AllShippedConfigsLoad) {
  for (const char* name : {"s1.cfg", "s2.cfg", "s3.cfg", "mobius_parabolic.cfg", "multistep.cfg"})
    EXPECT_NO_THROW(load_config(config_path(name)).system()) << name;
}

TEST(Config, RowSummingToPointNineNamesTheRow) {
  std::string text = kTwoState;
  replace_rows(text, "[0.5, 0.5]\n    - [0.5, 0.4]");
  EXPECT_EQ(kind_of(text), ErrorKind::input);
  // Field paths count rows and list items from 1.
  EXPECT_NE(message_of(text).find("chain.transition[2]: row sums to 0.9"), std::string::npos) << message_of(text);
}

TEST(Config, ReportsEveryProblem) {
  std::string text = kTwoState;
  replace_rows(text, "[0.5, 0.3]\n    - [0.5, 0.4]");
  text.replace(text.find("[0.55, 0.4]"), 11, "[0.55, 0.5]");
  const std::string msg = message_of(text);
  EXPECT_NE(msg.find("chain.transition[1]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("chain.transition[2]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("maps[2]"), std::string::npos) << msg;
}

TEST(Config, InadmissibleWindowIsRejected) {
  const std::string text = R"(chain:
  n_states: 3
  adjacency:
    - [1, 0, 1]
    - [1, 1, 0]
    - [0, 1, 1]
  transition:
    - [0.5, 0.0, 0.5]
    - [0.5, 0.5, 0.0]
    - [0.0, 0.5, 0.5]
memory: [0, 1]
maps:
  - window: "12"
    family: affine
    params: [0.1, 0.5]
)";
  EXPECT_EQ(kind_of(text), ErrorKind::input);
  EXPECT_NE(message_of(text).find("window"), std::string::npos) << message_of(text);
  EXPECT_NE(message_of(text).find("12"), std::string::npos) << message_of(text);
}

TEST(Config, ParseErrorCarriesLineAndColumn) {
  const std::string text = "chain:\n  n_states: 2\n  transition: [[0.5, 0.5], [0.5\n";
  EXPECT_EQ(kind_of(text), ErrorKind::io);
  const std::string msg = message_of(text);
  EXPECT_NE(msg.find("<config>:"), std::string::npos) << msg;
  EXPECT_TRUE(msg.find(":3:") != std::string::npos || msg.find(":4:") != std::string::npos) << msg;
}

TEST(Config, MissingFileIsIoError) {
  try {
    load_config(config_path("does_not_exist.cfg"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Config, EmitRoundTrips) {
  const SystemConfig c = load_config(config_path("s2.cfg"));
  const SystemConfig d = parse_config(emit_config(c));
  EXPECT_EQ(emit_config(d), emit_config(c));
  const SkewSystem a = c.system(), b = d.system();
  for (int i = 0; i <= 100; ++i)
    for (State k = 0; k < 2; ++k) EXPECT_EQ(a.map(k)(i / 100.0), b.map(k)(i / 100.0));
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::io), 1);
  EXPECT_EQ(exit_code(ErrorKind::input), 1);
  EXPECT_EQ(exit_code(ErrorKind::genericity), 2);
  EXPECT_EQ(exit_code(ErrorKind::convergence), 3);
  EXPECT_EQ(exit_code(ErrorKind::structure), 4);
}

TEST(Run, DecomposeS1) {
  SystemConfig c = load_config(config_path("s1.cfg"));
  c.output.directory = scratch("decompose").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_analysis(c, "decompose", out, err), 0) << err.str();
  EXPECT_NE(out.str().find("1 attractor, 0 repellers, λ = -0.9163"), std::string::npos) << out.str();
  EXPECT_TRUE(fs::exists(fs::path(c.output.directory) / "strips.csv"));
}

TEST(Run, GenericityS3ExitsTwo) {
  std::ostringstream out, err;
  Overrides o;
  o.out = scratch("genericity").string();
  EXPECT_EQ(run_file(config_path("s3.cfg"), "genericity", o, out, err), 2);
  EXPECT_NE(out.str().find("condition 3 FAILED, witness a=(0.5, 0.5)"), std::string::npos) << out.str();
}

TEST(Run, BadOverridesAndMissingConfig) {
  std::ostringstream out, err;
  Overrides o;
  o.bins = 8;
  EXPECT_EQ(run_file(config_path("s1.cfg"), "stationary", o, out, err), 1);
  EXPECT_EQ(run_file(config_path("nope.cfg"), "stationary", {}, out, err), 1);
}

TEST(Run, UnrollEmitsLoadableStepConfig) {
  SystemConfig c = load_config(config_path("multistep.cfg"));
  c.output.directory = scratch("unroll").string();
  std::ostringstream out, err;
  ASSERT_EQ(run_analysis(c, "unroll", out, err), 0) << err.str();
  const SystemConfig step = load_config(fs::path(c.output.directory) / "unrolled.cfg");
  EXPECT_FALSE(step.multistep());
  EXPECT_EQ(step.n_states, 4);
  // Matched driving words give identical orbits.
  const MultistepSystem m = c.multistep_system();
  const UnrolledSystem u = multistep_to_step(m);
  const SkewSystem reread = step.system();
  const Word drive = sample_path(m.chain, 101, std::nullopt, std::uint64_t{21});
  double x = 0.61, y = 0.61;
  for (std::size_t t = 0; t + 1 < drive.size(); ++t) {
    const Word window{drive[t], drive[t + 1]};
    for (const auto& [w, f] : m.window_maps)
      if (w == window) x = f(x);
    const auto st = std::find(u.windows.begin(), u.windows.end(), window) - u.windows.begin();
    y = reread.map(static_cast<State>(st))(y);
    EXPECT_EQ(x, y) << t;
  }
}

TEST(Run, CsvArtifactsAreDeterministicAcrossRunsAndWorkers) {
  SystemConfig c = load_config(config_path("s1.cfg"));
  c.analysis.bone_samples = 2000;
  std::vector<std::map<std::string, std::string>> runs;
  for (int workers : {1, 1, 3}) {
    c.analysis.workers = workers;
    c.output.directory = scratch("det" + std::to_string(runs.size())).string();
    std::ostringstream out, err;
    ASSERT_EQ(run_analysis(c, "decompose", out, err), 0) << err.str();
    runs.push_back(csv_files(c.output.directory));
  }
  ASSERT_FALSE(runs[0].empty());
  EXPECT_EQ(runs[0], runs[1]);
  EXPECT_EQ(runs[0], runs[2]);
}

TEST(Run, EverySubcommandSucceedsOnS1) {
  SystemConfig c = load_config(config_path("s1.cfg"));
  c.analysis.walk_steps = 20000;
  c.analysis.bins = 256;
  c.analysis.bone_samples = 500;
  c.analysis.baxendale_bins = 512;
  c.analysis.baxendale_epsilons = {0.1};
  for (const auto& sub : subcommands()) {
    c.output.directory = scratch("sub_" + sub).string();
    std::ostringstream out, err;
    EXPECT_EQ(run_analysis(c, sub, out, err), 0) << sub << ": " << err.str();
    EXPECT_FALSE(fs::is_empty(c.output.directory)) << sub;
  }
}

TEST(Binary, ExitStatusAndFlags) {
  const std::string bin = SKEWLAB_BINARY;
  const std::string dir = scratch("binary").string();
  const auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("genericity " + config_path("s3.cfg") + " --out " + dir), 2);
  EXPECT_EQ(run("genericity " + config_path("s1.cfg") + " --out " + dir), 0);
  EXPECT_EQ(run("walk " + config_path("s1.cfg") + " --out " + dir + " --steps 20000 --bins 128 --seed 3"), 0);
  EXPECT_TRUE(fs::exists(fs::path(dir) / "walk_1.csv"));
  EXPECT_EQ(run("stationary " + config_path("missing.cfg")), 1);
  EXPECT_EQ(run("frobnicate " + config_path("s1.cfg")), 1);
}
