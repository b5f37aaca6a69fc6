#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/twosided.hpp"

namespace skewlab {

struct MapSpec {
  std::optional<State> state;  // step systems
  std::optional<Word> window;  // multistep systems
  std::string family;          // affine | moebius | table
  std::vector<double> params;
  std::vector<double> x, y;  // table knots

  FiberMap build() const;
};

struct AnalysisConfig {
  double epsilon = 0.01;
  double delta = 0.001;
  int bins = 2048;
  std::size_t walk_steps = 1000000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  double power_tol = 1e-10;
  std::size_t max_iter = 100000;
  int bone_depth = 20;
  int bone_samples = 10000;
  double bone_threshold = 1e-6;
  std::vector<double> baxendale_epsilons{0.05};
  int baxendale_bins = 4096;
  int max_period = 2;
  std::size_t repeller_steps = 200000;
  int workers = 1;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "txt"};
};

struct SystemConfig {
  int n_states = 0;
  BoolMatrix adjacency;
  Matrix transition;
  std::vector<MapSpec> maps;
  int back = 0;
  int ahead = 0;
  AnalysisConfig analysis;
  OutputConfig output;

  bool multistep() const { return back != 0 || ahead != 0; }
  MarkovChain chain() const;
  MultistepSystem multistep_system() const;
  /// The step system; multistep configs are unrolled first.
  SkewSystem system() const;
};

/// Parses and validates. Parse failures (io error) carry line and column;
/// semantic failures (input error) list every offending field path.
SystemConfig load_config(const std::filesystem::path& path);
SystemConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Step config equivalent to the unrolled multistep system.
SystemConfig unrolled_config(const SystemConfig& config);

/// Serialises a config in the format load_config reads.
std::string emit_config(const SystemConfig& config);

}  // namespace skewlab
