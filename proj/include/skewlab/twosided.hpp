#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skewlab/measures.hpp"

namespace skewlab {

/// f_{w_{-1}} o ... o f_{w_{-n}} applied to the hull of the domain at w_{-n};
/// the past is written oldest symbol first and must lead into `arrival`.
/// An empty past returns the hull at `arrival`.
Interval pullback_fiber(const SkewSystem& system, const Domain& domain, const Word& past, State arrival);

struct BoneScan {
  int depth = 0;
  double threshold = 0.0;
  double fraction_above = 0.0;            // at full depth
  std::vector<double> fraction_by_depth;  // depth d at index d-1
  std::vector<double> mean_log_length;
  // Least-squares slope of mean log-length against depth, over the depths
  // where every length is still above rounding level (NaN if fewer than two).
  double slope = 0.0;
  int resolved_depth = 0;
  std::vector<Word> pasts;
  std::vector<State> arrivals;
  std::vector<Interval> intervals;

  /// Rows (past_word, state, left, right, length) at full depth.
  std::string csv() const;
};

/// Pasts are sampled from the reversed chain so they follow the Markov measure
/// conditioned on the arrival state.
BoneScan bone_scan(const SkewSystem& system, const Domain& domain, int depth, int samples, double threshold,
                   std::uint64_t seed, int workers = 1);

struct StepGraph {
  std::size_t depth = 0;
  bool drifts_up = true;
  // Keyed by the length-n past; at depth 0 by the one-symbol current state.
  std::vector<std::pair<Word, double>> values;

  double at(const Word& past) const;
};

/// n-th forward image of the step graph with per-state constants.
/// Precondition error unless one step moves every constant the same way.
StepGraph iterate_step_graph(const SkewSystem& system, const std::vector<double>& constants, std::size_t n);

struct RepellerResult {
  EmpiricalMeasure measure;
  double lyapunov = 0.0;  // forward time
  std::vector<double> lowest;
  std::vector<double> highest;
  std::size_t samples = 0;
  std::size_t rejections = 0;
};

/// Reversed walk (j,y) -> (i, f_i^{-1}(y)) with reversed-chain probabilities,
/// kept inside the open gap; a failed inverse restarts the walk.
RepellerResult repeller_analysis(const SkewSystem& system, const Domain& gap, std::size_t steps, std::uint64_t seed,
                                 int bins);

struct StripParams {
  int bins = 2048;
  double power_tol = 1e-10;
  std::size_t max_iter = 100000;
  std::size_t repeller_steps = 200000;
  int bone_depth = 20;
  int bone_samples = 10000;
  double bone_threshold = 1e-6;
  int max_period = 2;
  std::uint64_t seed = 1;
  int workers = 1;
};

enum class StripKind { attractor, repeller };

struct Strip {
  StripKind kind = StripKind::attractor;
  Domain domain;  // trapping domain, or the gap for a repeller
  Domain hull;    // support hull (attractors only)
  EmpiricalMeasure measure;
  double lyapunov = 0.0;
  BoneScan bones;  // attractors only
  std::size_t rejections = 0;
};

struct StripReport {
  std::vector<Strip> strips;  // bottom to top
  int attractors = 0;
  int repellers = 0;
  CountBound count;
  bool count_matches = false;

  std::string summary() const;
  std::string text() const;
  /// Rows (strip, kind, state, interval_index, left, right).
  std::string domains_csv() const;
};

StripReport strip_decomposition(const SkewSystem& system, double epsilon, double delta, const StripParams& params);

/// Fiber maps indexed by windows w_{-back} ... w_{ahead} of the base sequence.
struct MultistepSystem {
  MarkovChain chain;
  int back = 0;
  int ahead = 0;
  std::vector<std::pair<Word, FiberMap>> window_maps;
};

struct UnrolledSystem {
  SkewSystem system;
  std::vector<Word> windows;  // label of each new state
};

/// Step system over admissible windows of length back+ahead+1.
UnrolledSystem multistep_to_step(const MultistepSystem& multistep);

}  // namespace skewlab
