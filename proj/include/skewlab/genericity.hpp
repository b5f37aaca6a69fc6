#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skewlab/skeleton.hpp"

namespace skewlab {

struct ParabolicWitness {
  Word word;
  FixedPoint point;
};

struct CarryWitness {
  Word source_return;
  double source = 0.0;
  Word transition;
  Word target_return;
  double target = 0.0;
  bool attracting_to_repelling = true;
};

struct GenericityReport {
  double tolerance = 1e-8;
  bool condition1 = true;
  bool condition2 = true;
  bool condition3 = true;
  std::vector<ParabolicWitness> parabolic;
  std::vector<CarryWitness> carried;
  std::optional<std::vector<double>> invariant_tuple;
  // Distance to failure of each condition.
  double margin1 = 0.0;
  double margin2 = 0.0;
  double margin3 = 0.0;

  bool generic() const { return condition1 && condition2 && condition3; }
  /// One line naming the first failed condition and its witness.
  std::string summary() const;
  std::string text() const;
};

GenericityReport check_genericity(const SkewSystem& system, double tol = 1e-8);
GenericityReport check_genericity(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns,
                                  double tol = 1e-8);

/// Throws a genericity error carrying report.summary() unless generic.
void require_generic(const GenericityReport& report);

}  // namespace skewlab
