#pragma once

#include <cmath>
#include <string>

#include "skewlab/config.hpp"
#include "skewlab/genericity.hpp"

namespace fixtures {

using namespace skewlab;

inline MarkovChain uniform_shift(int n) {
  return MarkovChain(Matrix(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 1.0 / n)));
}

// f_1 = 0.05 + 0.4x, f_2 = 0.55 + 0.4x over the uniform full 2-shift.
inline SkewSystem s1() {
  return SkewSystem(uniform_shift(2), {FiberMap::affine(0.05, 0.4), FiberMap::affine(0.55, 0.4)});
}

// Both maps fix 0.5.
inline SkewSystem s3() {
  return SkewSystem(uniform_shift(2), {FiberMap::affine(0.3, 0.4), FiberMap::affine(0.4, 0.2)});
}

inline SkewSystem s2() { return load_config(std::string(SKEWLAB_CONFIG_DIR) + "/s2.cfg").system(); }

inline SkewSystem one_state(FiberMap f) { return SkewSystem(MarkovChain(Matrix{{1.0}}), {std::move(f)}); }

inline double tanh_step(double x) { return 0.5 + std::tanh(6.0 * (x - 0.5)) / (2.0 * std::tanh(3.0)); }
inline double tanh_step_slope(double x) {
  const double c = std::cosh(6.0 * (x - 0.5));
  return 3.0 / (std::tanh(3.0) * c * c);
}

// Two sinks near 0.1 and 0.9 around a source at 1/2.
inline FiberMap bistable() {
  return FiberMap::from_functions([](double x) { return 0.1 + 0.8 * tanh_step(x); },
                                  [](double x) { return 0.8 * tanh_step_slope(x); }, "bistable");
}

inline double hull_length(const Domain& d, State k) { return d.hull(k).length(); }

}  // namespace fixtures
