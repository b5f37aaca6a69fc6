#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "skewlab/markov.hpp"

namespace skewlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  auto operator<=>(const Interval&) const = default;
};

/// Evaluator interface for maps without closed-form composition.
class MonotoneFunction {
 public:
  virtual ~MonotoneFunction() = default;
  virtual double value(double x) const = 0;
  virtual double derivative(double x) const = 0;
  virtual std::string describe() const = 0;
};

/// x -> offset + slope * x
struct Affine {
  double offset = 0.0;
  double slope = 1.0;
};

/// x -> (a x + b) / (c x + d), stored with c x + d > 0 on [0,1].
struct Moebius {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

enum class MapFamily { affine, moebius, blackbox };

/// Increasing C^1 map of [0,1] into (0,1). Affine and Moebius maps compose
/// exactly; anything involving a blackbox becomes a chain-rule composite.
class FiberMap {
 public:
  static FiberMap affine(double offset, double slope);
  static FiberMap moebius(double a, double b, double c, double d);
  static FiberMap blackbox(std::shared_ptr<const MonotoneFunction> fn);
  static FiberMap from_functions(std::function<double(double)> value, std::function<double(double)> derivative,
                                 std::string name);
  /// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of a table with x
  /// running from 0 to 1 and strictly increasing y.
  static FiberMap monotone_table(std::vector<double> x, std::vector<double> y);
  /// Unit of composition. Not a valid fiber map on its own (it fixes 0 and 1).
  static FiberMap identity();

  double operator()(double x) const;
  double derivative(double x) const;
  /// Solves f(x) = y; domain error when y lies outside [f(0), f(1)].
  double inverse(double y) const;
  Interval image() const { return {(*this)(0.0), (*this)(1.0)}; }

  MapFamily family() const;
  /// True for the closed-form families.
  bool exact() const { return family() != MapFamily::blackbox; }
  const Affine* as_affine() const { return std::get_if<Affine>(&rep_); }
  const Moebius* as_moebius() const { return std::get_if<Moebius>(&rep_); }
  std::string describe() const;

 private:
  using Blackbox = std::shared_ptr<const MonotoneFunction>;
  using Rep = std::variant<Affine, Moebius, Blackbox>;

  explicit FiberMap(Rep rep) : rep_(std::move(rep)) {}
  void validate() const;

  friend FiberMap compose(const FiberMap& outer, const FiberMap& inner);

  Rep rep_;
};

/// outer o inner
FiberMap compose(const FiberMap& outer, const FiberMap& inner);

Interval map_interval(const FiberMap& f, const Interval& iv);

double invert_point(const FiberMap& f, double y);

enum class FixedPointKind { attracting, repelling, parabolic };

const char* to_string(FixedPointKind kind);

struct FixedPoint {
  double location = 0.0;
  double multiplier = 0.0;
  FixedPointKind kind = FixedPointKind::attracting;
  /// Blackbox tangency found without a sign change of f(x) - x.
  bool suspected = false;
};

inline constexpr double kParabolicTol = 1e-8;

/// All fixed points in [0,1], ascending. Parabolic points are flagged through
/// `kind`, never dropped.
std::vector<FixedPoint> fixed_points(const FiberMap& f);

/// Step skew product: one fiber map per state of a transitive chain.
class SkewSystem {
 public:
  SkewSystem(MarkovChain chain, std::vector<FiberMap> maps);

  const MarkovChain& chain() const { return chain_; }
  int size() const { return chain_.size(); }
  const FiberMap& map(State k) const { return maps_[k]; }
  const std::vector<FiberMap>& maps() const { return maps_; }

 private:
  MarkovChain chain_;
  std::vector<FiberMap> maps_;
};

/// f_{w_n} o ... o f_{w_1}; input error for an inadmissible word.
FiberMap compose_word(const SkewSystem& system, const Word& word);

/// Map carried along a state path: every state's map except the arrival one.
/// A single-state path gives the identity.
FiberMap path_map(const SkewSystem& system, const Word& path);

}  // namespace skewlab
