#pragma once

#include <string>
#include <vector>

#include "skewlab/fibermaps.hpp"

namespace skewlab {

/// Per-state finite union of closed subintervals of [0,1], kept sorted and merged.
class Domain {
 public:
  Domain() = default;
  explicit Domain(int n_states) : parts_(static_cast<std::size_t>(n_states)) {}
  static Domain uniform(int n_states, Interval iv);

  int size() const { return static_cast<int>(parts_.size()); }
  const std::vector<Interval>& operator[](State k) const { return parts_[k]; }
  bool empty(State k) const { return parts_[k].empty(); }
  bool contains(State k, double x) const;
  /// Smallest interval covering the state's pieces; precondition error when empty.
  Interval hull(State k) const;
  double total_length() const;

  void add(State k, Interval iv);
  /// Closed eps-neighbourhood clipped to [0,1].
  Domain fattened(double eps) const;

  bool operator==(const Domain&) const = default;

 private:
  std::vector<std::vector<Interval>> parts_;
};

Domain unite(const Domain& a, const Domain& b);

struct Skeleton {
  std::vector<Word> transitions;  // distinct symbols, length 1..N
  std::vector<Word> returns;      // transition followed by its first symbol
};

/// Shortlex-sorted simple transitions and simple returns of the chain.
Skeleton enumerate_skeleton(const MarkovChain& chain);

struct ReturnFixedPoints {
  Word word;
  std::vector<FixedPoint> points;
};

/// Fixed points of the map of every simple return, in skeleton order.
std::vector<ReturnFixedPoints> return_fixed_points(const SkewSystem& system);

/// Images of attracting return fixed points under simple transitions ending at
/// `state`, sorted. Genericity error if a return has a parabolic fixed point.
std::vector<double> endpoint_candidates(const SkewSystem& system, State state);
std::vector<double> endpoint_candidates(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns,
                                        State state);

/// One step of the (delta-dispersed) diffusion.
Domain diffusion_step(const SkewSystem& system, const Domain& domain, double delta = 0.0);

inline constexpr double kTrapTol = 1e-12;

enum class TrappingKind { strict, nonstrict, not_trapping };

const char* to_string(TrappingKind kind);

struct TrappingVerdict {
  TrappingKind kind = TrappingKind::strict;
  double margin = 0.0;  // smallest gap between an image and its container
  // Witness for not_trapping.
  State from = -1;
  State to = -1;
  Interval image{};
  double escaping = 0.0;
};

TrappingVerdict is_trapping(const SkewSystem& system, const Domain& domain);

struct TrappingBuild {
  Domain domain;
  TrappingVerdict verdict;
  bool inclusion_holds = false;  // Phi^{N+1}(U) inside the interior of the union of Phi^j(U), j <= N
  double epsilon = 0.0;
  double delta = 0.0;
  bool retry = false;  // set when the result is not strict; try the halved parameters
  double next_epsilon = 0.0;
  double next_delta = 0.0;
};

TrappingBuild build_trapping_domain(const SkewSystem& system, const Domain& seed, double epsilon, double delta);

struct TrappingRegion {
  Domain hull;    // nonstrictly trapping support hull
  Domain domain;  // strictly trapping fattening
  double margin = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  bool inclusion_holds = false;
};

/// Inclusion-minimal invariant interval hulls, ascending. Not gated by genericity.
std::vector<Domain> support_hulls(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns);

/// One strictly trapping domain per ergodic stationary measure, bottom to top.
/// Genericity error if the system is degenerate.
std::vector<TrappingRegion> minimal_trapping_domains(const SkewSystem& system, double epsilon, double delta);

/// Removes the simple returns that raise the point, leaving a downwards
/// monotonous orbit with the same end symbols and no higher final image.
Word monotone_subword(const SkewSystem& system, const Word& word, double x0);

struct CountBound {
  int bound = 0;
  Word witness;
  std::vector<std::string> warnings;
};

/// Minimum number of attracting fixed points over cyclic words up to max_period.
CountBound attractor_count_bound(const SkewSystem& system, int max_period);

enum class Endpoint { lower, upper };

/// Map word leading from `from` to `to` whose image of the hull at `from` lies
/// within eps of the chosen endpoint of the hull at `to`. Beam search, depth
/// 64, width 256; not_found error past the cap.
Word find_squeezing_word(const SkewSystem& system, const Domain& hull, State from, State to, Endpoint target,
                         double eps);

}  // namespace skewlab
