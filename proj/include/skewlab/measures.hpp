#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewlab/skeleton.hpp"

namespace skewlab {

/// Per-state histogram with B uniform bins on [0,1]; masses are joint, so the
/// state totals are the state weights.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(int n_states, int bins);

  int states() const { return static_cast<int>(mass_.size()); }
  int bins() const { return bins_; }
  double width() const { return 1.0 / bins_; }
  double left(int b) const { return static_cast<double>(b) / bins_; }
  double right(int b) const { return static_cast<double>(b + 1) / bins_; }
  double mid(int b) const { return (b + 0.5) / bins_; }
  int bin_of(double x) const;

  std::vector<double>& operator[](State k) { return mass_[k]; }
  const std::vector<double>& operator[](State k) const { return mass_[k]; }

  double total() const;
  double state_mass(State k) const;
  /// Scales to total 1; input error when the measure is empty.
  void normalize();
  /// Occupied range [left of first, right of last nonzero bin] at a state.
  std::optional<Interval> support(State k) const;
  /// Integral of x over all states, bins at their midpoints.
  double mean() const;
  std::vector<double> flat() const;

  /// Rows (state, bin_left, bin_right, mass), states one-based.
  std::string csv() const;

 private:
  int bins_ = 0;
  std::vector<std::vector<double>> mass_;
};

double total_variation(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Ulam discretisation of the stochastic image (f_* mu)_j = sum_i pi_ij (f_i)_* mu_i:
/// each bin's mass is spread uniformly over its monotone image.
class TransferOperator {
 public:
  TransferOperator(const SkewSystem& system, int bins);
  EmpiricalMeasure apply(const EmpiricalMeasure& mu) const;
  int bins() const { return bins_; }

 private:
  struct Entry {
    int from;
    int to;
    double weight;
  };
  const SkewSystem* system_;
  int bins_;
  std::vector<std::vector<Entry>> push_;  // per source state
};

EmpiricalMeasure transfer_step(const SkewSystem& system, const EmpiricalMeasure& mu);

/// Normalised uniform measure on a domain, each state weighted by p_k.
EmpiricalMeasure uniform_on(const SkewSystem& system, const Domain& domain, int bins);

struct StationaryResult {
  EmpiricalMeasure measure;
  std::size_t iterations = 0;
  double tv_gap = 0.0;
};

/// Power iteration from the uniform measure on the domain until the total
/// variation between iterates is below tol; convergence error past max_iter.
StationaryResult power_iterate_stationary(const SkewSystem& system, const Domain& domain, int bins, double tol,
                                          std::size_t max_iter);

struct WalkResult {
  EmpiricalMeasure measure;
  std::vector<double> lowest;   // per state, smallest visited point (NaN if unvisited)
  std::vector<double> highest;
  double lyapunov = 0.0;        // orbit average of log f'
  std::size_t samples = 0;
};

/// Random walk (i,x) -> (j, f_i(x)) with probability pi_ij, recorded after burn_in.
WalkResult simulate_walk(const SkewSystem& system, std::size_t steps, std::size_t burn_in, std::uint64_t seed,
                         int bins, const std::optional<Domain>& start = std::nullopt);

/// Sum_i integral of log f_i' d mu_i, at bin midpoints.
double lyapunov_exponent(const SkewSystem& system, const EmpiricalMeasure& mu);

struct SrbReport {
  double space_average = 0.0;
  std::vector<double> time_averages;
  double max_deviation = 0.0;
};

/// Time averages of phi(x) = x from random starts in the domain against the space average of mu.
SrbReport srb_check(const SkewSystem& system, const EmpiricalMeasure& mu, const Domain& domain, int trials,
                    std::size_t orbit_length, std::uint64_t seed, int workers = 1);

/// Sum m1 log(m1/m2); +inf when m1 charges a bin m2 leaves empty.
double relative_entropy(std::span<const double> m1, std::span<const double> m2);
double relative_entropy(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2);

/// Raised-cosine translation law on [-eps, eps] after contraction by (1 - eps) toward 1/2.
class SmoothingKernel {
 public:
  explicit SmoothingKernel(double eps);
  double epsilon() const { return eps_; }
  double density(double t) const;
  /// Antiderivative of the translation CDF, zero left of -eps.
  double cdf_integral(double u) const;
  double contract(double x) const { return 0.5 + (1.0 - eps_) * (x - 0.5); }
  /// Bound on the output density of one smoothed step.
  double density_bound() const { return 1.0 / eps_; }

 private:
  double eps_;
};

/// Exact convolution of piecewise-uniform bins with the kernel; mass leaving
/// [0,1] is reflected back. Parameter error when more than 1e-6 would be lost.
class SmoothingOperator {
 public:
  SmoothingOperator(const SmoothingKernel& kernel, int bins);
  std::vector<double> apply(std::span<const double> v) const;
  /// Fraction of each unit bin mass that was reflected at the boundary.
  double reflected(std::span<const double> v) const;

 private:
  struct Band {
    int first;
    std::vector<double> weights;
    double reflected;
  };
  int bins_;
  std::vector<Band> bands_;
};

EmpiricalMeasure smoothed_transfer_step(const SkewSystem& system, const EmpiricalMeasure& mu,
                                        const SmoothingKernel& kernel);

struct BaxendaleReport {
  double epsilon = 0.0;
  int bins = 0;
  double lhs = 0.0;  // smoothed volume exponent
  double rhs = 0.0;  // minus the weighted expected relative entropies
  double relative_gap = 0.0;
  bool both_negative = false;
  std::vector<double> entropy_terms;  // E_t h(...) per admissible (i,j), row-major, before negation
  double reflected_mass = 0.0;
  double max_density = 0.0;
  double density_bound = 0.0;
  std::size_t iterations = 0;
  double tv_gap = 0.0;
  std::string verdict;

  std::string text() const;
};

BaxendaleReport baxendale_check(const SkewSystem& system, double eps, int bins, double tol,
                                std::size_t max_iter = 100000);

}  // namespace skewlab
