#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewlab/rng.hpp"

namespace skewlab {

using State = int;  // zero-based internally, printed one-based
using Matrix = std::vector<std::vector<double>>;
using BoolMatrix = std::vector<std::vector<int>>;

/// Finite symbol sequence over the chain's states.
struct Word {
  std::vector<State> symbols;

  Word() = default;
  Word(std::initializer_list<State> s) : symbols(s) {}
  explicit Word(std::vector<State> s) : symbols(std::move(s)) {}

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  State operator[](std::size_t i) const { return symbols[i]; }
  State front() const { return symbols.front(); }
  State back() const { return symbols.back(); }
  auto begin() const { return symbols.begin(); }
  auto end() const { return symbols.end(); }

  Word operator+(const Word& tail) const;
  Word operator+(State s) const;

  /// One-based rendering: "121", or "10.3.1" once any symbol exceeds 9.
  std::string str() const;
  /// Inverse of str(). Accepts digit strings or '.'-separated numbers.
  static Word parse(std::string_view text);

  auto operator<=>(const Word&) const = default;
};

/// Length first, then lexicographic.
bool shortlex_less(const Word& a, const Word& b);

bool is_transitive(const BoolMatrix& adjacency);

/// Unique p with p Pi = p, sum p = 1. Throws input error for a non-stochastic
/// matrix and structure error when the nonzero pattern is not transitive.
std::vector<double> stationary_distribution(const Matrix& transition);

/// Transitive topological Markov chain with its Markov measure. Immutable.
class MarkovChain {
 public:
  /// Adjacency is the nonzero pattern of the transition matrix.
  explicit MarkovChain(Matrix transition);
  MarkovChain(BoolMatrix adjacency, Matrix transition);

  int size() const { return static_cast<int>(transition_.size()); }
  bool admissible(State i, State j) const { return adjacency_[i][j] != 0; }
  bool admissible(const Word& w) const;
  double transition(State i, State j) const { return transition_[i][j]; }
  double stationary(State i) const { return stationary_[i]; }

  const BoolMatrix& adjacency() const { return adjacency_; }
  const Matrix& transition_matrix() const { return transition_; }
  const std::vector<double>& stationary() const { return stationary_; }
  const std::vector<State>& successors(State i) const { return successors_[i]; }

 private:
  BoolMatrix adjacency_;
  Matrix transition_;
  std::vector<double> stationary_;
  std::vector<std::vector<State>> successors_;
};

/// nu(C_w) = p_{w1} prod pi_{w_i w_{i+1}}.
double cylinder_measure(const MarkovChain& chain, const Word& word);

/// nu(wC) / nu(C) for a cylinder C whose first symbol is `first_symbol`.
double cylinder_ratio(const MarkovChain& chain, const Word& prefix, State first_symbol);

/// Minimum of cylinder_ratio over every symbol admissible after the prefix.
double cylinder_ratio_bound(const MarkovChain& chain, const Word& prefix);

Word sample_path(const MarkovChain& chain, std::size_t length, std::optional<State> initial, Rng& rng);
Word sample_path(const MarkovChain& chain, std::size_t length, std::optional<State> initial, std::uint64_t seed);

/// Every admissible word of the given length, shortlex order.
std::vector<Word> admissible_words(const MarkovChain& chain, std::size_t length);

/// Time reversal: pi~_ji = p_i pi_ij / p_j, adjacency transposed.
MarkovChain reverse_chain(const MarkovChain& chain);

}  // namespace skewlab
