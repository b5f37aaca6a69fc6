#include "skewlab/markov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-10;

void check_square(const Matrix& m, const char* what) {
  if (m.empty()) throw Error(ErrorKind::input, std::string(what) + " is empty");
  for (const auto& row : m) {
    if (row.size() != m.size()) throw Error(ErrorKind::input, std::string(what) + " is not square");
  }
}

void check_stochastic(const Matrix& transition) {
  check_square(transition, "transition matrix");
  for (std::size_t i = 0; i < transition.size(); ++i) {
    double sum = 0.0;
    for (double v : transition[i]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "transition row " << i + 1 << " has an entry outside [0,1]";
        throw Error(ErrorKind::input, os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os.precision(17);
      os << "transition row " << i + 1 << " sums to " << sum;
      throw Error(ErrorKind::input, os.str());
    }
  }
}

BoolMatrix pattern(const Matrix& transition) {
  BoolMatrix a(transition.size(), std::vector<int>(transition.size(), 0));
  for (std::size_t i = 0; i < transition.size(); ++i)
    for (std::size_t j = 0; j < transition.size(); ++j) a[i][j] = transition[i][j] > 0.0 ? 1 : 0;
  return a;
}

}  // namespace

Word Word::operator+(const Word& tail) const {
  Word out = *this;
  out.symbols.insert(out.symbols.end(), tail.symbols.begin(), tail.symbols.end());
  return out;
}

Word Word::operator+(State s) const {
  Word out = *this;
  out.symbols.push_back(s);
  return out;
}

std::string Word::str() const {
  const bool wide = std::any_of(symbols.begin(), symbols.end(), [](State s) { return s >= 9; });
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (wide && i > 0) out += '.';
    out += std::to_string(symbols[i] + 1);
  }
  return out;
}

Word Word::parse(std::string_view text) {
  Word w;
  if (text.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t dot = std::min(text.find('.', start), text.size());
      const std::string part(text.substr(start, dot - start));
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
        throw Error(ErrorKind::input, "malformed word '" + std::string(text) + "'");
      w.symbols.push_back(std::stoi(part) - 1);
      start = dot + 1;
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') throw Error(ErrorKind::input, "malformed word '" + std::string(text) + "'");
      w.symbols.push_back(c - '1');
    }
  }
  return w;
}

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.symbols < b.symbols;
}

bool is_transitive(const BoolMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw Error(ErrorKind::input, "adjacency matrix is empty");
  for (const auto& row : adjacency)
    if (row.size() != n) throw Error(ErrorKind::input, "adjacency matrix is not square");

  BoolMatrix power = adjacency;
  for (std::size_t step = 1; step <= n * n; ++step) {
    bool all_positive = true;
    for (const auto& row : power)
      for (int v : row) all_positive = all_positive && v != 0;
    if (all_positive) return true;

    BoolMatrix next(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (!power[i][k]) continue;
        for (std::size_t j = 0; j < n; ++j)
          if (adjacency[k][j]) next[i][j] = 1;
      }
    if (next == power) return false;  // powers have stabilized without filling up
    power = std::move(next);
  }
  return false;
}

std::vector<double> stationary_distribution(const Matrix& transition) {
  check_stochastic(transition);
  if (!is_transitive(pattern(transition)))
    throw Error(ErrorKind::structure, "transition pattern is not transitive; stationary vector is not unique");

  const int n = static_cast<int>(transition.size());
  Eigen::MatrixXd system(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) system(j, i) = transition[i][j] - (i == j ? 1.0 : 0.0);
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd p = system.fullPivLu().solve(rhs);

  std::vector<double> out(p.data(), p.data() + n);
  double total = 0.0;
  for (double& v : out) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : out) v /= total;

  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += out[i] * transition[i][j];
    if (std::abs(acc - out[j]) > kStationaryTol)
      throw Error(ErrorKind::structure, "stationary solve did not reach the required residual");
  }
  return out;
}

MarkovChain::MarkovChain(Matrix transition) : MarkovChain(pattern(transition), transition) {}

MarkovChain::MarkovChain(BoolMatrix adjacency, Matrix transition)
    : adjacency_(std::move(adjacency)), transition_(std::move(transition)) {
  check_stochastic(transition_);
  if (adjacency_.size() != transition_.size())
    throw Error(ErrorKind::input, "adjacency and transition sizes differ");
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(adjacency_[i].size()) != n) throw Error(ErrorKind::input, "adjacency matrix is not square");
    for (int j = 0; j < n; ++j) {
      if (adjacency_[i][j] != 0 && adjacency_[i][j] != 1)
        throw Error(ErrorKind::input, "adjacency entries must be 0 or 1");
      if ((adjacency_[i][j] == 1) != (transition_[i][j] > 0.0)) {
        std::ostringstream os;
        os << "transition (" << i + 1 << "," << j + 1 << ") must vanish exactly when adjacency does";
        throw Error(ErrorKind::input, os.str());
      }
    }
  }
  stationary_ = stationary_distribution(transition_);
  successors_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (admissible(i, j)) successors_[i].push_back(j);
}

bool MarkovChain::admissible(const Word& w) const {
  for (State s : w)
    if (s < 0 || s >= size()) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!admissible(w[i], w[i + 1])) return false;
  return true;
}

double cylinder_measure(const MarkovChain& chain, const Word& word) {
  if (word.empty() || !chain.admissible(word))
    throw Error(ErrorKind::input, "cylinder word '" + word.str() + "' is empty or inadmissible");
  double m = chain.stationary(word[0]);
  for (std::size_t i = 0; i + 1 < word.size(); ++i) m *= chain.transition(word[i], word[i + 1]);
  return m;
}

double cylinder_ratio(const MarkovChain& chain, const Word& prefix, State first_symbol) {
  const Word joined = prefix + first_symbol;
  if (prefix.empty() || !chain.admissible(joined))
    throw Error(ErrorKind::input, "concatenation '" + joined.str() + "' is inadmissible");
  // nu(wC)/nu(C): the tail factors of C cancel, leaving the prefix factors.
  return cylinder_measure(chain, joined) / chain.stationary(first_symbol);
}

double cylinder_ratio_bound(const MarkovChain& chain, const Word& prefix) {
  if (prefix.empty() || !chain.admissible(prefix))
    throw Error(ErrorKind::input, "prefix '" + prefix.str() + "' is empty or inadmissible");
  double best = 1.0;
  for (State u : chain.successors(prefix.back())) best = std::min(best, cylinder_ratio(chain, prefix, u));
  return best;
}

Word sample_path(const MarkovChain& chain, std::size_t length, std::optional<State> initial, Rng& rng) {
  if (length == 0) throw Error(ErrorKind::input, "path length must be at least 1");
  if (initial && (*initial < 0 || *initial >= chain.size()))
    throw Error(ErrorKind::input, "initial state out of range");
  Word w;
  w.symbols.reserve(length);
  State s = initial ? *initial : rng.categorical(chain.stationary());
  w.symbols.push_back(s);
  while (w.size() < length) {
    s = rng.categorical(chain.transition_matrix()[s]);
    w.symbols.push_back(s);
  }
  return w;
}

Word sample_path(const MarkovChain& chain, std::size_t length, std::optional<State> initial, std::uint64_t seed) {
  Rng rng(seed);
  return sample_path(chain, length, initial, rng);
}

MarkovChain reverse_chain(const MarkovChain& chain) {
  const int n = chain.size();
  BoolMatrix adjacency(n, std::vector<int>(n, 0));
  Matrix transition(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!chain.admissible(i, j)) continue;
      adjacency[j][i] = 1;
      transition[j][i] = chain.stationary(i) * chain.transition(i, j) / chain.stationary(j);
    }
  // Renormalize rows so the reversed matrix passes the 1e-12 row-sum check exactly.
  for (auto& row : transition) {
    double sum = 0.0;
    for (double v : row) sum += v;
    for (double& v : row) v /= sum;
  }
  return MarkovChain(std::move(adjacency), std::move(transition));
}

std::vector<Word> admissible_words(const MarkovChain& chain, std::size_t length) {
  std::vector<Word> out;
  if (length == 0) return out;
  for (State s = 0; s < chain.size(); ++s) out.push_back(Word{s});
  for (std::size_t len = 1; len < length; ++len) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (State t : chain.successors(w.back())) next.push_back(w + t);
    out = std::move(next);
  }
  return out;
}

}  // namespace skewlab
