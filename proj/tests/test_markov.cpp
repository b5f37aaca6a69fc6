#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "skewlab/error.hpp"

using namespace skewlab;

namespace {

// Independent oracle: Boolean powers up to N^2.
bool transitive_by_powers(const BoolMatrix& a) {
  const std::size_t n = a.size();
  BoolMatrix p = a;
  for (std::size_t k = 1; k <= n * n; ++k) {
    bool all = true;
    for (const auto& row : p)
      for (int v : row) all = all && v;
    if (all) return true;
    BoolMatrix q(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t m = 0; m < n; ++m) q[i][j] = q[i][j] || (p[i][m] && a[m][j]);
    p = q;
  }
  return false;
}

const Matrix kBiased{{0.9, 0.1}, {0.5, 0.5}};

}  // namespace

TEST(Stationary, DoublyStochasticIsUniform) {
  const auto p = stationary_distribution({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_NEAR(p[0], 0.5, 1e-14);
  EXPECT_NEAR(p[1], 0.5, 1e-14);
}

TEST(Stationary, TwoStateMatchesClosedForm) {
  // p_1 pi_12 = p_2 pi_21 with p_1 + p_2 = 1.
  const double p1 = kBiased[1][0] / (kBiased[0][1] + kBiased[1][0]);
  const auto p = stationary_distribution(kBiased);
  EXPECT_NEAR(p[0], p1, 1e-14);
  EXPECT_NEAR(p[1], 1.0 - p1, 1e-14);
  EXPECT_NEAR(p[0], 5.0 / 6.0, 1e-14);
}

TEST(Stationary, IdentityIsStructureError) {
  try {
    stationary_distribution({{1.0, 0.0}, {0.0, 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structure);
  }
}

TEST(Stationary, NonStochasticRowIsInputError) {
  try {
    stationary_distribution({{0.5, 0.4}, {0.5, 0.5}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
}

TEST(Transitive, Examples) {
  EXPECT_TRUE(is_transitive({{1, 1}, {1, 1}}));
  EXPECT_FALSE(is_transitive({{1, 0}, {0, 1}}));
  // Periodic: powers alternate between the swap and the identity pattern.
  const BoolMatrix swap{{0, 1}, {1, 0}};
  EXPECT_EQ(is_transitive(swap), transitive_by_powers(swap));
  EXPECT_FALSE(is_transitive(swap));
}

TEST(Transitive, AgreesWithPowerOracleOnAll3x3Patterns) {
  for (int mask = 0; mask < (1 << 9); ++mask) {
    BoolMatrix a(3, std::vector<int>(3));
    for (int b = 0; b < 9; ++b) a[b / 3][b % 3] = (mask >> b) & 1;
    EXPECT_EQ(is_transitive(a), transitive_by_powers(a)) << mask;
  }
}

TEST(Chain, RejectsPatternMismatch) {
  EXPECT_THROW(MarkovChain(BoolMatrix{{1, 1}, {1, 1}}, Matrix{{1.0, 0.0}, {0.5, 0.5}}), Error);
  EXPECT_THROW(MarkovChain(Matrix{{1.0, 0.0}, {0.5, 0.5}}), Error);  // pi_11 = 1 is absorbing
}

TEST(Cylinder, Examples) {
  const MarkovChain c = fixtures::uniform_shift(2);
  EXPECT_DOUBLE_EQ(cylinder_measure(c, Word{0}), 0.5);
  EXPECT_DOUBLE_EQ(cylinder_measure(c, Word{0, 1}), 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(cylinder_measure(c, Word{0, 1, 0}), 0.5 * 0.5 * 0.5);
}

TEST(Cylinder, InadmissibleWordIsInputError) {
  const MarkovChain c(Matrix{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}});
  try {
    cylinder_measure(c, Word{0, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
}

TEST(Cylinder, MultiplicativeUnderConcatenation) {
  const MarkovChain c(Matrix{{0.2, 0.5, 0.3}, {0.6, 0.0, 0.4}, {0.1, 0.8, 0.1}});
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Word w = sample_path(c, 2 + trial % 7, std::nullopt, rng);
    const std::size_t cut = 1 + static_cast<std::size_t>(trial) % (w.size() - 1);
    const Word head(std::vector<State>(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut)));
    double tail = 1.0;
    for (std::size_t i = cut; i < w.size(); ++i) tail *= c.transition(w[i - 1], w[i]);
    EXPECT_NEAR(cylinder_measure(c, w), cylinder_measure(c, head) * tail, 1e-15);
  }
}

TEST(CylinderRatio, Examples) {
  const MarkovChain c = fixtures::uniform_shift(2);
  // (p_1 / p_1) pi_12 pi_21
  EXPECT_DOUBLE_EQ(cylinder_ratio(c, Word{0, 1}, 0), 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(cylinder_ratio(c, Word{0}, 0), 0.5);
  EXPECT_DOUBLE_EQ(cylinder_ratio_bound(c, Word{0, 1}), 0.25);
}

TEST(CylinderRatio, BoundPositiveOnEveryPrefix) {
  const MarkovChain c(Matrix{{0.2, 0.5, 0.3}, {0.6, 0.0, 0.4}, {0.1, 0.8, 0.1}});
  for (std::size_t len = 1; len <= 4; ++len)
    for (const auto& w : admissible_words(c, len)) EXPECT_GT(cylinder_ratio_bound(c, w), 0.0) << w.str();
}

TEST(SamplePath, FrequenciesFollowStationaryLaw) {
  const Word w = sample_path(fixtures::uniform_shift(2), 100000, std::nullopt, std::uint64_t{11});
  std::map<State, double> freq;
  for (State s : w) freq[s] += 1.0 / static_cast<double>(w.size());
  EXPECT_NEAR(freq[0], 0.5, 0.01);
  EXPECT_NEAR(freq[1], 0.5, 0.01);
}

TEST(SamplePath, LengthOneAndDeterminism) {
  const MarkovChain c(kBiased);
  const Word one = sample_path(c, 1, State{1}, std::uint64_t{5});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], 1);
  const Word a = sample_path(c, 500, std::nullopt, std::uint64_t{9});
  const Word b = sample_path(c, 500, std::nullopt, std::uint64_t{9});
  EXPECT_EQ(a, b);
  EXPECT_TRUE(c.admissible(a));
}

TEST(Reverse, SymmetricChainIsFixed) {
  const MarkovChain c = fixtures::uniform_shift(3);
  const MarkovChain r = reverse_chain(c);
  for (State i = 0; i < 3; ++i)
    for (State j = 0; j < 3; ++j) EXPECT_NEAR(r.transition(i, j), c.transition(i, j), 1e-15);
}

TEST(Reverse, BiasedChainExample) {
  const MarkovChain c(kBiased);
  const MarkovChain r = reverse_chain(c);
  const double p1 = 5.0 / 6.0, p2 = 1.0 / 6.0;
  EXPECT_NEAR(r.transition(0, 1), p2 * kBiased[1][0] / p1, 1e-14);
  EXPECT_NEAR(r.transition(0, 1), 0.1, 1e-14);
}

TEST(Reverse, InvolutionPreservingStationaryVector) {
  const MarkovChain c(Matrix{{0.2, 0.5, 0.3}, {0.6, 0.0, 0.4}, {0.1, 0.8, 0.1}});
  const MarkovChain r = reverse_chain(c);
  const MarkovChain rr = reverse_chain(r);
  for (State i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.stationary(i), c.stationary(i), 1e-12);
    for (State j = 0; j < 3; ++j) {
      EXPECT_NEAR(rr.transition(i, j), c.transition(i, j), 1e-12);
      EXPECT_EQ(r.admissible(j, i), c.admissible(i, j));
    }
  }
}

TEST(Word, RoundTripText) {
  EXPECT_EQ(Word::parse("121").str(), "121");
  EXPECT_EQ((Word{0, 1, 0}).str(), "121");
  EXPECT_EQ(Word::parse("10.3.1"), (Word{9, 2, 0}));
  EXPECT_EQ((Word{9, 2, 0}).str(), "10.3.1");
}
