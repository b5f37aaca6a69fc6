#include "skewlab/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"
#include "skewlab/genericity.hpp"

namespace skewlab {

namespace {

constexpr int kHullIterationCap = 100000;
constexpr double kHullMotion = 1e-12;
constexpr double kSnapTol = 1e-9;
constexpr int kFatteningRetries = 40;
constexpr std::size_t kSearchDepth = 64;
constexpr std::size_t kBeamWidth = 256;

void merge_sorted(std::vector<Interval>& v) {
  std::sort(v.begin(), v.end());
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  v = std::move(out);
}

// Smallest gap from `inner` to the boundary of the piece containing it,
// negative when no piece contains it.
double containment_margin(const std::vector<Interval>& pieces, const Interval& inner, double& escaping) {
  double best = -std::numeric_limits<double>::infinity();
  escaping = inner.lo;
  for (const auto& p : pieces) {
    const double m = std::min(inner.lo - p.lo, p.hi - inner.hi);
    if (m > best) {
      best = m;
      escaping = (inner.lo - p.lo < p.hi - inner.hi) ? inner.lo : inner.hi;
    }
  }
  return best;
}

bool inside_interior(const Domain& outer, const Domain& inner) {
  for (State k = 0; k < inner.size(); ++k) {
    for (const auto& iv : inner[k]) {
      double esc = 0.0;
      if (!(containment_margin(outer[k], iv, esc) > kTrapTol)) return false;
    }
  }
  return true;
}

bool hull_contains(const Domain& outer, const Domain& inner) {
  for (State k = 0; k < outer.size(); ++k) {
    const Interval a = outer.hull(k), b = inner.hull(k);
    if (!(a.lo <= b.lo + kSnapTol && b.hi <= a.hi + kSnapTol)) return false;
  }
  return true;
}

bool hulls_overlap(const Domain& a, const Domain& b, State k) {
  const Interval x = a.hull(k), y = b.hull(k);
  return !(x.hi < y.lo || y.hi < x.lo);
}

bool domains_overlap(const Domain& a, const Domain& b) {
  for (State k = 0; k < a.size(); ++k)
    for (const auto& x : a[k])
      for (const auto& y : b[k])
        if (!(x.hi < y.lo || y.hi < x.lo)) return true;
  return false;
}

double snap(double x, const std::vector<double>& candidates) {
  for (double c : candidates)
    if (std::abs(c - x) <= kSnapTol) return c;
  return x;
}

// Interval hull of the orbit of (state, point) under all admissible maps.
Domain orbit_hull(const SkewSystem& system, State state, double point) {
  const int n = system.size();
  std::vector<std::optional<Interval>> cur(n);
  cur[state] = Interval{point, point};
  for (int it = 0; it < kHullIterationCap; ++it) {
    std::vector<std::optional<Interval>> next = cur;
    for (State k = 0; k < n; ++k) {
      if (!cur[k]) continue;
      const Interval img = map_interval(system.map(k), *cur[k]);
      for (State m : system.chain().successors(k)) {
        if (next[m]) {
          next[m]->lo = std::min(next[m]->lo, img.lo);
          next[m]->hi = std::max(next[m]->hi, img.hi);
        } else {
          next[m] = img;
        }
      }
    }
    bool settled = true;
    for (State k = 0; k < n; ++k) {
      if (!cur[k] || !next[k] || std::abs(next[k]->lo - cur[k]->lo) >= kHullMotion ||
          std::abs(next[k]->hi - cur[k]->hi) >= kHullMotion)
        settled = false;
    }
    cur = std::move(next);
    if (settled) {
      Domain d(n);
      for (State k = 0; k < n; ++k) d.add(k, *cur[k]);
      return d;
    }
  }
  throw Error(ErrorKind::convergence, "support hull iteration did not settle");
}

}  // namespace

Domain Domain::uniform(int n_states, Interval iv) {
  Domain d(n_states);
  for (State k = 0; k < n_states; ++k) d.add(k, iv);
  return d;
}

bool Domain::contains(State k, double x) const {
  return std::any_of(parts_[k].begin(), parts_[k].end(), [x](const Interval& iv) { return iv.contains(x); });
}

Interval Domain::hull(State k) const {
  if (parts_[k].empty()) throw Error(ErrorKind::precondition, "domain is empty at state " + std::to_string(k + 1));
  return {parts_[k].front().lo, parts_[k].back().hi};
}

double Domain::total_length() const {
  double s = 0.0;
  for (const auto& part : parts_)
    for (const auto& iv : part) s += iv.length();
  return s;
}

void Domain::add(State k, Interval iv) {
  if (!(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0))
    throw Error(ErrorKind::input, "interval [" + num(iv.lo) + ", " + num(iv.hi) + "] is not inside [0,1]");
  parts_[k].push_back(iv);
  merge_sorted(parts_[k]);
}

Domain Domain::fattened(double eps) const {
  Domain d(size());
  for (State k = 0; k < size(); ++k)
    for (const auto& iv : parts_[k]) d.add(k, {std::max(0.0, iv.lo - eps), std::min(1.0, iv.hi + eps)});
  return d;
}

Domain unite(const Domain& a, const Domain& b) {
  Domain d = a;
  for (State k = 0; k < b.size(); ++k)
    for (const auto& iv : b[k]) d.add(k, iv);
  return d;
}

Skeleton enumerate_skeleton(const MarkovChain& chain) {
  Skeleton sk;
  const int n = chain.size();
  std::vector<State> path;
  std::vector<bool> used(n, false);
  auto dfs = [&](auto&& self, State s) -> void {
    path.push_back(s);
    used[s] = true;
    sk.transitions.emplace_back(path);
    if (chain.admissible(s, path.front())) sk.returns.push_back(Word(path) + path.front());
    for (State t : chain.successors(s))
      if (!used[t]) self(self, t);
    used[s] = false;
    path.pop_back();
  };
  for (State s = 0; s < n; ++s) dfs(dfs, s);
  std::sort(sk.transitions.begin(), sk.transitions.end(), shortlex_less);
  std::sort(sk.returns.begin(), sk.returns.end(), shortlex_less);
  return sk;
}

std::vector<ReturnFixedPoints> return_fixed_points(const SkewSystem& system) {
  std::vector<ReturnFixedPoints> out;
  for (const auto& r : enumerate_skeleton(system.chain()).returns) out.push_back({r, fixed_points(path_map(system, r))});
  return out;
}

std::vector<double> endpoint_candidates(const SkewSystem& system, State state) {
  return endpoint_candidates(system, return_fixed_points(system), state);
}

std::vector<double> endpoint_candidates(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns,
                                        State state) {
  const Skeleton sk = enumerate_skeleton(system.chain());
  std::vector<double> out;
  for (const auto& r : returns) {
    for (const auto& p : r.points) {
      if (p.kind == FixedPointKind::parabolic) {
        throw Error(ErrorKind::genericity, "return " + r.word.str() + " has a parabolic fixed point at " +
                                               num(p.location) + " (multiplier " + num(p.multiplier) + ")");
      }
      if (p.kind != FixedPointKind::attracting) continue;
      for (const auto& t : sk.transitions) {
        if (t.front() != r.word.front() || t.back() != state) continue;
        out.push_back(path_map(system, t)(p.location));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= kTrapTol; }),
            out.end());
  return out;
}

Domain diffusion_step(const SkewSystem& system, const Domain& domain, double delta) {
  Domain out(system.size());
  for (State k = 0; k < system.size(); ++k) {
    for (const auto& iv : domain[k]) {
      Interval img = map_interval(system.map(k), iv);
      if (delta > 0.0) img = {std::max(0.0, img.lo - delta), std::min(1.0, img.hi + delta)};
      for (State m : system.chain().successors(k)) out.add(m, img);
    }
  }
  return out;
}

const char* to_string(TrappingKind kind) {
  switch (kind) {
    case TrappingKind::strict: return "strict";
    case TrappingKind::nonstrict: return "nonstrict";
    case TrappingKind::not_trapping: return "not_trapping";
  }
  return "?";
}

TrappingVerdict is_trapping(const SkewSystem& system, const Domain& domain) {
  TrappingVerdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (State k = 0; k < system.size(); ++k) {
    for (const auto& iv : domain[k]) {
      const Interval img = map_interval(system.map(k), iv);
      for (State m : system.chain().successors(k)) {
        double esc = img.lo;
        const double margin = containment_margin(domain[m], img, esc);
        if (margin < v.margin) {
          v.margin = margin;
          v.from = k;
          v.to = m;
          v.image = img;
          v.escaping = esc;
        }
      }
    }
  }
  if (v.margin > kTrapTol) {
    v.kind = TrappingKind::strict;
  } else if (v.margin >= -kTrapTol) {
    v.kind = TrappingKind::nonstrict;
  } else {
    v.kind = TrappingKind::not_trapping;
  }
  if (v.kind != TrappingKind::not_trapping) {
    v.from = v.to = -1;
    v.image = {};
    v.escaping = 0.0;
  }
  return v;
}

TrappingBuild build_trapping_domain(const SkewSystem& system, const Domain& seed, double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::parameter, "epsilon and delta must be positive");
  const int n = system.size();
  const Domain u = seed.fattened(epsilon);

  Domain dispersed = u, plain = u;
  Domain result = u, plain_union = u;
  for (int j = 1; j <= n; ++j) {
    dispersed = diffusion_step(system, dispersed, delta);
    plain = diffusion_step(system, plain);
    result = unite(result, dispersed);
    plain_union = unite(plain_union, plain);
  }
  TrappingBuild b;
  b.domain = result;
  b.verdict = is_trapping(system, result);
  b.inclusion_holds = inside_interior(plain_union, diffusion_step(system, plain));
  b.epsilon = epsilon;
  b.delta = delta;
  b.retry = b.verdict.kind != TrappingKind::strict;
  b.next_epsilon = b.retry ? epsilon / 2 : epsilon;
  b.next_delta = b.retry ? delta / 2 : delta;
  return b;
}

std::vector<Domain> support_hulls(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns) {
  const int n = system.size();
  std::vector<std::vector<double>> candidates(n);
  for (State k = 0; k < n; ++k) candidates[k] = endpoint_candidates(system, returns, k);

  std::vector<Domain> closures;
  for (const auto& r : returns) {
    for (const auto& p : r.points) {
      if (p.kind != FixedPointKind::attracting) continue;
      Domain raw = orbit_hull(system, r.word.front(), p.location);
      Domain d(n);
      for (State k = 0; k < n; ++k) {
        const Interval h = raw.hull(k);
        d.add(k, {snap(h.lo, candidates[k]), snap(h.hi, candidates[k])});
      }
      closures.push_back(std::move(d));
    }
  }

  std::vector<Domain> minimal;
  for (std::size_t i = 0; i < closures.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < closures.size() && keep; ++j) {
      if (i == j) continue;
      const bool inside = hull_contains(closures[i], closures[j]);
      const bool equal = inside && hull_contains(closures[j], closures[i]);
      if (inside && !equal) keep = false;        // strictly contains another closure
      if (equal && j < i) keep = false;           // duplicate
    }
    if (keep) minimal.push_back(closures[i]);
  }

  std::sort(minimal.begin(), minimal.end(), [](const Domain& a, const Domain& b) { return a.hull(0).lo < b.hull(0).lo; });
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    for (std::size_t j = i + 1; j < minimal.size(); ++j) {
      for (State k = 0; k < n; ++k) {
        if (hulls_overlap(minimal[i], minimal[j], k)) {
          throw Error(ErrorKind::genericity, "support hulls overlap without coinciding at state " +
                                                 std::to_string(k + 1));
        }
      }
    }
    if (i + 1 < minimal.size()) {
      for (State k = 0; k < n; ++k) {
        if (!(minimal[i].hull(k).hi < minimal[i + 1].hull(k).lo))
          throw Error(ErrorKind::structure, "support hulls are not vertically ordered at state " +
                                                std::to_string(k + 1));
      }
    }
  }
  return minimal;
}

std::vector<TrappingRegion> minimal_trapping_domains(const SkewSystem& system, double epsilon, double delta) {
  const auto returns = return_fixed_points(system);
  require_generic(check_genericity(system, returns));
  const auto hulls = support_hulls(system, returns);

  for (int attempt = 0; attempt < kFatteningRetries; ++attempt) {
    std::vector<TrappingRegion> out;
    bool ok = true;
    for (const auto& h : hulls) {
      const TrappingBuild b = build_trapping_domain(system, h, epsilon, delta);
      if (b.retry) {
        ok = false;
        break;
      }
      out.push_back({h, b.domain, b.verdict.margin, b.epsilon, b.delta, b.inclusion_holds});
    }
    for (std::size_t i = 0; ok && i + 1 < out.size(); ++i)
      if (domains_overlap(out[i].domain, out[i + 1].domain)) ok = false;
    if (ok) return out;
    epsilon /= 2;
    delta /= 2;
  }
  throw Error(ErrorKind::convergence, "no strictly trapping disjoint fattening found after halving " +
                                          std::to_string(kFatteningRetries) + " times");
}

Word monotone_subword(const SkewSystem& system, const Word& word, double x0) {
  if (word.empty() || !system.chain().admissible(word))
    throw Error(ErrorKind::input, "word '" + word.str() + "' is empty or inadmissible");
  std::vector<State> cur{word[0]};
  std::vector<double> pts{x0};  // pts[i] is the point sitting at state cur[i]
  for (std::size_t i = 1; i < word.size(); ++i) {
    const State s = word[i];
    const double next = system.map(cur.back())(pts.back());
    const auto last = std::find(cur.rbegin(), cur.rend(), s);
    if (last == cur.rend()) {
      cur.push_back(s);
      pts.push_back(next);
      continue;
    }
    const std::size_t pos = static_cast<std::size_t>(cur.rend() - last) - 1;
    if (next < pts[pos]) {
      cur.push_back(s);
      pts.push_back(next);
    } else {
      cur.resize(pos + 1);
      pts.resize(pos + 1);
    }
  }
  return Word(cur);
}

CountBound attractor_count_bound(const SkewSystem& system, int max_period) {
  if (max_period < 1) throw Error(ErrorKind::parameter, "max_period must be at least 1");
  const MarkovChain& chain = system.chain();
  std::vector<Word> cyclic;
  std::vector<State> path;
  auto dfs = [&](auto&& self) -> void {
    if (chain.admissible(path.back(), path.front())) cyclic.emplace_back(path);
    if (static_cast<int>(path.size()) == max_period) return;
    for (State t : chain.successors(path.back())) {
      path.push_back(t);
      self(self);
      path.pop_back();
    }
  };
  for (State s = 0; s < chain.size(); ++s) {
    path = {s};
    dfs(dfs);
  }
  std::sort(cyclic.begin(), cyclic.end(), shortlex_less);

  CountBound cb;
  cb.bound = std::numeric_limits<int>::max();
  for (const auto& w : cyclic) {
    const auto fps = fixed_points(compose_word(system, w));
    if (std::any_of(fps.begin(), fps.end(), [](const FixedPoint& p) { return p.kind == FixedPointKind::parabolic; })) {
      cb.warnings.push_back("word " + w.str() + " skipped: parabolic fixed point");
      continue;
    }
    const int count = static_cast<int>(
        std::count_if(fps.begin(), fps.end(), [](const FixedPoint& p) { return p.kind == FixedPointKind::attracting; }));
    if (count < cb.bound) {
      cb.bound = count;
      cb.witness = w;
    }
  }
  if (cb.witness.empty()) throw Error(ErrorKind::not_found, "every cyclic word has a parabolic fixed point");
  return cb;
}

Word find_squeezing_word(const SkewSystem& system, const Domain& hull, State from, State to, Endpoint target,
                         double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::parameter, "eps must be positive");
  const double goal = target == Endpoint::lower ? hull.hull(to).lo : hull.hull(to).hi;

  struct Node {
    std::vector<State> word;
    State state;
    Interval image;
    double score;
  };
  auto score = [goal](const Interval& iv) { return std::max(std::abs(iv.lo - goal), std::abs(iv.hi - goal)); };
  auto better = [](const Node& a, const Node& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
    return std::tie(a.word, a.state) < std::tie(b.word, b.state);
  };

  std::vector<Node> beam{{{}, from, hull.hull(from), score(hull.hull(from))}};
  for (std::size_t depth = 0; depth <= kSearchDepth; ++depth) {
    const Node* found = nullptr;
    for (const auto& nd : beam) {
      if (nd.state == to && nd.score < eps && (!found || nd.word < found->word)) found = &nd;
    }
    if (found) return Word(found->word);
    if (depth == kSearchDepth) break;

    std::vector<Node> next;
    for (const auto& nd : beam) {
      const Interval img = map_interval(system.map(nd.state), nd.image);
      for (State t : system.chain().successors(nd.state)) {
        Node child{nd.word, t, img, score(img)};
        child.word.push_back(nd.state);
        next.push_back(std::move(child));
      }
    }
    std::sort(next.begin(), next.end(), better);
    if (next.size() > kBeamWidth) next.resize(kBeamWidth);
    beam = std::move(next);
  }
  throw Error(ErrorKind::not_found, "no squeezing word within depth " + std::to_string(kSearchDepth) +
                                        " and beam " + std::to_string(kBeamWidth));
}

}  // namespace skewlab
