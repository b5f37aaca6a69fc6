#include "skewlab/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"

namespace skewlab {

namespace {

std::string tuple_str(const std::vector<double>& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + num(a[i]);
  return s + ")";
}

}  // namespace

GenericityReport check_genericity(const SkewSystem& system, double tol) {
  return check_genericity(system, return_fixed_points(system), tol);
}

GenericityReport check_genericity(const SkewSystem& system, const std::vector<ReturnFixedPoints>& returns, double tol) {
  const MarkovChain& chain = system.chain();
  const Skeleton sk = enumerate_skeleton(chain);
  constexpr double inf = std::numeric_limits<double>::infinity();

  GenericityReport rep;
  rep.tolerance = tol;

  // 1: hyperbolic returns.
  rep.margin1 = inf;
  for (const auto& r : returns) {
    for (const auto& p : r.points) {
      const double gap = std::abs(p.multiplier - 1.0);
      rep.margin1 = std::min(rep.margin1, gap);
      if (gap <= tol || p.suspected) rep.parabolic.push_back({r.word, p});
    }
  }
  rep.condition1 = rep.parabolic.empty();

  // 2: no transition carries a sink of a return onto a source of a return, or back.
  rep.margin2 = inf;
  for (const auto& src : returns) {
    for (const auto& p : src.points) {
      if (p.kind == FixedPointKind::parabolic) continue;
      for (const auto& t : sk.transitions) {
        if (t.front() != src.word.front()) continue;
        const double image = path_map(system, t)(p.location);
        for (const auto& dst : returns) {
          if (dst.word.front() != t.back()) continue;
          for (const auto& q : dst.points) {
            if (q.kind == FixedPointKind::parabolic || q.kind == p.kind) continue;
            const double d = std::abs(image - q.location);
            rep.margin2 = std::min(rep.margin2, d);
            if (d <= tol)
              rep.carried.push_back({src.word, p.location, t, dst.word, q.location,
                                     p.kind == FixedPointKind::attracting});
          }
        }
      }
    }
  }
  rep.condition2 = rep.carried.empty();

  // 3: no point tuple with f_i(a_i) = a_j on every admissible edge. Such a
  // tuple has a_1 fixed by every return through state 1.
  rep.margin3 = inf;
  const auto cycle = std::find_if(returns.begin(), returns.end(), [](const auto& r) { return r.word.front() == 0; });
  if (cycle != returns.end()) {
    for (const auto& p : cycle->points) {
      std::vector<double> a(chain.size(), std::numeric_limits<double>::quiet_NaN());
      std::vector<bool> seen(chain.size(), false);
      a[0] = p.location;
      seen[0] = true;
      std::deque<State> queue{0};
      while (!queue.empty()) {
        const State i = queue.front();
        queue.pop_front();
        for (State j : chain.successors(i)) {
          if (seen[j]) continue;
          seen[j] = true;
          a[j] = system.map(i)(a[i]);
          queue.push_back(j);
        }
      }
      double worst = 0.0;
      for (State i = 0; i < chain.size(); ++i)
        for (State j : chain.successors(i)) worst = std::max(worst, std::abs(system.map(i)(a[i]) - a[j]));
      rep.margin3 = std::min(rep.margin3, worst);
      if (worst <= tol && !rep.invariant_tuple) rep.invariant_tuple = a;
    }
  }
  rep.condition3 = !rep.invariant_tuple.has_value();
  return rep;
}

std::string GenericityReport::summary() const {
  if (!condition1) {
    const auto& w = parabolic.front();
    return "condition 1 FAILED, witness return " + w.word.str() + " at x=" + num(w.point.location) +
           " multiplier=" + num(w.point.multiplier);
  }
  if (!condition2) {
    const auto& w = carried.front();
    return "condition 2 FAILED, witness " + num(w.source) + " (return " + w.source_return.str() + ") -> " +
           num(w.target) + " (return " + w.target_return.str() + ") by transition " + w.transition.str();
  }
  if (!condition3) return "condition 3 FAILED, witness a=" + tuple_str(*invariant_tuple);
  return "all genericity conditions pass";
}

std::string GenericityReport::text() const {
  std::ostringstream os;
  auto verdict = [](bool ok) { return ok ? "pass" : "FAIL"; };
  os << "tolerance: " << num(tolerance) << "\n";
  os << "condition1: " << verdict(condition1) << "\n";
  os << "condition1_margin: " << num(margin1) << "\n";
  for (const auto& w : parabolic)
    os << "condition1_witness: return=" << w.word.str() << " x=" << num(w.point.location)
       << " multiplier=" << num(w.point.multiplier) << (w.point.suspected ? " suspected" : "") << "\n";
  os << "condition2: " << verdict(condition2) << "\n";
  os << "condition2_margin: " << num(margin2) << "\n";
  for (const auto& w : carried)
    os << "condition2_witness: " << (w.attracting_to_repelling ? "attracting->repelling" : "repelling->attracting")
       << " source=" << num(w.source) << " return=" << w.source_return.str() << " transition=" << w.transition.str()
       << " target=" << num(w.target) << " return=" << w.target_return.str() << "\n";
  os << "condition3: " << verdict(condition3) << "\n";
  os << "condition3_margin: " << num(margin3) << "\n";
  if (invariant_tuple) os << "condition3_witness: a=" << tuple_str(*invariant_tuple) << "\n";
  os << "generic: " << (generic() ? "yes" : "no") << "\n";
  return os.str();
}

void require_generic(const GenericityReport& report) {
  if (!report.generic()) throw Error(ErrorKind::genericity, report.summary());
}

}  // namespace skewlab
