#include "skewlab/twosided.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

namespace {

// Pullback lengths below this are rounding noise around a fiber point.
constexpr double kResolvableLength = 1e-13;

double safe_log(double x) { return std::log(std::max(x, std::numeric_limits<double>::min())); }

double regression_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i + 1);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string plural(int n, const char* word) { return std::to_string(n) + " " + word + (n == 1 ? "" : "s"); }

}  // namespace

Interval pullback_fiber(const SkewSystem& system, const Domain& domain, const Word& past, State arrival) {
  if (past.empty()) return domain.hull(arrival);
  if (!system.chain().admissible(past + arrival))
    throw Error(ErrorKind::input, "past '" + past.str() + "' does not lead admissibly into state " +
                                      std::to_string(arrival + 1));
  Interval iv = domain.hull(past.front());
  for (State s : past) iv = map_interval(system.map(s), iv);
  return iv;
}

std::string BoneScan::csv() const {
  std::ostringstream os;
  os << "past_word,state,left,right,length\n";
  for (std::size_t i = 0; i < intervals.size(); ++i)
    os << pasts[i].str() << ',' << arrivals[i] + 1 << ',' << num(intervals[i].lo) << ',' << num(intervals[i].hi) << ','
       << num(intervals[i].length()) << '\n';
  return os.str();
}

BoneScan bone_scan(const SkewSystem& system, const Domain& domain, int depth, int samples, double threshold,
                   std::uint64_t seed, int workers) {
  if (depth < 1 || samples < 1) throw Error(ErrorKind::input, "bone scan needs depth >= 1 and samples >= 1");
  const MarkovChain reversed = reverse_chain(system.chain());
  const Rng root(seed);
  const auto d = static_cast<std::size_t>(depth);

  BoneScan scan;
  scan.depth = depth;
  scan.threshold = threshold;
  scan.pasts.resize(static_cast<std::size_t>(samples));
  scan.arrivals.resize(static_cast<std::size_t>(samples));
  scan.intervals.resize(static_cast<std::size_t>(samples));
  std::vector<std::vector<double>> lengths(static_cast<std::size_t>(samples), std::vector<double>(d));

  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    const State arrival = rng.categorical(system.chain().stationary());
    // Reversed path arrival, w_{-1}, ..., w_{-n}.
    const Word back = sample_path(reversed, d + 1, arrival, rng);
    std::vector<State> past(back.begin() + 1, back.end());
    std::reverse(past.begin(), past.end());
    for (std::size_t k = 1; k <= d; ++k) {
      const Word tail(std::vector<State>(past.end() - static_cast<std::ptrdiff_t>(k), past.end()));
      lengths[i][k - 1] = pullback_fiber(system, domain, tail, arrival).length();
    }
    scan.pasts[i] = Word(past);
    scan.arrivals[i] = arrival;
    scan.intervals[i] = pullback_fiber(system, domain, scan.pasts[i], arrival);
  });

  scan.fraction_by_depth.assign(d, 0.0);
  scan.mean_log_length.assign(d, 0.0);
  std::size_t resolved = d;
  for (const auto& row : lengths) {
    for (std::size_t k = 0; k < d; ++k) {
      if (row[k] > threshold) scan.fraction_by_depth[k] += 1.0;
      scan.mean_log_length[k] += safe_log(row[k]);
      if (!(row[k] > kResolvableLength)) resolved = std::min(resolved, k);
    }
  }
  scan.resolved_depth = static_cast<int>(resolved);
  for (std::size_t k = 0; k < d; ++k) {
    scan.fraction_by_depth[k] /= samples;
    scan.mean_log_length[k] /= samples;
  }
  scan.fraction_above = scan.fraction_by_depth.back();
  scan.slope = regression_slope({scan.mean_log_length.begin(), scan.mean_log_length.begin() + resolved});
  return scan;
}

double StepGraph::at(const Word& past) const {
  const auto it = std::find_if(values.begin(), values.end(), [&](const auto& v) { return v.first == past; });
  if (it == values.end()) throw Error(ErrorKind::input, "no step-graph value over past '" + past.str() + "'");
  return it->second;
}

StepGraph iterate_step_graph(const SkewSystem& system, const std::vector<double>& constants, std::size_t n) {
  const MarkovChain& chain = system.chain();
  if (static_cast<int>(constants.size()) != chain.size())
    throw Error(ErrorKind::input, "need one constant per state");
  bool up = true, down = true;
  for (State i = 0; i < chain.size(); ++i) {
    for (State j : chain.successors(i)) {
      const double moved = system.map(i)(constants[i]);
      up = up && moved > constants[j];
      down = down && moved < constants[j];
    }
  }
  if (!up && !down) throw Error(ErrorKind::precondition, "initial step graph does not drift up or down");

  StepGraph g;
  g.depth = n;
  g.drifts_up = up;
  if (n == 0) {
    for (State s = 0; s < chain.size(); ++s) g.values.emplace_back(Word{s}, constants[s]);
    return g;
  }
  for (const auto& past : admissible_words(chain, n)) {
    double x = constants[past.front()];
    for (State s : past) x = system.map(s)(x);
    g.values.emplace_back(past, x);
  }
  return g;
}

RepellerResult repeller_analysis(const SkewSystem& system, const Domain& gap, std::size_t steps, std::uint64_t seed,
                                 int bins) {
  if (steps == 0) throw Error(ErrorKind::input, "repeller walk needs steps >= 1");
  const int n = system.size();
  const MarkovChain reversed = reverse_chain(system.chain());
  Rng rng(seed);
  const std::size_t burn = steps / 10;
  const std::size_t budget = 20 * steps;

  RepellerResult res;
  res.measure = EmpiricalMeasure(n, bins);
  res.lowest.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  res.highest = res.lowest;

  std::vector<double> weights(static_cast<std::size_t>(n));
  for (State k = 0; k < n; ++k) weights[k] = gap.empty(k) ? 0.0 : system.chain().stationary(k);
  auto open_gap = [&](State k, double y) {
    if (gap.empty(k)) return false;
    const Interval h = gap.hull(k);
    return h.lo < y && y < h.hi;
  };
  State j = 0;
  double y = 0.0;
  std::size_t run = 0;
  auto restart = [&] {
    j = rng.categorical(weights);
    const Interval h = gap.hull(j);
    y = rng.uniform(h.lo, h.hi);
    run = 0;
  };
  restart();

  double log_sum = 0.0;
  for (std::size_t it = 0; it < budget && res.samples < steps; ++it) {
    const State i = rng.categorical(reversed.transition_matrix()[j]);
    const FiberMap& f = system.map(i);
    const Interval img = f.image();
    if (!(img.lo <= y && y <= img.hi)) {
      ++res.rejections;
      restart();
      continue;
    }
    const double x = f.inverse(y);
    if (!open_gap(i, x)) {
      ++res.rejections;
      restart();
      continue;
    }
    j = i;
    y = x;
    if (++run <= burn) continue;
    res.measure[i][res.measure.bin_of(x)] += 1.0;
    res.lowest[i] = std::isnan(res.lowest[i]) ? x : std::min(res.lowest[i], x);
    res.highest[i] = std::isnan(res.highest[i]) ? x : std::max(res.highest[i], x);
    log_sum += std::log(f.derivative(x));
    ++res.samples;
  }
  if (res.samples == 0)
    throw Error(ErrorKind::structure, "every reversed orbit left the gap: no repeller found between the domains");
  res.measure.normalize();
  res.lyapunov = log_sum / static_cast<double>(res.samples);
  return res;
}

StripReport strip_decomposition(const SkewSystem& system, double epsilon, double delta, const StripParams& params) {
  const int n = system.size();
  const auto regions = minimal_trapping_domains(system, epsilon, delta);
  const Rng root(params.seed);

  std::vector<Strip> attractors(regions.size());
  parallel_for(regions.size(), params.workers, [&](std::size_t a) {
    Strip& s = attractors[a];
    s.kind = StripKind::attractor;
    s.domain = regions[a].domain;
    s.hull = regions[a].hull;
    s.measure = power_iterate_stationary(system, s.domain, params.bins, params.power_tol, params.max_iter).measure;
    s.lyapunov = lyapunov_exponent(system, s.measure);
    s.bones = bone_scan(system, s.hull, params.bone_depth, params.bone_samples, params.bone_threshold,
                        root.split(200 + a).seed());
  });

  StripReport rep;
  for (std::size_t a = 0; a < attractors.size(); ++a) {
    if (!(attractors[a].lyapunov < 0.0))
      throw Error(ErrorKind::structure, "attractor " + std::to_string(a + 1) + " has exponent " +
                                            num(attractors[a].lyapunov) + " >= 0");
    rep.strips.push_back(std::move(attractors[a]));
    ++rep.attractors;
    if (a + 1 == regions.size()) break;

    Domain gap(n);
    for (State k = 0; k < n; ++k) gap.add(k, {regions[a].domain.hull(k).hi, regions[a + 1].domain.hull(k).lo});
    RepellerResult r = repeller_analysis(system, gap, params.repeller_steps, root.split(100 + a).seed(), params.bins);
    for (State k = 0; k < n; ++k) {
      if (std::isnan(r.lowest[k])) continue;
      if (!(r.lowest[k] > regions[a].domain.hull(k).hi && r.highest[k] < regions[a + 1].domain.hull(k).lo))
        throw Error(ErrorKind::structure, "repeller " + std::to_string(a + 1) + " is not between its attractors");
    }
    if (!(r.lyapunov > 0.0))
      throw Error(ErrorKind::structure, "repeller " + std::to_string(a + 1) + " has forward exponent " +
                                            num(r.lyapunov) + " <= 0");
    Strip s;
    s.kind = StripKind::repeller;
    s.domain = gap;
    s.measure = std::move(r.measure);
    s.lyapunov = r.lyapunov;
    s.rejections = r.rejections;
    rep.strips.push_back(std::move(s));
    ++rep.repellers;
  }

  rep.count = attractor_count_bound(system, params.max_period);
  if (rep.count.bound < rep.attractors)
    throw Error(ErrorKind::structure, "attractor count bound " + std::to_string(rep.count.bound) + " below the " +
                                          std::to_string(rep.attractors) + " attractors found");
  rep.count_matches = rep.count.bound == rep.attractors;
  return rep;
}

std::string StripReport::summary() const {
  std::string lams;
  for (const auto& s : strips) {
    if (s.kind != StripKind::attractor) continue;
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << s.lyapunov;
    lams += (lams.empty() ? "" : ", ") + os.str();
  }
  return plural(attractors, "attractor") + ", " + plural(repellers, "repeller") + ", λ = " + lams;
}

std::string StripReport::text() const {
  std::ostringstream os;
  os << "attractors: " << attractors << "\n"
     << "repellers: " << repellers << "\n"
     << "count_bound: " << count.bound << "\n"
     << "count_witness: " << count.witness.str() << "\n"
     << "count_matches: " << (count_matches ? "yes" : "no") << "\n";
  for (const auto& w : count.warnings) os << "warning: " << w << "\n";
  int a = 0, r = 0;
  for (const auto& s : strips) {
    const bool att = s.kind == StripKind::attractor;
    const std::string name = att ? "A" + std::to_string(++a) : "R" + std::to_string(++r);
    os << name << ".lyapunov: " << num(s.lyapunov) << "\n";
    for (State k = 0; k < s.domain.size(); ++k) {
      const Interval h = s.domain.hull(k);
      os << name << ".state" << k + 1 << ": [" << num(h.lo) << ", " << num(h.hi) << "]\n";
    }
    if (att) {
      os << name << ".bone_fraction: " << num(s.bones.fraction_above) << "\n"
         << name << ".bone_slope: " << num(s.bones.slope) << "\n"
         << name << ".bone_resolved_depth: " << s.bones.resolved_depth << "\n";
    } else {
      os << name << ".rejections: " << s.rejections << "\n";
    }
  }
  return os.str();
}

std::string StripReport::domains_csv() const {
  std::ostringstream os;
  os << "strip,kind,state,interval_index,left,right\n";
  for (std::size_t i = 0; i < strips.size(); ++i) {
    const auto& s = strips[i];
    for (State k = 0; k < s.domain.size(); ++k)
      for (std::size_t j = 0; j < s.domain[k].size(); ++j)
        os << i + 1 << ',' << (s.kind == StripKind::attractor ? "attractor" : "repeller") << ',' << k + 1 << ','
           << j + 1 << ',' << num(s.domain[k][j].lo) << ',' << num(s.domain[k][j].hi) << '\n';
  }
  return os.str();
}

UnrolledSystem multistep_to_step(const MultistepSystem& ms) {
  if (ms.back < 0 || ms.ahead < 0) throw Error(ErrorKind::input, "memory window bounds must be nonnegative");
  const MarkovChain& chain = ms.chain;
  const auto len = static_cast<std::size_t>(ms.back + ms.ahead + 1);
  const std::vector<Word> windows = admissible_words(chain, len);

  std::map<Word, const FiberMap*> maps;
  for (const auto& [w, f] : ms.window_maps) {
    if (w.size() != len) throw Error(ErrorKind::input, "window '" + w.str() + "' has the wrong length");
    if (!chain.admissible(w)) throw Error(ErrorKind::input, "map given for inadmissible window '" + w.str() + "'");
    if (!maps.emplace(w, &f).second) throw Error(ErrorKind::input, "window '" + w.str() + "' given twice");
  }

  const std::size_t m = windows.size();
  BoolMatrix adj(m, std::vector<int>(m, 0));
  Matrix pi(m, std::vector<double>(m, 0.0));
  std::vector<FiberMap> fmaps;
  for (std::size_t u = 0; u < m; ++u) {
    const auto it = maps.find(windows[u]);
    if (it == maps.end()) throw Error(ErrorKind::input, "no map for window '" + windows[u].str() + "'");
    fmaps.push_back(*it->second);
    for (std::size_t v = 0; v < m; ++v) {
      if (!std::equal(windows[u].begin() + 1, windows[u].end(), windows[v].begin())) continue;
      if (!chain.admissible(windows[u].back(), windows[v].back())) continue;
      adj[u][v] = 1;
      pi[u][v] = chain.transition(windows[u].back(), windows[v].back());
    }
  }
  return {SkewSystem(MarkovChain(adj, pi), std::move(fmaps)), windows};
}

}  // namespace skewlab
