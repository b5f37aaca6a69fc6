#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "skewlab/cli.hpp"
#include "skewlab/config.hpp"
#include "skewlab/error.hpp"
#include "skewlab/format.hpp"
#include "skewlab/genericity.hpp"
#include "skewlab/measures.hpp"
#include "skewlab/twosided.hpp"

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

SystemConfig config(const std::string& name) { return load_config(std::string(SKEWLAB_CONFIG_DIR) + "/" + name); }

SkewSystem s1() { return config("s1.cfg").system(); }
SkewSystem s2() { return config("s2.cfg").system(); }

std::vector<double> orbit(const SkewSystem& s, const Word& w, double x0) {
  std::vector<double> xs{x0};
  for (std::size_t i = 0; i + 1 < w.size(); ++i) xs.push_back(s.map(w[i])(xs.back()));
  return xs;
}

bool downwards(const Word& w, const std::vector<double>& xs) {
  std::map<State, double> last;
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto it = last.find(w[i]);
    if (it != last.end() && !(xs[i] < it->second)) return false;
    last[w[i]] = xs[i];
  }
  return true;
}

std::set<Word> valid_rewrites(const SkewSystem& s, const Word& w, double x0) {
  std::set<Word> out;
  const double final_original = orbit(s, w, x0).back();
  const std::size_t n = w.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (!(mask & 1u)) continue;
    std::vector<State> sym;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) sym.push_back(w[i]);
    const Word v(sym);
    if (v.back() != w.back() || !s.chain().admissible(v)) continue;
    const auto xs = orbit(s, v, x0);
    if (downwards(v, xs) && xs.back() <= final_original) out.insert(v);
  }
  return out;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

Outcome endpoints() {
  const SkewSystem s = s1();
  const int bins = 2048;
  const WalkResult w = simulate_walk(s, 1000000, 1000, 7, bins);
  const double width = 1.0 / bins;
  double lo = 1.0, hi = 0.0;
  for (State k = 0; k < 2; ++k) {
    lo = std::min(lo, w.lowest[k]);
    hi = std::max(hi, w.highest[k]);
  }
  bool in_candidates = true;
  for (State k = 0; k < 2; ++k) {
    const auto c = endpoint_candidates(s, k);
    in_candidates = in_candidates && std::abs(w.lowest[k] - c.front()) < width && std::abs(w.highest[k] - c.back()) < width;
  }
  const double dlo = std::abs(lo - 1.0 / 12), dhi = std::abs(hi - 11.0 / 12);
  return {in_candidates && dlo < width && dhi < width,
          "min " + num(lo) + " (|d| " + num(dlo) + "), max " + num(hi) + " (|d| " + num(dhi) + "), bin " + num(width)};
}

Outcome exponents() {
  bool ok = true;
  std::string detail;
  double s1_lambda = 0.0;
  for (const auto& [name, sys] : {std::pair{"S1", s1()}, std::pair{"S2", s2()}}) {
    for (const auto& r : minimal_trapping_domains(sys, 0.01, 0.001)) {
      const StationaryResult st = power_iterate_stationary(sys, r.domain, 2048, 1e-10, 100000);
      const double l = lyapunov_exponent(sys, st.measure);
      ok = ok && l < 0.0;
      if (std::string(name) == "S1") s1_lambda = l;
      detail += std::string(name) + " " + num(l) + "; ";
    }
  }
  const double err = std::abs(s1_lambda - std::log(0.4));
  detail += "|S1 - log 0.4| = " + num(err);
  return {ok && err < 1e-9, detail};
}

Outcome trapping() {
  const SkewSystem s = s1();
  const TrappingBuild b = build_trapping_domain(s, Domain::uniform(2, {1.0 / 12, 11.0 / 12}), 0.01, 0.001);
  const bool ok = b.verdict.kind == TrappingKind::strict && b.verdict.margin > 0 && b.inclusion_holds &&
                  is_trapping(s, b.domain).kind == TrappingKind::strict;
  return {ok, std::string(to_string(b.verdict.kind)) + ", margin " + num(b.verdict.margin) + ", inclusion " +
                  (b.inclusion_holds ? "holds" : "fails")};
}

Outcome uniqueness() {
  const SystemConfig c = config("s1.cfg");
  const SkewSystem s = c.system();
  const Domain d = minimal_trapping_domains(s, c.analysis.epsilon, c.analysis.delta).front().domain;
  const int bins = 256;
  const StationaryResult st = power_iterate_stationary(s, d, bins, 1e-10, 100000);
  const WalkResult w = simulate_walk(s, 1000000, 1000, c.analysis.seed, bins, d);
  const double tv = total_variation(st.measure, w.measure);
  return {tv < 0.05 && st.tv_gap < 1e-10, "TV " + num(tv) + " at B = 256 (seed " + std::to_string(c.analysis.seed) +
                                              "), gap " + num(st.tv_gap) + " after " +
                                              std::to_string(st.iterations) + " iterations"};
}

Outcome alternation() {
  const auto run = [](const SystemConfig& c) {
    StripParams p;
    p.bins = c.analysis.bins;
    p.repeller_steps = c.analysis.repeller_steps;
    p.bone_samples = c.analysis.bone_samples;
    p.seed = c.analysis.seed;
    return strip_decomposition(c.system(), c.analysis.epsilon, c.analysis.delta, p);
  };
  const StripReport a = run(config("s1.cfg"));
  const StripReport b = run(config("s2.cfg"));
  const bool s1_ok = a.attractors == 1 && a.repellers == 0;
  const bool s2_ok = b.strips.size() == 3 && b.strips[0].kind == StripKind::attractor &&
                     b.strips[1].kind == StripKind::repeller && b.strips[2].kind == StripKind::attractor;
  const int bound1 = attractor_count_bound(s1(), 2).bound, bound2 = attractor_count_bound(s2(), 2).bound;
  return {s1_ok && s2_ok && bound1 == a.attractors && bound2 == b.attractors,
          "S1: " + a.summary() + " (bound " + std::to_string(bound1) + "); S2: " + b.summary() + " (bound " +
              std::to_string(bound2) + ")"};
}

Outcome bones() {
  const BoneScan b = bone_scan(s1(), Domain::uniform(2, {1.0 / 12, 11.0 / 12}), 20, 10000, 1e-6, 7);
  const double rel = std::abs(b.slope - std::log(0.4)) / std::abs(std::log(0.4));
  return {b.fraction_above == 0.0 && rel < 0.05,
          "fraction " + num(b.fraction_above) + ", slope " + num(b.slope) + " (rel err " + num(rel) + ")"};
}

Outcome baxendale() {
  const BaxendaleReport r = baxendale_check(s1(), 0.05, 4096, 1e-10);
  return {r.both_negative && r.relative_gap < 0.10,
          "lhs " + num(r.lhs) + ", rhs " + num(r.rhs) + ", gap " + num(r.relative_gap)};
}

Outcome genericity() {
  const GenericityReport a = check_genericity(s1());
  const GenericityReport b = check_genericity(config("s3.cfg").system());
  const GenericityReport c = check_genericity(config("mobius_parabolic.cfg").system());
  const bool witness = b.invariant_tuple && b.invariant_tuple->size() == 2 &&
                       std::abs((*b.invariant_tuple)[0] - 0.5) < 1e-12 &&
                       std::abs((*b.invariant_tuple)[1] - 0.5) < 1e-12;
  const bool ok = a.generic() && !b.condition3 && witness && !c.condition1 && !c.parabolic.empty();
  return {ok, "S1: " + a.summary() + "; S3: " + b.summary() + "; Moebius: " + c.summary()};
}

Outcome subwords() {
  const SkewSystem s = s1();
  Rng rng(2024);
  int failures = 0, oracle_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    const Word w = sample_path(s.chain(), len, std::nullopt, rng);
    const double x0 = rng.uniform();
    const Word v = monotone_subword(s, w, x0);
    const auto xs = orbit(s, v, x0);
    bool ok = !v.empty() && s.chain().admissible(v) && v.front() == w.front() && v.back() == w.back() &&
              downwards(v, xs) && xs.back() <= orbit(s, w, x0).back();
    if (len <= 5) {
      ++oracle_checked;
      ok = ok && valid_rewrites(s, w, x0).contains(v);
    }
    failures += !ok;
  }
  return {failures == 0, std::to_string(failures) + " failures in 1000 words, " + std::to_string(oracle_checked) +
                             " checked against the rewrite oracle"};
}

Outcome unrolling() {
  const MultistepSystem m = config("multistep.cfg").multistep_system();
  const UnrolledSystem u = multistep_to_step(m);
  const Word drive = sample_path(m.chain, 101, std::nullopt, std::uint64_t{99});
  double x = 0.42, y = 0.42;
  bool same = true;
  for (std::size_t t = 0; t + 1 < drive.size(); ++t) {
    const Word window{drive[t], drive[t + 1]};
    for (const auto& [w, f] : m.window_maps)
      if (w == window) x = f(x);
    const auto st = std::find(u.windows.begin(), u.windows.end(), window) - u.windows.begin();
    y = u.system.map(static_cast<State>(st))(y);
    same = same && x == y;
  }
  const bool transitive = is_transitive(u.system.chain().adjacency());
  return {u.system.size() == 4 && same && transitive,
          std::to_string(u.system.size()) + " states, orbits " + (same ? "identical" : "differ") + ", transitive " +
              (transitive ? "yes" : "no")};
}

Outcome srb() {
  const SystemConfig c = config("s1.cfg");
  const SkewSystem s = c.system();
  const Domain d = minimal_trapping_domains(s, 0.01, 0.001).front().domain;
  const StationaryResult st = power_iterate_stationary(s, d, 2048, 1e-10, 100000);
  const SrbReport r = srb_check(s, st.measure, d, 20, 100000, c.analysis.seed);
  double dev = 0.0;
  for (double t : r.time_averages) dev = std::max(dev, std::abs(t - 0.5));
  return {r.time_averages.size() == 20 && dev < 0.01,
          "space average " + num(r.space_average) + ", max |time avg - 0.5| " + num(dev)};
}

Outcome determinism() {
  SystemConfig c = config("s1.cfg");
  Overrides o;
  o.seed = 7;
  apply_overrides(c, o);
  std::vector<std::map<std::string, std::string>> runs;
  for (int workers : {1, 1, 4}) {
    c.analysis.workers = workers;
    const fs::path dir = fs::temp_directory_path() / ("skewlab_accept_" + std::to_string(runs.size()));
    fs::remove_all(dir);
    c.output.directory = dir.string();
    std::ostringstream out, err;
    if (run_analysis(c, "decompose", out, err) != 0) return {false, err.str()};
    runs.push_back(csv_files(dir));
  }
  const bool ok = !runs[0].empty() && runs[0] == runs[1] && runs[0] == runs[2];
  return {ok, std::to_string(runs[0].size()) + " CSV files compared over 3 runs (workers 1, 1, 4)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"endpoint characterization", endpoints}, {"negative exponents", exponents},
      {"trapping construction", trapping},      {"uniqueness cross-oracle", uniqueness},
      {"alternation and counting", alternation}, {"bony-graph decay", bones},
      {"Baxendale identity", baxendale},        {"genericity gate", genericity},
      {"monotone subword", subwords},           {"multistep unrolling", unrolling},
      {"SRB time averages", srb},               {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !r.pass;
    std::ostringstream t;
    t.precision(3);
    t << std::fixed << secs;
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << r.detail << " ["
              << t.str() << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
