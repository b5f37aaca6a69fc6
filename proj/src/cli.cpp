#include "skewlab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"
#include "skewlab/genericity.hpp"

namespace skewlab {

namespace {

class Artifacts {
 public:
  Artifacts(const OutputConfig& cfg) : dir_(cfg.directory), formats_(cfg.formats) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) const {
    const std::string ext = std::filesystem::path(name).extension().string().substr(1);
    if (std::find(formats_.begin(), formats_.end(), ext) == formats_.end()) return;
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::io, "cannot write '" + (dir_ / name).string() + "'");
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> formats_;
};

std::string domain_csv(const Domain& d) {
  std::ostringstream os;
  os << "state,interval_index,left,right\n";
  for (State k = 0; k < d.size(); ++k)
    for (std::size_t j = 0; j < d[k].size(); ++j)
      os << k + 1 << ',' << j + 1 << ',' << num(d[k][j].lo) << ',' << num(d[k][j].hi) << '\n';
  return os.str();
}

std::string short_num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::vector<TrappingRegion> regions_for(const SkewSystem& sys, const AnalysisConfig& a) {
  return minimal_trapping_domains(sys, a.epsilon, a.delta);
}

int cmd_genericity(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  const GenericityReport rep = check_genericity(sys, a.tolerance);
  art.write("genericity.txt", rep.text());
  out << rep.summary() << "\n";
  return rep.generic() ? 0 : 2;
}

int cmd_skeleton(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  const Skeleton sk = enumerate_skeleton(sys.chain());
  std::ostringstream os;
  os << "transitions:";
  for (const auto& w : sk.transitions) os << ' ' << w.str();
  os << "\nreturns:";
  for (const auto& w : sk.returns) os << ' ' << w.str();
  os << "\n";
  const auto returns = return_fixed_points(sys);
  for (const auto& r : returns)
    for (const auto& p : r.points)
      os << "return " << r.word.str() << ": x=" << num(p.location) << " multiplier=" << num(p.multiplier) << ' '
         << to_string(p.kind) << "\n";
  for (State k = 0; k < sys.size(); ++k) {
    os << "candidates state " << k + 1 << ":";
    for (double c : endpoint_candidates(sys, returns, k)) os << ' ' << num(c);
    os << "\n";
  }
  const auto regions = regions_for(sys, a);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    os << "domain " << i + 1 << ": margin=" << num(r.margin) << " epsilon=" << num(r.epsilon)
       << " delta=" << num(r.delta) << " inclusion=" << (r.inclusion_holds ? "holds" : "fails") << "\n";
    art.write("domain_" + std::to_string(i + 1) + ".csv", domain_csv(r.domain));
    art.write("hull_" + std::to_string(i + 1) + ".csv", domain_csv(r.hull));
  }
  art.write("skeleton.txt", os.str());
  out << sk.transitions.size() << " simple transitions, " << sk.returns.size() << " simple returns, "
      << regions.size() << " trapping domain" << (regions.size() == 1 ? "" : "s") << "\n";
  return 0;
}

int cmd_walk(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  const auto regions = regions_for(sys, a);
  const Rng root(a.seed);
  std::ostringstream os;
  out << regions.size() << " walk" << (regions.size() == 1 ? "" : "s") << ", λ =";
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const WalkResult w = simulate_walk(sys, a.walk_steps, a.burn_in, root.split(i).seed(), a.bins, regions[i].domain);
    art.write("walk_" + std::to_string(i + 1) + ".csv", w.measure.csv());
    const double lam = lyapunov_exponent(sys, w.measure);
    os << "walk " << i + 1 << ": samples=" << w.samples << " lyapunov_bins=" << num(lam)
       << " lyapunov_orbit=" << num(w.lyapunov) << "\n";
    for (State k = 0; k < sys.size(); ++k)
      os << "walk " << i + 1 << " state " << k + 1 << ": min=" << num(w.lowest[k]) << " max=" << num(w.highest[k])
         << "\n";
    out << (i ? ", " : " ") << short_num(w.lyapunov);
  }
  out << "\n";
  art.write("walk.txt", os.str());
  return 0;
}

int cmd_stationary(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  const auto regions = regions_for(sys, a);
  std::ostringstream os;
  out << regions.size() << " stationary measure" << (regions.size() == 1 ? "" : "s") << ", λ =";
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const StationaryResult r = power_iterate_stationary(sys, regions[i].domain, a.bins, a.power_tol, a.max_iter);
    art.write("stationary_" + std::to_string(i + 1) + ".csv", r.measure.csv());
    const double lam = lyapunov_exponent(sys, r.measure);
    os << "measure " << i + 1 << ": iterations=" << r.iterations << " tv_gap=" << num(r.tv_gap)
       << " lyapunov=" << num(lam) << "\n";
    out << (i ? ", " : " ") << short_num(lam);
  }
  out << "\n";
  art.write("stationary.txt", os.str());
  return 0;
}

int cmd_decompose(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  StripParams p;
  p.bins = a.bins;
  p.power_tol = a.power_tol;
  p.max_iter = a.max_iter;
  p.repeller_steps = a.repeller_steps;
  p.bone_depth = a.bone_depth;
  p.bone_samples = a.bone_samples;
  p.bone_threshold = a.bone_threshold;
  p.max_period = a.max_period;
  p.seed = a.seed;
  p.workers = a.workers;
  const StripReport rep = strip_decomposition(sys, a.epsilon, a.delta, p);
  art.write("strips.txt", rep.text());
  art.write("strips.csv", rep.domains_csv());
  for (std::size_t i = 0; i < rep.strips.size(); ++i) {
    art.write("strip_" + std::to_string(i + 1) + "_measure.csv", rep.strips[i].measure.csv());
    if (rep.strips[i].kind == StripKind::attractor)
      art.write("strip_" + std::to_string(i + 1) + "_bones.csv", rep.strips[i].bones.csv());
  }
  out << rep.summary() << "\n";
  return 0;
}

int cmd_baxendale(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  std::string text;
  for (std::size_t i = 0; i < a.baxendale_epsilons.size(); ++i) {
    const double eps = a.baxendale_epsilons[i];
    const BaxendaleReport rep = baxendale_check(sys, eps, a.baxendale_bins, a.power_tol, a.max_iter);
    text += rep.text() + "\n";
    out << "ε = " << eps << ": exponent " << short_num(rep.lhs) << ", entropy side " << short_num(rep.rhs)
        << ", gap " << short_num(100.0 * rep.relative_gap) << "%, " << rep.verdict << "\n";
  }
  art.write("baxendale.txt", text);
  return 0;
}

int cmd_pullback(const SkewSystem& sys, const AnalysisConfig& a, const Artifacts& art, std::ostream& out) {
  const auto regions = regions_for(sys, a);
  const Rng root(a.seed);
  std::ostringstream os;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const BoneScan s = bone_scan(sys, regions[i].hull, a.bone_depth, a.bone_samples, a.bone_threshold,
                                 root.split(i).seed(), a.workers);
    art.write("pullback_" + std::to_string(i + 1) + ".csv", s.csv());
    os << "scan " << i + 1 << ": fraction_above=" << num(s.fraction_above) << " slope=" << num(s.slope)
       << " resolved_depth=" << s.resolved_depth << "\n";
    for (std::size_t d = 0; d < s.mean_log_length.size(); ++d)
      os << "scan " << i + 1 << " depth " << d + 1 << ": fraction=" << num(s.fraction_by_depth[d])
         << " mean_log_length=" << num(s.mean_log_length[d]) << "\n";
    out << "domain " << i + 1 << ": fraction above " << a.bone_threshold << " at depth " << a.bone_depth << " = "
        << s.fraction_above << ", slope " << short_num(s.slope) << "\n";
  }
  art.write("pullback.txt", os.str());
  return 0;
}

int cmd_unroll(const SystemConfig& cfg, const Artifacts& art, std::ostream& out) {
  const SystemConfig step = unrolled_config(cfg);
  const std::string text = emit_config(step);
  (void)parse_config(text, "unrolled.cfg");
  std::ofstream f(std::filesystem::path(cfg.output.directory) / "unrolled.cfg", std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorKind::io, "cannot write unrolled.cfg");
  (void)art;
  out << "unrolled " << cfg.n_states << "-state system with memory (" << cfg.back << ", " << cfg.ahead << ") to "
      << step.n_states << " states\n";
  return 0;
}

}  // namespace

void apply_overrides(SystemConfig& config, const Overrides& o) {
  if (o.out) config.output.directory = *o.out;
  if (o.seed) config.analysis.seed = *o.seed;
  if (o.bins) config.analysis.bins = *o.bins;
  if (o.steps) config.analysis.walk_steps = *o.steps;
  if (o.workers) config.analysis.workers = *o.workers;
  if (config.analysis.bins < 64) throw Error(ErrorKind::input, "--bins must be at least 64");
  if (config.analysis.walk_steps <= config.analysis.burn_in) throw Error(ErrorKind::input, "--steps must exceed burn_in");
  if (config.analysis.workers < 1) throw Error(ErrorKind::input, "--workers must be at least 1");
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"genericity", "skeleton", "walk",     "stationary",
                                              "decompose",  "baxendale", "pullback", "unroll"};
  return names;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::genericity: return 2;
    case ErrorKind::convergence:
    case ErrorKind::not_found: return 3;
    case ErrorKind::structure: return 4;
    default: return 1;
  }
}

int run_analysis(const SystemConfig& config, const std::string& sub, std::ostream& out, std::ostream& err) {
  try {
    const Artifacts art(config.output);
    if (sub == "unroll") return cmd_unroll(config, art, out);
    const SkewSystem sys = config.system();
    const AnalysisConfig& a = config.analysis;
    if (sub == "genericity") return cmd_genericity(sys, a, art, out);
    if (sub == "skeleton") return cmd_skeleton(sys, a, art, out);
    if (sub == "walk") return cmd_walk(sys, a, art, out);
    if (sub == "stationary") return cmd_stationary(sys, a, art, out);
    if (sub == "decompose") return cmd_decompose(sys, a, art, out);
    if (sub == "baxendale") return cmd_baxendale(sys, a, art, out);
    if (sub == "pullback") return cmd_pullback(sys, a, art, out);
    throw Error(ErrorKind::input, "unknown subcommand '" + sub + "'");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::genericity) out << e.what() << "\n";
    err << "skewlab " << sub << ": " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

int run_file(const std::filesystem::path& config_path, const std::string& subcommand, const Overrides& overrides,
             std::ostream& out, std::ostream& err) {
  SystemConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, overrides);
  } catch (const Error& e) {
    err << "skewlab: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return run_analysis(cfg, subcommand, out, err);
}

}  // namespace skewlab
