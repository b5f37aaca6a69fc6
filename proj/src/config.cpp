#include "skewlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"

namespace skewlab {

namespace {

// Collects every problem instead of stopping at the first.
class Problems {
 public:
  void add(const std::string& path, const std::string& what) { lines_.push_back(path + ": " + what); }
  bool empty() const { return lines_.empty(); }
  void raise(const std::string& origin) const {
    std::string msg = origin + ": invalid configuration";
    for (const auto& l : lines_) msg += "\n  " + l;
    throw Error(ErrorKind::input, msg);
  }

 private:
  std::vector<std::string> lines_;
};

template <typename T>
std::optional<T> read(const YAML::Node& node, const std::string& path, Problems& problems) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    problems.add(path, "cannot read value '" + YAML::Dump(node) + "'");
    return std::nullopt;
  }
}

template <typename T>
void optional_field(const YAML::Node& section, const char* key, const std::string& prefix, T& target,
                    Problems& problems) {
  if (!section || !section[key]) return;
  if (auto v = read<T>(section[key], prefix + "." + key, problems)) target = *v;
}

std::vector<std::vector<double>> read_matrix(const YAML::Node& node, const std::string& path, int n,
                                             Problems& problems) {
  std::vector<std::vector<double>> m;
  if (!node || !node.IsSequence() || static_cast<int>(node.size()) != n) {
    problems.add(path, "expected " + std::to_string(n) + " rows");
    return m;
  }
  for (int i = 0; i < n; ++i) {
    const std::string rp = path + "[" + std::to_string(i + 1) + "]";
    auto row = read<std::vector<double>>(node[i], rp, problems);
    if (!row) return {};
    if (static_cast<int>(row->size()) != n) {
      problems.add(rp, "expected " + std::to_string(n) + " entries");
      return {};
    }
    m.push_back(*row);
  }
  return m;
}

void read_analysis(const YAML::Node& a, AnalysisConfig& c, Problems& p) {
  const std::string s = "analysis";
  optional_field(a, "epsilon", s, c.epsilon, p);
  optional_field(a, "delta", s, c.delta, p);
  optional_field(a, "bins", s, c.bins, p);
  optional_field(a, "walk_steps", s, c.walk_steps, p);
  optional_field(a, "burn_in", s, c.burn_in, p);
  optional_field(a, "seed", s, c.seed, p);
  optional_field(a, "tolerance", s, c.tolerance, p);
  optional_field(a, "power_tol", s, c.power_tol, p);
  optional_field(a, "max_iter", s, c.max_iter, p);
  optional_field(a, "bone_depth", s, c.bone_depth, p);
  optional_field(a, "bone_samples", s, c.bone_samples, p);
  optional_field(a, "bone_threshold", s, c.bone_threshold, p);
  optional_field(a, "baxendale_epsilons", s, c.baxendale_epsilons, p);
  optional_field(a, "baxendale_bins", s, c.baxendale_bins, p);
  optional_field(a, "max_period", s, c.max_period, p);
  optional_field(a, "repeller_steps", s, c.repeller_steps, p);
  optional_field(a, "workers", s, c.workers, p);

  if (!(c.epsilon > 0.0)) p.add("analysis.epsilon", "must be positive");
  if (!(c.delta > 0.0)) p.add("analysis.delta", "must be positive");
  if (c.bins < 64) p.add("analysis.bins", "must be at least 64");
  if (c.walk_steps <= c.burn_in) p.add("analysis.walk_steps", "must exceed analysis.burn_in");
  if (!(c.tolerance > 0.0)) p.add("analysis.tolerance", "must be positive");
  if (!(c.power_tol > 0.0)) p.add("analysis.power_tol", "must be positive");
  if (c.bone_depth < 1) p.add("analysis.bone_depth", "must be at least 1");
  if (c.bone_samples < 1) p.add("analysis.bone_samples", "must be at least 1");
  for (std::size_t i = 0; i < c.baxendale_epsilons.size(); ++i)
    if (!(c.baxendale_epsilons[i] > 0.0 && c.baxendale_epsilons[i] < 1.0))
      p.add("analysis.baxendale_epsilons[" + std::to_string(i + 1) + "]", "must lie in (0,1)");
  if (c.baxendale_bins < 64) p.add("analysis.baxendale_bins", "must be at least 64");
  if (c.max_period < 1) p.add("analysis.max_period", "must be at least 1");
  if (c.workers < 1) p.add("analysis.workers", "must be at least 1");
}

void read_maps(const YAML::Node& node, SystemConfig& cfg, Problems& p) {
  if (!node || !node.IsSequence()) {
    p.add("maps", "expected a list of maps");
    return;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string mp = "maps[" + std::to_string(i + 1) + "]";
    const YAML::Node m = node[i];
    MapSpec spec;
    if (m["state"]) {
      if (auto s = read<int>(m["state"], mp + ".state", p)) {
        if (*s < 1 || *s > cfg.n_states) {
          p.add(mp + ".state", "state " + std::to_string(*s) + " out of range");
        } else {
          spec.state = *s - 1;
        }
      }
    }
    if (m["window"]) {
      if (auto w = read<std::string>(m["window"], mp + ".window", p)) {
        try {
          spec.window = Word::parse(*w);
        } catch (const Error& e) {
          p.add(mp + ".window", e.what());
        }
      }
    }
    if (!m["family"]) {
      p.add(mp + ".family", "missing");
      continue;
    }
    spec.family = m["family"].as<std::string>("");
    if (spec.family == "table") {
      if (auto v = read<std::vector<double>>(m["x"], mp + ".x", p)) spec.x = *v;
      if (auto v = read<std::vector<double>>(m["y"], mp + ".y", p)) spec.y = *v;
    } else if (spec.family == "affine" || spec.family == "moebius") {
      if (auto v = read<std::vector<double>>(m["params"], mp + ".params", p)) spec.params = *v;
    } else {
      p.add(mp + ".family", "unknown family '" + spec.family + "' (affine, moebius, table)");
      continue;
    }
    try {
      (void)spec.build();
    } catch (const Error& e) {
      p.add(mp, e.what());
    }
    cfg.maps.push_back(std::move(spec));
  }
}

void check_map_coverage(const SystemConfig& cfg, Problems& p) {
  if (!p.empty() && cfg.transition.empty()) return;
  if (!cfg.multistep()) {
    std::set<State> seen;
    for (std::size_t i = 0; i < cfg.maps.size(); ++i) {
      const auto& m = cfg.maps[i];
      const std::string mp = "maps[" + std::to_string(i + 1) + "]";
      if (!m.state) {
        p.add(mp + ".state", "missing (step systems index maps by state)");
      } else if (!seen.insert(*m.state).second) {
        p.add(mp + ".state", "state " + std::to_string(*m.state + 1) + " given twice");
      }
    }
    for (State k = 0; k < cfg.n_states; ++k)
      if (!seen.count(k)) p.add("maps", "no map for state " + std::to_string(k + 1));
    return;
  }
  if (cfg.adjacency.empty()) return;
  const auto len = static_cast<std::size_t>(cfg.back + cfg.ahead + 1);
  std::set<Word> seen;
  for (std::size_t i = 0; i < cfg.maps.size(); ++i) {
    const auto& m = cfg.maps[i];
    const std::string mp = "maps[" + std::to_string(i + 1) + "].window";
    if (!m.window) {
      p.add(mp, "missing (multistep systems index maps by window)");
      continue;
    }
    bool ok = m.window->size() == len;
    if (!ok) p.add(mp, "window '" + m.window->str() + "' must have length " + std::to_string(len));
    for (State s : *m.window) {
      if (s < 0 || s >= cfg.n_states) {
        p.add(mp, "window '" + m.window->str() + "' uses an unknown state");
        ok = false;
        break;
      }
    }
    for (std::size_t k = 0; ok && k + 1 < m.window->size(); ++k) {
      if (!cfg.adjacency[(*m.window)[k]][(*m.window)[k + 1]]) {
        p.add(mp, "window '" + m.window->str() + "' is inadmissible");
        ok = false;
      }
    }
    if (ok && !seen.insert(*m.window).second) p.add(mp, "window '" + m.window->str() + "' given twice");
  }
}

}  // namespace

FiberMap MapSpec::build() const {
  if (family == "affine") {
    if (params.size() != 2) throw Error(ErrorKind::input, "affine needs params [a, b] for a + b x");
    return FiberMap::affine(params[0], params[1]);
  }
  if (family == "moebius") {
    if (params.size() != 4) throw Error(ErrorKind::input, "moebius needs params [a, b, c, d] for (a x + b)/(c x + d)");
    return FiberMap::moebius(params[0], params[1], params[2], params[3]);
  }
  if (family == "table") return FiberMap::monotone_table(x, y);
  throw Error(ErrorKind::input, "unknown map family '" + family + "'");
}

MarkovChain SystemConfig::chain() const { return MarkovChain(adjacency, transition); }

MultistepSystem SystemConfig::multistep_system() const {
  MultistepSystem ms{chain(), back, ahead, {}};
  for (const auto& m : maps) ms.window_maps.emplace_back(*m.window, m.build());
  return ms;
}

SkewSystem SystemConfig::system() const {
  if (multistep()) return multistep_to_step(multistep_system()).system;
  std::vector<FiberMap> fmaps(static_cast<std::size_t>(n_states), FiberMap::identity());
  for (const auto& m : maps) fmaps[*m.state] = m.build();
  return SkewSystem(chain(), std::move(fmaps));
}

SystemConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::io, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                   std::to_string(e.mark.column + 1) + ": parse error: " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorKind::io, origin + ": expected a mapping at the top level");

  SystemConfig cfg;
  Problems p;
  const YAML::Node chain = root["chain"];
  if (!chain) {
    p.add("chain", "missing section");
    p.raise(origin);
  }
  if (auto n = chain["n_states"] ? read<int>(chain["n_states"], "chain.n_states", p) : std::nullopt) {
    cfg.n_states = *n;
  } else if (!chain["n_states"]) {
    p.add("chain.n_states", "missing");
  }
  if (cfg.n_states < 1) {
    p.add("chain.n_states", "must be a positive integer");
    p.raise(origin);
  }

  cfg.transition = read_matrix(chain["transition"], "chain.transition", cfg.n_states, p);
  if (!cfg.transition.empty()) {
    for (int i = 0; i < cfg.n_states; ++i) {
      double s = 0.0;
      for (double v : cfg.transition[i]) {
        if (!(v >= 0.0 && v <= 1.0))
          p.add("chain.transition[" + std::to_string(i + 1) + "]", "entry " + num(v) + " is not a probability");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-12)
        p.add("chain.transition[" + std::to_string(i + 1) + "]", "row sums to " + num(s) + ", expected 1");
    }
  }
  if (chain["adjacency"]) {
    const auto a = read_matrix(chain["adjacency"], "chain.adjacency", cfg.n_states, p);
    for (const auto& row : a) {
      cfg.adjacency.emplace_back();
      for (double v : row) cfg.adjacency.back().push_back(v != 0.0 ? 1 : 0);
    }
  } else if (!cfg.transition.empty()) {
    for (const auto& row : cfg.transition) {
      cfg.adjacency.emplace_back();
      for (double v : row) cfg.adjacency.back().push_back(v > 0.0 ? 1 : 0);
    }
  }
  if (p.empty() && !cfg.transition.empty()) {
    try {
      (void)cfg.chain();
    } catch (const Error& e) {
      p.add("chain", e.what());
    }
  }

  if (root["memory"]) {
    if (auto mem = read<std::vector<int>>(root["memory"], "memory", p)) {
      if (mem->size() != 2 || (*mem)[0] < 0 || (*mem)[1] < 0) {
        p.add("memory", "expected [k, l] with k, l >= 0");
      } else {
        cfg.back = (*mem)[0];
        cfg.ahead = (*mem)[1];
      }
    }
  }
  read_maps(root["maps"], cfg, p);
  check_map_coverage(cfg, p);
  read_analysis(root["analysis"], cfg.analysis, p);

  if (const YAML::Node out = root["output"]) {
    optional_field(out, "directory", "output", cfg.output.directory, p);
    optional_field(out, "formats", "output", cfg.output.formats, p);
  }
  if (!p.empty()) p.raise(origin);
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

SystemConfig unrolled_config(const SystemConfig& config) {
  if (!config.multistep()) return config;
  const UnrolledSystem u = multistep_to_step(config.multistep_system());
  SystemConfig out;
  out.n_states = u.system.size();
  out.adjacency = u.system.chain().adjacency();
  out.transition = u.system.chain().transition_matrix();
  out.analysis = config.analysis;
  out.output = config.output;
  for (std::size_t k = 0; k < u.windows.size(); ++k) {
    for (const auto& m : config.maps) {
      if (*m.window != u.windows[k]) continue;
      MapSpec spec = m;
      spec.window.reset();
      spec.state = static_cast<State>(k);
      out.maps.push_back(std::move(spec));
    }
  }
  return out;
}

std::string emit_config(const SystemConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
  };
  std::ostringstream os;
  os << "chain:\n  n_states: " << c.n_states << "\n  adjacency:\n";
  for (const auto& row : c.adjacency) {
    os << "    - [";
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? ", " : "") << row[j];
    os << "]\n";
  }
  os << "  transition:\n";
  for (const auto& row : c.transition) os << "    - " << list(row) << "\n";
  if (c.multistep()) os << "memory: [" << c.back << ", " << c.ahead << "]\n";
  os << "maps:\n";
  for (const auto& m : c.maps) {
    if (m.state) os << "  - state: " << *m.state + 1 << "\n";
    if (m.window) os << "  - window: \"" << m.window->str() << "\"\n";
    os << "    family: " << m.family << "\n";
    if (m.family == "table") {
      os << "    x: " << list(m.x) << "\n    y: " << list(m.y) << "\n";
    } else {
      os << "    params: " << list(m.params) << "\n";
    }
  }
  const AnalysisConfig& a = c.analysis;
  os << "analysis:\n"
     << "  epsilon: " << num(a.epsilon) << "\n"
     << "  delta: " << num(a.delta) << "\n"
     << "  bins: " << a.bins << "\n"
     << "  walk_steps: " << a.walk_steps << "\n"
     << "  burn_in: " << a.burn_in << "\n"
     << "  seed: " << a.seed << "\n"
     << "  tolerance: " << num(a.tolerance) << "\n"
     << "  power_tol: " << num(a.power_tol) << "\n"
     << "  max_iter: " << a.max_iter << "\n"
     << "  bone_depth: " << a.bone_depth << "\n"
     << "  bone_samples: " << a.bone_samples << "\n"
     << "  bone_threshold: " << num(a.bone_threshold) << "\n"
     << "  baxendale_epsilons: " << list(a.baxendale_epsilons) << "\n"
     << "  baxendale_bins: " << a.baxendale_bins << "\n"
     << "  max_period: " << a.max_period << "\n"
     << "  repeller_steps: " << a.repeller_steps << "\n"
     << "  workers: " << a.workers << "\n";
  os << "output:\n  directory: \"" << c.output.directory << "\"\n  formats: [";
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) os << (i ? ", " : "") << c.output.formats[i];
  os << "]\n";
  return os.str();
}

}  // namespace skewlab
