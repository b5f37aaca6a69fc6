#include "skewlab/fibermaps.hpp"

#include <algorithm>
#include <cmath>

#include "skewlab/error.hpp"
#include "skewlab/format.hpp"

namespace skewlab {

namespace {

constexpr int kValidationGrid = 1024;
constexpr int kFixedPointGridLog2 = 20;

class FunctionPair final : public MonotoneFunction {
 public:
  FunctionPair(std::function<double(double)> v, std::function<double(double)> d, std::string name)
      : value_(std::move(v)), derivative_(std::move(d)), name_(std::move(name)) {}
  double value(double x) const override { return value_(x); }
  double derivative(double x) const override { return derivative_(x); }
  std::string describe() const override { return name_; }

 private:
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  std::string name_;
};

class MonotoneCubic final : public MonotoneFunction {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
      slope_[0] = slope_[1] = delta[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      slope_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    slope_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double value(double x) const override {
    const std::size_t k = segment(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * slope_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
           (t3 - t2) * h * slope_[k + 1];
  }

  double derivative(double x) const override {
    const std::size_t k = segment(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * y_[k] / h + (3 * t2 - 4 * t + 1) * slope_[k] + (-6 * t2 + 6 * t) * y_[k + 1] / h +
           (3 * t2 - 2 * t) * slope_[k + 1];
  }

  std::string describe() const override { return "table(" + std::to_string(x_.size()) + " knots)"; }

 private:
  // Three-point one-sided estimate, clipped to keep the interpolant monotone.
  static double edge_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d <= 0.0) return 0.5 * d0;
    if (d > 3.0 * d0) return 3.0 * d0;
    return d;
  }

  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  std::vector<double> x_, y_, slope_;
};

class Composite final : public MonotoneFunction {
 public:
  explicit Composite(std::vector<FiberMap> inner_first) : maps_(std::move(inner_first)) {}

  double value(double x) const override {
    for (const auto& f : maps_) x = f(x);
    return x;
  }
  double derivative(double x) const override {
    double d = 1.0;
    for (const auto& f : maps_) {
      d *= f.derivative(x);
      x = f(x);
    }
    return d;
  }
  std::string describe() const override {
    std::string s = "composite(";
    for (std::size_t i = 0; i < maps_.size(); ++i) s += (i ? ", " : "") + maps_[i].describe();
    return s + ")";
  }
  const std::vector<FiberMap>& maps() const { return maps_; }

 private:
  std::vector<FiberMap> maps_;
};

Moebius to_moebius(const Affine& f) { return {f.slope, f.offset, 0.0, 1.0}; }

Moebius normalized(Moebius m) {
  if (m.d < 0.0) m = {-m.a, -m.b, -m.c, -m.d};
  const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
  return {m.a / scale, m.b / scale, m.c / scale, m.d / scale};
}

double bisect_root(const std::function<double(double)>& h, double lo, double hi) {
  double hlo = h(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double hm = h(mid);
    if (hm == 0.0) return mid;
    if ((hm > 0.0) == (hlo > 0.0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

FixedPointKind classify(double multiplier) {
  if (std::abs(multiplier - 1.0) < kParabolicTol) return FixedPointKind::parabolic;
  return multiplier < 1.0 ? FixedPointKind::attracting : FixedPointKind::repelling;
}

}  // namespace

FiberMap FiberMap::affine(double offset, double slope) {
  FiberMap f(Affine{offset, slope});
  f.validate();
  return f;
}

FiberMap FiberMap::moebius(double a, double b, double c, double d) {
  if (!(d > 0.0 && c + d > 0.0) && !(d < 0.0 && c + d < 0.0))
    throw Error(ErrorKind::input, "moebius denominator vanishes on [0,1]");
  FiberMap f(normalized(Moebius{a, b, c, d}));
  f.validate();
  return f;
}

FiberMap FiberMap::blackbox(std::shared_ptr<const MonotoneFunction> fn) {
  if (!fn) throw Error(ErrorKind::input, "blackbox map has no evaluator");
  FiberMap f(std::move(fn));
  f.validate();
  return f;
}

FiberMap FiberMap::from_functions(std::function<double(double)> value, std::function<double(double)> derivative,
                                  std::string name) {
  return blackbox(std::make_shared<FunctionPair>(std::move(value), std::move(derivative), std::move(name)));
}

FiberMap FiberMap::monotone_table(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::input, "table needs matching x/y with >= 2 knots");
  if (x.front() != 0.0 || x.back() != 1.0) throw Error(ErrorKind::input, "table x must run from 0 to 1");
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (!(x[k + 1] > x[k])) throw Error(ErrorKind::input, "table x must be strictly increasing");
    if (!(y[k + 1] > y[k])) throw Error(ErrorKind::input, "table y must be strictly increasing");
  }
  return blackbox(std::make_shared<MonotoneCubic>(std::move(x), std::move(y)));
}

FiberMap FiberMap::identity() { return FiberMap(Affine{0.0, 1.0}); }

void FiberMap::validate() const {
  const double f0 = (*this)(0.0), f1 = (*this)(1.0);
  if (!(f0 > 0.0)) throw Error(ErrorKind::input, describe() + ": f(0) = " + num(f0) + " must be > 0");
  if (!(f1 < 1.0)) throw Error(ErrorKind::input, describe() + ": f(1) = " + num(f1) + " must be < 1");
  if (const auto* a = as_affine()) {
    if (!(a->slope > 0.0)) throw Error(ErrorKind::input, "affine slope must be positive");
    return;
  }
  if (const auto* m = as_moebius()) {
    if (!(m->a * m->d - m->b * m->c > 0.0)) throw Error(ErrorKind::input, "moebius map must be increasing");
    return;
  }
  double prev = f0;
  for (int i = 0; i <= kValidationGrid; ++i) {
    const double x = static_cast<double>(i) / kValidationGrid;
    const double d = derivative(x);
    if (!(d > 0.0)) throw Error(ErrorKind::input, describe() + ": derivative " + num(d) + " at x = " + num(x));
    const double v = (*this)(x);
    if (i > 0 && !(v > prev)) throw Error(ErrorKind::input, describe() + ": not increasing near x = " + num(x));
    prev = v;
  }
}

double FiberMap::operator()(double x) const {
  return std::visit(
      [x](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return r.offset + r.slope * x;
        } else if constexpr (std::is_same_v<T, Moebius>) {
          return (r.a * x + r.b) / (r.c * x + r.d);
        } else {
          return r->value(x);
        }
      },
      rep_);
}

double FiberMap::derivative(double x) const {
  return std::visit(
      [x](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return r.slope;
        } else if constexpr (std::is_same_v<T, Moebius>) {
          const double den = r.c * x + r.d;
          return (r.a * r.d - r.b * r.c) / (den * den);
        } else {
          return r->derivative(x);
        }
      },
      rep_);
}

double FiberMap::inverse(double y) const {
  const Interval img = image();
  if (!(y >= img.lo && y <= img.hi)) {
    throw Error(ErrorKind::domain, "inverse undefined: y = " + num(y) + " outside [" + num(img.lo) + ", " +
                                       num(img.hi) + "]");
  }
  if (const auto* a = as_affine()) return std::clamp((y - a->offset) / a->slope, 0.0, 1.0);
  if (const auto* m = as_moebius()) return std::clamp((m->d * y - m->b) / (m->a - m->c * y), 0.0, 1.0);
  if (y == img.lo) return 0.0;
  if (y == img.hi) return 1.0;
  return bisect_root([&](double x) { return (*this)(x)-y; }, 0.0, 1.0);
}

MapFamily FiberMap::family() const {
  if (as_affine()) return MapFamily::affine;
  if (as_moebius()) return MapFamily::moebius;
  return MapFamily::blackbox;
}

std::string FiberMap::describe() const {
  if (const auto* a = as_affine()) return "affine(" + num(a->offset) + " + " + num(a->slope) + " x)";
  if (const auto* m = as_moebius())
    return "moebius((" + num(m->a) + " x + " + num(m->b) + ") / (" + num(m->c) + " x + " + num(m->d) + "))";
  return std::get<Blackbox>(rep_)->describe();
}

FiberMap compose(const FiberMap& outer, const FiberMap& inner) {
  const auto* ao = outer.as_affine();
  const auto* ai = inner.as_affine();
  if (ao && ai) return FiberMap(Affine{ao->offset + ao->slope * ai->offset, ao->slope * ai->slope});
  if (outer.exact() && inner.exact()) {
    const Moebius o = ao ? to_moebius(*ao) : *outer.as_moebius();
    const Moebius i = ai ? to_moebius(*ai) : *inner.as_moebius();
    return FiberMap(normalized(Moebius{o.a * i.a + o.b * i.c, o.a * i.b + o.b * i.d, o.c * i.a + o.d * i.c,
                                       o.c * i.b + o.d * i.d}));
  }
  std::vector<FiberMap> chain;
  auto append = [&chain](const FiberMap& f) {
    if (auto* bb = std::get_if<FiberMap::Blackbox>(&f.rep_)) {
      if (auto* comp = dynamic_cast<const Composite*>(bb->get())) {
        chain.insert(chain.end(), comp->maps().begin(), comp->maps().end());
        return;
      }
    }
    if (const auto* a = f.as_affine(); a && a->offset == 0.0 && a->slope == 1.0) return;
    chain.push_back(f);
  };
  append(inner);
  append(outer);
  return FiberMap(std::make_shared<Composite>(std::move(chain)));
}

Interval map_interval(const FiberMap& f, const Interval& iv) { return {f(iv.lo), f(iv.hi)}; }

double invert_point(const FiberMap& f, double y) { return f.inverse(y); }

const char* to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::attracting: return "attracting";
    case FixedPointKind::repelling: return "repelling";
    case FixedPointKind::parabolic: return "parabolic";
  }
  return "?";
}

std::vector<FixedPoint> fixed_points(const FiberMap& f) {
  std::vector<FixedPoint> out;
  auto push = [&](double x) {
    x = std::clamp(x, 0.0, 1.0);
    const double m = f.derivative(x);
    out.push_back({x, m, classify(m), false});
  };

  if (const auto* a = f.as_affine()) {
    if (a->slope != 1.0) {
      const double x = a->offset / (1.0 - a->slope);
      if (x >= 0.0 && x <= 1.0) push(x);
    }
    return out;
  }

  if (const auto* m = f.as_moebius()) {
    // c x^2 + (d - a) x - b = 0
    const double qa = m->c, qb = m->d - m->a, qc = -m->b;
    std::vector<double> roots;
    const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc)});
    if (std::abs(qa) <= 1e-15 * scale) {
      if (qb != 0.0) roots.push_back(-qc / qb);
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
        if (q != 0.0) {
          roots.push_back(q / qa);
          roots.push_back(qc / q);
        } else {
          roots.push_back(0.0);
        }
      }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    for (double r : roots)
      if (r >= -1e-14 && r <= 1.0 + 1e-14) push(r);
    return out;
  }

  const std::size_t n = std::size_t{1} << kFixedPointGridLog2;
  const double step = 1.0 / static_cast<double>(n);
  auto h = [&f](double x) { return f(x) - x; };
  std::vector<double> hv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) hv[i] = h(static_cast<double>(i) * step);

  for (std::size_t i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) * step;
    if (hv[i] == 0.0) {
      push(x);
      continue;
    }
    if (i < n && hv[i + 1] != 0.0 && (hv[i] > 0.0) != (hv[i + 1] > 0.0)) {
      push(bisect_root(h, x, x + step));
      continue;
    }
    // Touching zero without crossing: report, do not classify silently.
    if (i > 0 && i < n && std::abs(hv[i]) < 1e-10 && std::abs(hv[i]) <= std::abs(hv[i - 1]) &&
        std::abs(hv[i]) <= std::abs(hv[i + 1]) && (hv[i - 1] > 0.0) == (hv[i] > 0.0) &&
        (hv[i + 1] > 0.0) == (hv[i] > 0.0)) {
      out.push_back({x, f.derivative(x), FixedPointKind::parabolic, true});
    }
  }
  std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) { return a.location < b.location; });
  return out;
}

SkewSystem::SkewSystem(MarkovChain chain, std::vector<FiberMap> maps) : chain_(std::move(chain)), maps_(std::move(maps)) {
  if (static_cast<int>(maps_.size()) != chain_.size())
    throw Error(ErrorKind::input, "need exactly one fiber map per state");
}

FiberMap compose_word(const SkewSystem& system, const Word& word) {
  if (word.empty() || !system.chain().admissible(word))
    throw Error(ErrorKind::input, "word '" + word.str() + "' is empty or inadmissible");
  FiberMap acc = system.map(word[0]);
  for (std::size_t i = 1; i < word.size(); ++i) acc = compose(system.map(word[i]), acc);
  return acc;
}

FiberMap path_map(const SkewSystem& system, const Word& path) {
  if (path.empty() || !system.chain().admissible(path))
    throw Error(ErrorKind::input, "path '" + path.str() + "' is empty or inadmissible");
  if (path.size() == 1) return FiberMap::identity();
  return compose_word(system, Word(std::vector<State>(path.begin(), path.end() - 1)));
}

}  // namespace skewlab
