#include "psb/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "psb/errors.hpp"
#include "psb/random.hpp"

namespace psb {
namespace {

constexpr double kEuler = 2.718281828459045235;

double require_param(const ExponentParams& params, const std::string& id, const char* key) {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw Error::parameter("exponent_catalog: " + id + " needs parameter " + key);
  }
  return it->second;
}

void check_declared_bounds(const ExponentFunction& p) {
  if (!(1.0 < p.p_minus) || !(p.p_minus <= p.p_plus) || !std::isfinite(p.p_plus)) {
    std::ostringstream out;
    out << "exponent " << p.id << ": bounds must satisfy 1 < p_minus <= p_plus < inf, got ["
        << p.p_minus << ", " << p.p_plus << "]";
    throw Error::parameter(out.str());
  }
  if (!(p.p_infinity >= p.p_minus) || !(p.p_infinity <= p.p_plus)) {
    std::ostringstream out;
    out << "exponent " << p.id << ": p_infinity " << p.p_infinity << " outside ["
        << p.p_minus << ", " << p.p_plus << "]";
    throw Error::parameter(out.str());
  }
  if (!p.evaluate) {
    throw Error::parameter("exponent " + p.id + ": missing evaluator");
  }
}

// Exponent values over all grid nodes, bounds-checked once per entry point.
std::vector<double> exponent_values(const ExponentFunction& p, const GridSpec& spec) {
  check_declared_bounds(p);
  if (p.dimension != spec.dimension) {
    std::ostringstream out;
    out << "exponent " << p.id << ": dimension " << p.dimension << " does not match grid "
        << spec.dimension;
    throw Error::parameter(out.str());
  }
  std::vector<double> values(spec.node_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = p.evaluate(spec.node_point(i));
    if (!std::isfinite(v) || v < p.p_minus - 1e-12 || v > p.p_plus + 1e-12) {
      std::ostringstream out;
      out << "exponent " << p.id << ": value " << v << " at node " << i
          << " escapes the declared bounds [" << p.p_minus << ", " << p.p_plus << "]";
      throw Error::parameter(out.str());
    }
    values[i] = v;
  }
  return values;
}

long double modular_cached(const GridFunction& f, const std::vector<double>& pvals,
                           double lambda) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double mag = std::abs(f.values[i]);
    if (mag == 0.0) continue;
    acc += static_cast<long double>(std::pow(mag / lambda, pvals[i]));
  }
  long double vol = 1.0L;
  for (int a = 0; a < f.spec.dimension; ++a) vol *= static_cast<long double>(f.spec.dx());
  return acc * vol;
}

double abs_norm(const Point& x, int dimension) {
  return dimension == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

std::vector<Point> level_directions(int dimension, int count, Rng& rng) {
  std::vector<Point> dirs;
  if (dimension == 1) {
    dirs.push_back({1.0, 0.0});
    dirs.push_back({-1.0, 0.0});
  } else {
    dirs.push_back({1.0, 0.0});
    dirs.push_back({0.0, 1.0});
    for (int i = 0; i < count; ++i) dirs.push_back(rng.unit_vector(dimension));
  }
  return dirs;
}

void finish_check(ExponentCheck& check, double growth_threshold) {
  const std::size_t n = check.per_level.size();
  check.constant = check.per_level.back();
  const double prev = check.per_level[n - 2];
  if (prev == 0.0) {
    check.growth = check.constant == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    check.growth = check.constant / prev;
  }
  check.satisfied = std::isfinite(check.constant) && check.growth <= growth_threshold;
}

}  // namespace

ExponentFunction exponent_catalog(const std::string& id, const ExponentParams& params,
                                  int dimension) {
  if (dimension != 1 && dimension != 2) {
    std::ostringstream out;
    out << "exponent_catalog: dimension must be 1 or 2, got " << dimension;
    throw Error::parameter(out.str());
  }
  ExponentFunction p;
  p.id = id;
  p.params = params;
  p.dimension = dimension;
  if (id == "constant") {
    const double value = require_param(params, id, "p");
    p.p_minus = p.p_plus = p.p_infinity = value;
    p.evaluate = [value](const Point&) { return value; };
  } else if (id == "log_decay") {
    const double p_inf = require_param(params, id, "p_inf");
    const double amp = require_param(params, id, "amplitude");
    if (!(amp > 0.0)) {
      throw Error::parameter("exponent_catalog: log_decay amplitude must be positive");
    }
    p.p_minus = p.p_infinity = p_inf;
    p.p_plus = p_inf + amp;  // the additive term peaks at the origin
    const int dim = dimension;
    p.evaluate = [p_inf, amp, dim](const Point& x) {
      return p_inf + amp / std::log(kEuler + abs_norm(x, dim));
    };
  } else if (id == "loglog_decay") {
    const double p_inf = require_param(params, id, "p_inf");
    const double amp = require_param(params, id, "amplitude");
    if (!(amp > 0.0)) {
      throw Error::parameter("exponent_catalog: loglog_decay amplitude must be positive");
    }
    p.p_minus = p.p_infinity = p_inf;
    p.p_plus = p_inf + amp / std::log(kEuler + 1.0);
    const int dim = dimension;
    p.evaluate = [p_inf, amp, dim](const Point& x) {
      return p_inf + amp / std::log(kEuler + std::log(kEuler + abs_norm(x, dim)));
    };
  } else if (id == "step") {
    const double left = require_param(params, id, "p_left");
    const double right = require_param(params, id, "p_right");
    p.p_minus = std::min(left, right);
    p.p_plus = std::max(left, right);
    p.p_infinity = right;  // the jump never settles; the right limit stands in
    p.evaluate = [left, right](const Point& x) { return x[0] < 0.0 ? left : right; };
  } else {
    throw Error::catalog("exponent_catalog: unknown exponent \"" + id + "\"");
  }
  check_declared_bounds(p);
  return p;
}

void validate_exponent(const ExponentFunction& p, const GridSpec& spec) {
  exponent_values(p, spec);
}

double modular(const GridFunction& f, const ExponentFunction& p, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream out;
    out << "modular: lambda must be positive and finite, got " << lambda;
    throw Error::parameter(out.str());
  }
  check_finite(f, "modular");
  const std::vector<double> pvals = exponent_values(p, f.spec);
  return static_cast<double>(modular_cached(f, pvals, lambda));
}

double vlp_norm(const GridFunction& f, const ExponentFunction& p) {
  check_finite(f, "vlp_norm");
  const std::vector<double> pvals = exponent_values(p, f.spec);
  const double peak = sup_norm(f);
  if (peak == 0.0) return 0.0;

  // Bracket the Luxemburg infimum: rho(lo) > 1 >= rho(hi), then bisect.
  double hi = peak;
  double lo = 0.0;
  if (modular_cached(f, pvals, hi) > 1.0L) {
    for (int iter = 0;; ++iter) {
      if (iter >= 200) throw Error::compute("vlp_norm: bracketing failed to find rho <= 1");
      lo = hi;
      hi *= 2.0;
      if (modular_cached(f, pvals, hi) <= 1.0L) break;
    }
  } else {
    double candidate = hi;
    for (int iter = 0;; ++iter) {
      if (iter >= 200) throw Error::compute("vlp_norm: bracketing failed to find rho > 1");
      candidate /= 2.0;
      if (modular_cached(f, pvals, candidate) > 1.0L) break;
      hi = candidate;
    }
    lo = candidate;
  }
  for (int iter = 0; hi - lo > 1e-12 * hi; ++iter) {
    if (iter >= 200) throw Error::compute("vlp_norm: bisection failed to converge");
    const double mid = 0.5 * (lo + hi);
    if (modular_cached(f, pvals, mid) <= 1.0L) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double constant_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    std::ostringstream out;
    out << "constant_norm: p must lie in [1, inf), got " << p;
    throw Error::parameter(out.str());
  }
  check_finite(f, "constant_norm");
  long double acc = 0.0L;
  for (const Complex& v : f.values) {
    const double mag = std::abs(v);
    if (mag != 0.0) acc += static_cast<long double>(std::pow(mag, p));
  }
  long double vol = 1.0L;
  for (int a = 0; a < f.spec.dimension; ++a) vol *= static_cast<long double>(f.spec.dx());
  return std::pow(static_cast<double>(acc * vol), 1.0 / p);
}

ExponentFunction conjugate_exponent(const ExponentFunction& p) {
  check_declared_bounds(p);
  ExponentFunction conj;
  conj.id = "conj(" + p.id + ")";
  conj.params = p.params;
  conj.dimension = p.dimension;
  conj.p_minus = p.p_plus / (p.p_plus - 1.0);
  conj.p_plus = p.p_minus / (p.p_minus - 1.0);
  conj.p_infinity = p.p_infinity / (p.p_infinity - 1.0);
  const auto inner = p.evaluate;
  conj.evaluate = [inner](const Point& x) {
    const double v = inner(x);
    return v / (v - 1.0);
  };
  return conj;
}

double pairing_integral(const GridFunction& f, const GridFunction& g) {
  if (!(f.spec == g.spec)) {
    throw Error::parameter("pairing_integral: functions live on different grids");
  }
  check_finite(f, "pairing_integral");
  check_finite(g, "pairing_integral");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += static_cast<long double>(std::abs(f.values[i])) *
           static_cast<long double>(std::abs(g.values[i]));
  }
  long double vol = 1.0L;
  for (int a = 0; a < f.spec.dimension; ++a) vol *= static_cast<long double>(f.spec.dx());
  return static_cast<double>(acc * vol);
}

double distribution_measure(const GridFunction& f, double lambda) {
  if (!std::isfinite(lambda)) {
    throw Error::parameter("distribution_measure: lambda must be finite");
  }
  check_finite(f, "distribution_measure");
  long count = 0;
  for (const Complex& v : f.values) {
    if (std::abs(v) > lambda) ++count;
  }
  long double vol = 1.0L;
  for (int a = 0; a < f.spec.dimension; ++a) vol *= static_cast<long double>(f.spec.dx());
  return static_cast<double>(vol * static_cast<long double>(count));
}

ExponentCheck check_log_holder_local(const ExponentFunction& p, const GridSpec& spec,
                                     int levels, double growth_threshold) {
  check_declared_bounds(p);
  if (p.dimension != spec.dimension) {
    throw Error::parameter("check_log_holder_local: exponent and grid dimensions differ");
  }
  if (levels < 2) {
    throw Error::parameter("check_log_holder_local: needs at least 2 levels");
  }
  const double diam = 2.0 * spec.half_extent;
  ExponentCheck check;
  double running = 0.0;
  for (int level = 0; level < levels; ++level) {
    Rng rng(2026u + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(level));
    const double dist = diam * std::pow(8.0, -(level + 1.0));
    std::vector<Point> centers{{0.0, 0.0}};
    const int extra = 16 << level;
    for (int i = 0; i < extra; ++i) {
      Point t{rng.uniform(-spec.half_extent / 2, spec.half_extent / 2), 0.0};
      if (spec.dimension == 2) {
        t[1] = rng.uniform(-spec.half_extent / 2, spec.half_extent / 2);
      }
      centers.push_back(t);
    }
    const std::vector<Point> dirs = level_directions(spec.dimension, 4, rng);
    const double weight = std::log(kEuler + 1.0 / dist);
    for (const Point& t : centers) {
      for (const Point& e : dirs) {
        const Point x{t[0] - 0.5 * dist * e[0], t[1] - 0.5 * dist * e[1]};
        const Point y{t[0] + 0.5 * dist * e[0], t[1] + 0.5 * dist * e[1]};
        running = std::max(running, std::abs(p.evaluate(x) - p.evaluate(y)) * weight);
      }
    }
    check.per_level.push_back(running);
  }
  finish_check(check, growth_threshold);
  return check;
}

ExponentCheck check_log_holder_infinity(const ExponentFunction& p, double base_magnitude,
                                        int levels, double growth_threshold) {
  check_declared_bounds(p);
  if (!(base_magnitude > 1.0)) {
    throw Error::parameter("check_log_holder_infinity: base magnitude must exceed 1");
  }
  if (levels < 2) {
    throw Error::parameter("check_log_holder_infinity: needs at least 2 levels");
  }
  ExponentCheck check;
  double running = 0.0;
  double top = base_magnitude;
  for (int level = 0; level < levels; ++level) {
    Rng rng(4093u + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(level));
    const std::vector<Point> dirs = level_directions(p.dimension, 8, rng);
    const int count = 32 << level;
    const double ratio = std::pow(top / base_magnitude, 1.0 / (count - 1));
    double magnitude = base_magnitude;
    for (int i = 0; i < count; ++i, magnitude *= ratio) {
      const double weight = std::log(kEuler + magnitude);
      for (const Point& e : dirs) {
        const Point x{magnitude * e[0], magnitude * e[1]};
        running = std::max(running, std::abs(p.evaluate(x) - p.p_infinity) * weight);
      }
    }
    check.per_level.push_back(running);
    top *= top;  // magnitudes square from level to level
  }
  finish_check(check, growth_threshold);
  return check;
}

NekvindaResult check_nekvinda(const ExponentFunction& p, double c, int max_doublings) {
  check_declared_bounds(p);
  if (!(c > 0.0) || !(c < 1.0)) {
    std::ostringstream out;
    out << "check_nekvinda: c must lie in (0, 1), got " << c;
    throw Error::parameter(out.str());
  }
  if (max_doublings < 1) {
    throw Error::parameter("check_nekvinda: max_doublings must be positive");
  }
  const auto integrand = [&](const Point& x) -> double {
    const double gap = std::abs(p.evaluate(x) - p.p_infinity);
    if (gap < 1e-15) return 0.0;
    return std::pow(c, 1.0 / gap);
  };

  NekvindaResult result;
  long double total = 0.0L;
  double inner = 0.0;
  double outer = 1.0;
  for (int k = 0; k <= max_doublings; ++k) {
    long double increment = 0.0L;
    if (p.dimension == 1) {
      const int cells = 512;
      const double h = (outer - inner) / cells;
      for (int i = 0; i < cells; ++i) {
        const double t = inner + (i + 0.5) * h;
        increment += static_cast<long double>(integrand({t, 0.0})) * h;
        increment += static_cast<long double>(integrand({-t, 0.0})) * h;
      }
    } else {
      const int cells = 256;
      const double h = 2.0 * outer / cells;
      for (int i0 = 0; i0 < cells; ++i0) {
        const double x0 = -outer + (i0 + 0.5) * h;
        for (int i1 = 0; i1 < cells; ++i1) {
          const double x1 = -outer + (i1 + 0.5) * h;
          if (std::max(std::abs(x0), std::abs(x1)) < inner) continue;
          increment += static_cast<long double>(integrand({x0, x1})) * h * h;
        }
      }
    }
    total += increment;
    result.boxes = k + 1;
    if (static_cast<double>(increment) <= 1e-3 * (1.0 + static_cast<double>(total))) {
      result.converged = true;
      break;
    }
    inner = outer;
    outer *= 2.0;
  }
  result.integral = static_cast<double>(total);
  return result;
}

}  // namespace psb
