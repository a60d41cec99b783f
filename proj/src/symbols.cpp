#include "psb/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "psb/errors.hpp"
#include "psb/random.hpp"

namespace psb {

std::string multi_index_str(const MultiIndex& m, int dimension) {
  std::ostringstream os;
  os << "(" << m.c[0];
  if (dimension == 2) os << "," << m.c[1];
  os << ")";
  return os.str();
}

std::vector<MultiIndex> multi_indices_up_to(int dimension, int max_order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= max_order; ++total) {
    if (dimension == 1) {
      out.push_back({{total, 0}});
    } else {
      for (int first = total; first >= 0; --first) out.push_back({{first, total - first}});
    }
  }
  return out;
}

PowerSum power_derivative(const PowerSum& p, int axis) {
  PowerSum out;
  for (const PowerTerm& t : p) {
    if (t.expo[axis] > 0) {
      PowerTerm u = t;
      u.coeff *= t.expo[axis];
      u.expo[axis] -= 1;
      out.push_back(u);
    }
    if (t.s != 0.0) {
      PowerTerm u = t;
      u.coeff *= 2.0 * t.s;
      u.expo[axis] += 1;
      u.s -= 1.0;
      out.push_back(u);
    }
  }
  return out;
}

double power_eval(const PowerSum& p, const Point& v, int /*dimension*/) {
  const double t = v[0] * v[0] + v[1] * v[1];
  double sum = 0.0;
  for (const PowerTerm& term : p) {
    double w = term.coeff;
    for (int axis = 0; axis < 2; ++axis) {
      for (int e = 0; e < term.expo[axis]; ++e) w *= v[axis];
    }
    if (term.s != 0.0) w *= std::pow(1.0 + t, term.s);
    sum += w;
  }
  return sum;
}

namespace {

PowerSum derive_multi(PowerSum p, const MultiIndex& d) {
  for (int axis = 0; axis < 2; ++axis) {
    for (int r = 0; r < d.c[axis]; ++r) p = power_derivative(p, axis);
  }
  return p;
}

// Derivative tables are precomputed up to order 4 so certifier inner loops
// never re-derive term sums.
using DerivTable = std::map<std::array<int, 2>, PowerSum>;

DerivTable build_derivs(const PowerSum& base, int dimension) {
  DerivTable t;
  for (const MultiIndex& m : multi_indices_up_to(dimension, 4)) {
    t[{m.c[0], m.c[1]}] = derive_multi(base, m);
  }
  return t;
}

const PowerSum& table_lookup(const DerivTable& t, const MultiIndex& m) {
  const auto it = t.find({m.c[0], m.c[1]});
  if (it == t.end()) {
    throw Error::capability("symbol derivative table has no entry for order " +
                            std::to_string(m.order()));
  }
  return it->second;
}

double get_param(const SymbolParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// a(x, xi) = xf(x) * gf(xi), both PowerSum-backed.
Symbol separable_symbol(std::string id, SymbolParams params, int dimension, PowerSum xf,
                        PowerSum gf, bool x_independent) {
  Symbol s;
  s.id = std::move(id);
  s.params = std::move(params);
  s.dimension = dimension;
  s.x_independent = x_independent;
  s.exact_x_order = 4;
  s.exact_xi_order = 4;
  const auto xd = std::make_shared<const DerivTable>(build_derivs(xf, dimension));
  const auto gd = std::make_shared<const DerivTable>(build_derivs(gf, dimension));
  s.evaluate = [xf, gf, dimension](const Point& x, const Point& xi) {
    return Complex(power_eval(xf, x, dimension) * power_eval(gf, xi, dimension), 0.0);
  };
  s.derivative = [xd, gd, dimension](const MultiIndex& alpha, const MultiIndex& beta,
                                     const Point& x, const Point& xi) {
    const double xv = power_eval(table_lookup(*xd, beta), x, dimension);
    if (xv == 0.0) return Complex(0.0, 0.0);
    return Complex(xv * power_eval(table_lookup(*gd, alpha), xi, dimension), 0.0);
  };
  return s;
}

}  // namespace

Symbol catalog_symbol(const std::string& id, const SymbolParams& params, int dimension) {
  if (dimension != 1 && dimension != 2) {
    throw Error::parameter("catalog_symbol: dimension must be 1 or 2");
  }
  const PowerSum unit{PowerTerm{1.0, {0, 0}, 0.0}};
  if (id == "one") {
    return separable_symbol(id, params, dimension, unit, unit, true);
  }
  if (id == "bessel_multiplier") {
    const double m = get_param(params, "m", 0.0);
    return separable_symbol(id, params, dimension, unit, {PowerTerm{1.0, {0, 0}, m / 2.0}},
                            true);
  }
  if (id == "smoothed_sign") {
    return separable_symbol(id, params, dimension, unit, {PowerTerm{1.0, {1, 0}, -0.5}}, true);
  }
  if (id == "modulated") {
    const double m = get_param(params, "m", 0.0);
    return separable_symbol(id, params, dimension, {PowerTerm{1.0, {0, 0}, -1.0}},
                            {PowerTerm{1.0, {0, 0}, m / 2.0}}, false);
  }
  if (id == "holder_rough") {
    const double kappa = get_param(params, "kappa", 0.5);
    const double kappa2 = get_param(params, "kappa2", 0.0);
    if (!(kappa > 0.0)) throw Error::parameter("holder_rough: kappa must be positive");
    if (kappa2 < 0.0) throw Error::parameter("holder_rough: kappa2 must be >= 0");
    const PowerSum gf{PowerTerm{1.0, {0, 0}, -kappa2 / 2.0}};
    const auto gd = std::make_shared<const DerivTable>(build_derivs(gf, dimension));
    Symbol s;
    s.id = id;
    s.params = params;
    s.dimension = dimension;
    s.x_independent = false;
    s.exact_x_order = 0;  // |sin x_1|^kappa is not differentiable
    s.exact_xi_order = 4;
    s.evaluate = [kappa, gf, dimension](const Point& x, const Point& xi) {
      const double xv = std::pow(std::abs(std::sin(x[0])), kappa);
      return Complex(xv * power_eval(gf, xi, dimension), 0.0);
    };
    s.derivative = [kappa, gd, dimension](const MultiIndex& alpha, const MultiIndex& beta,
                                          const Point& x, const Point& xi) {
      if (beta.order() != 0) {
        throw Error::capability("holder_rough: no exact x derivatives");
      }
      const double xv = std::pow(std::abs(std::sin(x[0])), kappa);
      if (xv == 0.0) return Complex(0.0, 0.0);
      return Complex(xv * power_eval(table_lookup(*gd, alpha), xi, dimension), 0.0);
    };
    return s;
  }
  throw Error::catalog("catalog_symbol: unknown id \"" + id +
                       "\"; known ids: one, bessel_multiplier, smoothed_sign, modulated, "
                       "holder_rough");
}

Symbol coordinate_symbol(int dimension) {
  const PowerSum unit{PowerTerm{1.0, {0, 0}, 0.0}};
  return separable_symbol("xi1", {}, dimension, unit, {PowerTerm{1.0, {1, 0}, 0.0}}, true);
}

Symbol scale_symbol(const Symbol& a, double c) {
  Symbol s = a;
  std::ostringstream id;
  id << c << "*" << a.id;
  s.id = id.str();
  const auto eval = a.evaluate;
  s.evaluate = [eval, c](const Point& x, const Point& xi) { return c * eval(x, xi); };
  if (a.derivative) {
    const auto deriv = a.derivative;
    s.derivative = [deriv, c](const MultiIndex& alpha, const MultiIndex& beta, const Point& x,
                              const Point& xi) { return c * deriv(alpha, beta, x, xi); };
  }
  return s;
}

Symbol add_symbols(const Symbol& a, const Symbol& b) {
  if (a.dimension != b.dimension) {
    throw Error::parameter("add_symbols: dimensions differ");
  }
  Symbol s;
  s.id = a.id + "+" + b.id;
  s.dimension = a.dimension;
  s.x_independent = a.x_independent && b.x_independent;
  s.exact_x_order = std::min(a.exact_x_order, b.exact_x_order);
  s.exact_xi_order = std::min(a.exact_xi_order, b.exact_xi_order);
  const auto ea = a.evaluate, eb = b.evaluate;
  s.evaluate = [ea, eb](const Point& x, const Point& xi) { return ea(x, xi) + eb(x, xi); };
  if (a.derivative && b.derivative) {
    const auto da = a.derivative, db = b.derivative;
    s.derivative = [da, db](const MultiIndex& alpha, const MultiIndex& beta, const Point& x,
                            const Point& xi) {
      return da(alpha, beta, x, xi) + db(alpha, beta, x, xi);
    };
  }
  return s;
}

namespace {

constexpr int kFdOrderLimit = 4;

template <typename Base>
Complex fd_nest(const Base& base, const std::vector<std::pair<bool, int>>& vars,
                std::size_t i, const Point& x, const Point& xi, double hx, double hxi) {
  if (i == vars.size()) return base(x, xi);
  const bool is_xi = vars[i].first;
  const int axis = vars[i].second;
  const double h = is_xi ? hxi : hx;
  const auto at = [&](double off) {
    Point x2 = x, xi2 = xi;
    (is_xi ? xi2 : x2)[axis] += off;
    return fd_nest(base, vars, i + 1, x2, xi2, hx, hxi);
  };
  const auto central = [&](double step) { return (at(step) - at(-step)) / (2.0 * step); };
  // one Richardson step on the second-order central difference
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

double norm2(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1]); }

}  // namespace

Complex eval_derivative(const Symbol& a, const MultiIndex& alpha, const MultiIndex& beta,
                        const Point& x, const Point& xi, const FdGeometry& geo) {
  for (int axis = 0; axis < 2; ++axis) {
    if (alpha.c[axis] < 0 || beta.c[axis] < 0) {
      throw Error::parameter("eval_derivative: negative derivative order");
    }
    if (axis >= a.dimension && (alpha.c[axis] > 0 || beta.c[axis] > 0)) {
      throw Error::parameter("eval_derivative: derivative along a missing axis");
    }
  }
  if (alpha.order() == 0 && beta.order() == 0) return a.evaluate(x, xi);

  const bool exact_xi = a.derivative && alpha.order() <= a.exact_xi_order;
  const bool exact_x = a.derivative && beta.order() <= a.exact_x_order;
  if (exact_xi && exact_x) return a.derivative(alpha, beta, x, xi);

  std::ostringstream os;
  if (!exact_xi && alpha.order() > kFdOrderLimit) {
    os << "eval_derivative: xi order " << alpha.order() << " exceeds exact support ("
       << a.exact_xi_order << ") and the fallback limit (" << kFdOrderLimit << ")";
    throw Error::capability(os.str());
  }
  if (!exact_x && beta.order() > kFdOrderLimit) {
    os << "eval_derivative: x order " << beta.order() << " exceeds exact support ("
       << a.exact_x_order << ") and the fallback limit (" << kFdOrderLimit << ")";
    throw Error::capability(os.str());
  }

  const MultiIndex ea = exact_xi ? alpha : MultiIndex{};
  const MultiIndex eb = exact_x ? beta : MultiIndex{};
  std::vector<std::pair<bool, int>> vars;
  for (int axis = 0; axis < 2; ++axis) {
    for (int r = 0; r < alpha.c[axis] - ea.c[axis]; ++r) vars.emplace_back(true, axis);
    for (int r = 0; r < beta.c[axis] - eb.c[axis]; ++r) vars.emplace_back(false, axis);
  }
  const auto base = [&](const Point& xb, const Point& xib) {
    if (ea.order() > 0 || eb.order() > 0) return a.derivative(ea, eb, xb, xib);
    return a.evaluate(xb, xib);
  };
  const double scale = 1.0 + norm2(xi);
  const double hxi = 1e-4 * std::pow(scale, geo.rho);
  const double hx = 1e-4 * std::pow(scale, -geo.delta);
  return fd_nest(base, vars, 0, x, xi, hx, hxi);
}

int MiyachiSpec::k() const { return static_cast<int>(std::ceil(kappa)) - 1; }
int MiyachiSpec::k_prime() const { return static_cast<int>(std::ceil(kappa_prime)) - 1; }

namespace {

struct LevelSamples {
  std::vector<Point> xi_points;
  std::vector<Point> x_points;
  std::vector<double> step_fracs;
  std::vector<Point> diff_dirs;
};

void validate_plan(const SamplingPlan& plan) {
  std::ostringstream os;
  if (plan.xi_max <= 0.0) throw Error::parameter("sampling plan: xi_max must be positive");
  if (plan.xi_magnitude_count < 32) {
    os << "sampling plan: need >= 32 xi magnitudes, got " << plan.xi_magnitude_count;
    throw Error::parameter(os.str());
  }
  if (plan.xi_direction_count < 8) {
    os << "sampling plan: need >= 8 xi directions, got " << plan.xi_direction_count;
    throw Error::parameter(os.str());
  }
  if (plan.x_count < 1 || plan.x_extent <= 0.0) {
    throw Error::parameter("sampling plan: x sample set is empty");
  }
  if (plan.step_count < 8) {
    os << "sampling plan: need >= 8 step magnitudes, got " << plan.step_count;
    throw Error::parameter(os.str());
  }
  if (plan.refinement_levels < 2) {
    throw Error::parameter("sampling plan: need >= 2 refinement levels");
  }
  if (!(plan.stability_threshold >= 1.0)) {
    throw Error::parameter("sampling plan: stability threshold must be >= 1");
  }
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(hi);
    return out;
  }
  const double ratio = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(lo * std::exp(ratio * i));
  out.back() = hi;  // pin the endpoint against rounding drift
  return out;
}

LevelSamples build_level(const SamplingPlan& plan, int dimension, int level) {
  LevelSamples s;
  Rng rng(plan.direction_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(level));
  const double xi_max = plan.xi_max * static_cast<double>(1 << level);
  const int mag_count = plan.xi_magnitude_count << level;

  std::vector<Point> dirs;
  if (dimension == 1) {
    dirs = {Point{1.0, 0.0}, Point{-1.0, 0.0}};
  } else {
    const int cnt = plan.xi_direction_count;
    const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi / cnt);
    for (int i = 0; i < cnt; ++i) {
      const double th = offset + 2.0 * std::numbers::pi * i / cnt;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  }

  s.xi_points.push_back({0.0, 0.0});
  for (const double mag : log_spaced(1e-2, xi_max, mag_count - 1)) {
    for (const Point& d : dirs) s.xi_points.push_back({mag * d[0], mag * d[1]});
  }

  s.x_points.push_back({0.0, 0.0});
  const int x_count = plan.x_count << level;
  // Deterministic magnitude ladder first, mirroring the xi schedule: random
  // draws alone can miss a derivative peak at small |x| on coarse levels.
  for (const double mag : log_spaced(1e-2, plan.x_extent, x_count)) {
    if (dimension == 1) {
      s.x_points.push_back({mag, 0.0});
      s.x_points.push_back({-mag, 0.0});
    } else {
      const double diag = mag / std::numbers::sqrt2;
      s.x_points.push_back({mag, 0.0});
      s.x_points.push_back({-mag, 0.0});
      s.x_points.push_back({0.0, mag});
      s.x_points.push_back({0.0, -mag});
      s.x_points.push_back({diag, diag});
    }
  }
  for (int i = 0; i < x_count; ++i) {
    Point p{0.0, 0.0};
    for (int a = 0; a < dimension; ++a) p[a] = rng.uniform(-plan.x_extent, plan.x_extent);
    s.x_points.push_back(p);
  }

  s.step_fracs = log_spaced(1e-3, 1.0, plan.step_count);

  if (dimension == 1) {
    s.diff_dirs = {Point{1.0, 0.0}, Point{-1.0, 0.0}};
  } else {
    const int cnt = plan.xi_direction_count;
    const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi / cnt);
    for (int i = 0; i < cnt; ++i) {
      const double th = offset + 2.0 * std::numbers::pi * i / cnt;
      s.diff_dirs.push_back({std::cos(th), std::sin(th)});
    }
  }
  return s;
}

std::string plan_digest(const SamplingPlan& plan) {
  std::ostringstream os;
  os << "ximax" << plan.xi_max << "-mag" << plan.xi_magnitude_count << "-dir"
     << plan.xi_direction_count << "-x" << plan.x_count << "@" << plan.x_extent << "-s"
     << plan.step_count << "-L" << plan.refinement_levels << "-seed" << plan.direction_seed;
  return os.str();
}

// Folds one sampled ratio into a running sup; non-finite ratios poison the
// constant so the certificate cannot pass.
void fold(double& sup, double ratio) {
  if (!std::isfinite(ratio)) {
    sup = std::numeric_limits<double>::infinity();
  } else {
    sup = std::max(sup, ratio);
  }
}

void finish_report(CertificateReport& report, const SamplingPlan& plan) {
  double worst = 1.0;
  for (const ConditionEstimate& c : report.conditions) {
    const std::size_t L = c.per_level.size();
    const double last = c.per_level[L - 1];
    const double prev = c.per_level[L - 2];
    double f;
    if (prev == 0.0) {
      f = last == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    } else {
      f = last / prev;
    }
    worst = std::max(worst, f);
    if (!std::isfinite(last)) worst = std::numeric_limits<double>::infinity();
  }
  report.stability_factor = worst;
  report.stability_threshold = plan.stability_threshold;
  bool finite = true;
  for (const ConditionEstimate& c : report.conditions) {
    if (!std::isfinite(c.constant())) finite = false;
  }
  report.pass = finite && report.stability_factor <= plan.stability_threshold;
}

}  // namespace

CertificateReport certify_hormander(const Symbol& a, const HormanderSpec& spec,
                                    const SamplingPlan& plan) {
  if (spec.rho < 0.0 || spec.rho > 1.0 || spec.delta < 0.0 || spec.delta > 1.0) {
    throw Error::parameter("certify_hormander: need 0 <= rho, delta <= 1");
  }
  if (spec.K_xi < 0 || spec.K_xi > 4 || spec.K_x < 0 || spec.K_x > 4) {
    throw Error::parameter("certify_hormander: derivative orders must lie in [0, 4]");
  }
  validate_plan(plan);

  const auto alphas = multi_indices_up_to(a.dimension, spec.K_xi);
  const auto betas = multi_indices_up_to(a.dimension, spec.K_x);
  const FdGeometry geo{spec.rho, spec.delta};

  CertificateReport report;
  report.symbol_id = a.id;
  report.class_name = "hormander";
  {
    std::ostringstream os;
    os << "m=" << spec.m << " rho=" << spec.rho << " delta=" << spec.delta
       << " K_xi=" << spec.K_xi << " K_x=" << spec.K_x;
    report.spec_desc = os.str();
  }
  report.plan_digest = plan_digest(plan);
  for (const MultiIndex& alpha : alphas) {
    for (const MultiIndex& beta : betas) {
      report.conditions.push_back({"C[a=" + multi_index_str(alpha, a.dimension) +
                                       ",b=" + multi_index_str(beta, a.dimension) + "]",
                                   {}});
    }
  }

  std::vector<double> sup(report.conditions.size(), 0.0);
  for (int level = 0; level < plan.refinement_levels; ++level) {
    const LevelSamples samples = build_level(plan, a.dimension, level);
    for (const Point& xi : samples.xi_points) {
      const double base = 1.0 + norm2(xi);
      for (const Point& x : samples.x_points) {
        std::size_t cond = 0;
        for (const MultiIndex& alpha : alphas) {
          for (const MultiIndex& beta : betas) {
            const Complex d = eval_derivative(a, alpha, beta, x, xi, geo);
            const double denom =
                std::pow(base, spec.m - spec.rho * alpha.order() + spec.delta * beta.order());
            fold(sup[cond], std::abs(d) / denom);
            ++report.sample_count;
            ++cond;
          }
        }
      }
    }
    for (std::size_t c = 0; c < sup.size(); ++c) report.conditions[c].per_level.push_back(sup[c]);
  }
  finish_report(report, plan);
  return report;
}

namespace {

// Tap weights for first and second forward differences.
const std::vector<std::pair<int, double>> kDiff1{{1, 1.0}, {0, -1.0}};
const std::vector<std::pair<int, double>> kDiff2{{2, 1.0}, {1, -2.0}, {0, 1.0}};

bool is_integer(double v) { return v == std::floor(v); }

}  // namespace

CertificateReport certify_miyachi(const Symbol& a, const MiyachiSpec& spec,
                                  const SamplingPlan& plan) {
  if (spec.rho < 0.0 || spec.rho > 1.0 || spec.delta < 0.0 || spec.delta > 1.0) {
    throw Error::parameter("certify_miyachi: need 0 <= rho, delta <= 1");
  }
  if (!(spec.kappa > 0.0) || !(spec.kappa_prime > 0.0)) {
    throw Error::parameter("certify_miyachi: need kappa, kappa' > 0");
  }
  validate_plan(plan);

  const int k = spec.k();
  const int kp = spec.k_prime();
  if (k > 4 || kp > 4) {
    throw Error::parameter("certify_miyachi: kappa orders above 4 are not supported");
  }
  const auto& x_taps = is_integer(spec.kappa) ? kDiff2 : kDiff1;
  const auto& xi_taps = is_integer(spec.kappa_prime) ? kDiff2 : kDiff1;
  const auto alphas_all = multi_indices_up_to(a.dimension, kp);
  const auto betas_all = multi_indices_up_to(a.dimension, k);
  std::vector<MultiIndex> alphas_top, betas_top;
  for (const auto& m : alphas_all) {
    if (m.order() == kp) alphas_top.push_back(m);
  }
  for (const auto& m : betas_all) {
    if (m.order() == k) betas_top.push_back(m);
  }
  const FdGeometry geo{spec.rho, spec.delta};

  CertificateReport report;
  report.symbol_id = a.id;
  report.class_name = "miyachi";
  {
    std::ostringstream os;
    os << "m=" << spec.m << " rho=" << spec.rho << " delta=" << spec.delta
       << " kappa=" << spec.kappa << " kappa'=" << spec.kappa_prime << " k=" << k
       << " k'=" << kp;
    report.spec_desc = os.str();
  }
  report.plan_digest = plan_digest(plan);
  report.conditions = {{"i", {}}, {"ii", {}}, {"iii", {}}, {"iv", {}}};

  std::array<double, 4> sup{0.0, 0.0, 0.0, 0.0};
  for (int level = 0; level < plan.refinement_levels; ++level) {
    const LevelSamples samples = build_level(plan, a.dimension, level);
    for (const Point& xi : samples.xi_points) {
      const double base = 1.0 + norm2(xi);
      const double h_cap = std::pow(base, -spec.delta);
      const double eta_cap = std::pow(base, spec.rho) / 4.0;
      for (const Point& x : samples.x_points) {
        const auto deriv = [&](const MultiIndex& alpha, const MultiIndex& beta,
                               const Point& xs, const Point& xis) {
          return eval_derivative(a, alpha, beta, xs, xis, geo);
        };

        // (i): plain derivative bounds
        for (const MultiIndex& alpha : alphas_all) {
          for (const MultiIndex& beta : betas_all) {
            const double denom = std::pow(
                base, spec.m + spec.delta * beta.order() - spec.rho * alpha.order());
            fold(sup[0], std::abs(deriv(alpha, beta, x, xi)) / denom);
            ++report.sample_count;
          }
        }

        // (ii): x-differences of top-order-in-x derivatives
        for (const MultiIndex& alpha : alphas_all) {
          const double denom_pow =
              std::pow(base, spec.m + spec.delta * spec.kappa - spec.rho * alpha.order());
          for (const MultiIndex& beta : betas_top) {
            for (const Point& dir : samples.diff_dirs) {
              for (const double frac : samples.step_fracs) {
                const double hmag = frac * h_cap;
                Complex acc(0.0, 0.0);
                for (const auto& [mult, w] : x_taps) {
                  const Point xs{x[0] + mult * hmag * dir[0], x[1] + mult * hmag * dir[1]};
                  acc += w * deriv(alpha, beta, xs, xi);
                }
                const double denom = denom_pow * std::pow(hmag, spec.kappa - k);
                fold(sup[1], std::abs(acc) / denom);
                ++report.sample_count;
              }
            }
          }
        }

        // (iii): xi-differences of top-order-in-xi derivatives
        for (const MultiIndex& beta : betas_all) {
          const double denom_pow =
              std::pow(base, spec.m + spec.delta * beta.order() - spec.rho * spec.kappa_prime);
          for (const MultiIndex& alpha : alphas_top) {
            for (const Point& dir : samples.diff_dirs) {
              for (const double frac : samples.step_fracs) {
                const double emag = frac * eta_cap;
                Complex acc(0.0, 0.0);
                for (const auto& [mult, w] : xi_taps) {
                  const Point xis{xi[0] + mult * emag * dir[0], xi[1] + mult * emag * dir[1]};
                  acc += w * deriv(alpha, beta, x, xis);
                }
                const double denom = denom_pow * std::pow(emag, spec.kappa_prime - kp);
                fold(sup[2], std::abs(acc) / denom);
                ++report.sample_count;
              }
            }
          }
        }

        // (iv): mixed differences at both top orders. Directions for h and
        // eta are paired (aligned and one-step rotated) rather than fully
        // crossed; the cross product is quadratic in the direction count for
        // no extra coverage of the magnitude scales the bound tests.
        const double denom_iv_pow = std::pow(
            base, spec.m + spec.delta * spec.kappa - spec.rho * spec.kappa_prime);
        const std::size_t dir_count = samples.diff_dirs.size();
        for (const MultiIndex& alpha : alphas_top) {
          for (const MultiIndex& beta : betas_top) {
            for (std::size_t di = 0; di < 2 * dir_count; ++di) {
              const Point& dir_h = samples.diff_dirs[di % dir_count];
              const Point& dir_e = samples.diff_dirs[(di % dir_count + di / dir_count) %
                                                     dir_count];
              for (const double frac_h : samples.step_fracs) {
                const double hmag = frac_h * h_cap;
                for (const double frac_e : samples.step_fracs) {
                  const double emag = frac_e * eta_cap;
                  Complex acc(0.0, 0.0);
                  for (const auto& [mx, wx] : x_taps) {
                    const Point xs{x[0] + mx * hmag * dir_h[0], x[1] + mx * hmag * dir_h[1]};
                    for (const auto& [me, we] : xi_taps) {
                      const Point xis{xi[0] + me * emag * dir_e[0],
                                      xi[1] + me * emag * dir_e[1]};
                      acc += wx * we * deriv(alpha, beta, xs, xis);
                    }
                  }
                  const double denom = denom_iv_pow * std::pow(hmag, spec.kappa - k) *
                                       std::pow(emag, spec.kappa_prime - kp);
                  fold(sup[3], std::abs(acc) / denom);
                  ++report.sample_count;
                }
              }
            }
          }
        }
      }
    }
    for (int c = 0; c < 4; ++c) report.conditions[c].per_level.push_back(sup[c]);
  }
  finish_report(report, plan);
  return report;
}

double miyachi_norm(const CertificateReport& report) {
  if (report.class_name != "miyachi") {
    throw Error::parameter("miyachi_norm: report is not a Miyachi certificate");
  }
  if (!report.pass) {
    throw Error::norm_undefined("miyachi_norm: certificate for " + report.symbol_id +
                                " did not pass");
  }
  double norm = 0.0;
  for (const ConditionEstimate& c : report.conditions) norm = std::max(norm, c.constant());
  return norm;
}

InclusionResult check_inclusion(const Symbol& a, const MiyachiSpec& strong,
                                const MiyachiSpec& weak, const SamplingPlan& plan,
                                double max_ratio) {
  if (weak.kappa > strong.kappa || weak.kappa_prime > strong.kappa_prime) {
    throw Error::parameter(
        "check_inclusion: the weak spec must have kappa orders <= the strong spec");
  }
  if (weak.m != strong.m || weak.rho != strong.rho || weak.delta != strong.delta) {
    throw Error::parameter("check_inclusion: specs must share (m, rho, delta)");
  }
  InclusionResult r;
  r.strong = certify_miyachi(a, strong, plan);
  r.weak = certify_miyachi(a, weak, plan);
  if (!r.strong.pass) {
    r.ok = true;  // inclusion claims nothing when the stronger class rejects
    return r;
  }
  r.norm_strong = miyachi_norm(r.strong);
  if (!r.weak.pass) {
    r.ok = false;
    return r;
  }
  r.norm_weak = miyachi_norm(r.weak);
  if (r.norm_strong == 0.0) {
    r.ratio = r.norm_weak == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    r.ratio = r.norm_weak / r.norm_strong;
  }
  r.ok = r.norm_weak <= max_ratio * r.norm_strong ||
         (r.norm_strong == 0.0 && r.norm_weak == 0.0);
  return r;
}

std::string CertificateReport::to_json() const {
  nlohmann::json doc;
  doc["symbol"] = symbol_id;
  doc["class"] = class_name;
  doc["spec"] = spec_desc;
  doc["plan"] = plan_digest;
  doc["sample_count"] = sample_count;
  doc["stability_factor"] = stability_factor;
  doc["stability_threshold"] = stability_threshold;
  doc["pass"] = pass;
  nlohmann::json conds = nlohmann::json::array();
  for (const ConditionEstimate& c : conditions) {
    conds.push_back({{"label", c.label}, {"per_level", c.per_level}, {"constant", c.constant()}});
  }
  doc["conditions"] = conds;
  return doc.dump(2);
}

}  // namespace psb
