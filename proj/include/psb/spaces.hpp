#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "psb/grid.hpp"

namespace psb {

using ExponentParams = std::map<std::string, double>;

/// A variable Lebesgue exponent p(.) together with its declared bounds.
/// Admissible exponents satisfy 1 < p_minus <= p_plus < infinity, and the
/// evaluator must stay inside [p_minus, p_plus] wherever it is sampled.
struct ExponentFunction {
  std::string id;
  ExponentParams params;
  int dimension = 1;
  double p_minus = 2.0;
  double p_plus = 2.0;
  double p_infinity = 2.0;  // limit used by the decay checks
  std::function<double(const Point&)> evaluate;
};

/// Named exponents: "constant" {p}, "log_decay" {p_inf, amplitude},
/// "loglog_decay" {p_inf, amplitude}, "step" {p_left, p_right}.
ExponentFunction exponent_catalog(const std::string& id, const ExponentParams& params,
                                  int dimension);

/// Checks the declared bounds and samples every grid node against them.
void validate_exponent(const ExponentFunction& p, const GridSpec& spec);

/// rho_p(f/lambda) = dx^n * sum_j |f(x_j)/lambda|^{p(x_j)}.
double modular(const GridFunction& f, const ExponentFunction& p, double lambda);

/// Luxemburg norm: inf { lambda > 0 : rho_p(f/lambda) <= 1 }, located by
/// doubling/halving bracket plus bisection to relative width 1e-12.
double vlp_norm(const GridFunction& f, const ExponentFunction& p);

/// Classical L^p norm (dx^n * sum |f|^p)^{1/p} for constant p in [1, inf).
double constant_norm(const GridFunction& f, double p);

/// Pointwise conjugate p'(x) = p(x)/(p(x)-1); the declared bounds swap.
ExponentFunction conjugate_exponent(const ExponentFunction& p);

/// dx^n * sum_j |f(x_j) g(x_j)|.
double pairing_integral(const GridFunction& f, const GridFunction& g);

/// dx^n * #{ j : |f(x_j)| > lambda }.
double distribution_measure(const GridFunction& f, double lambda);

/// Refinement record for the exponent regularity probes: per_level holds
/// cumulative suprema, growth the last/previous ratio.
struct ExponentCheck {
  std::vector<double> per_level;
  double constant = 0.0;
  double growth = 1.0;
  bool satisfied = false;
};

/// sup |p(x)-p(y)| * log(e + 1/|x-y|) over pair samples whose separation
/// shrinks geometrically level by level.
ExponentCheck check_log_holder_local(const ExponentFunction& p, const GridSpec& spec,
                                     int levels = 4, double growth_threshold = 1.25);

/// sup |p(x)-p_infinity| * log(e + |x|) over magnitudes that square from
/// level to level, starting at base_magnitude.
ExponentCheck check_log_holder_infinity(const ExponentFunction& p, double base_magnitude = 10.0,
                                        int levels = 3, double growth_threshold = 1.25);

/// Integral of c^{1/|p(x)-p_infinity|} over boxes of doubling radius; the
/// integrand is taken as 0 where p(x) = p_infinity. Converged means the
/// box increments fell below 1e-3 relative to the running total.
struct NekvindaResult {
  double integral = 0.0;
  bool converged = false;
  int boxes = 0;
};
NekvindaResult check_nekvinda(const ExponentFunction& p, double c, int max_doublings = 48);

}  // namespace psb
