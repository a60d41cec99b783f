#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "psb/grid.hpp"

namespace psb {

struct MultiIndex {
  std::array<int, 2> c{0, 0};
  int order() const { return c[0] + c[1]; }
  bool operator==(const MultiIndex&) const = default;
};

std::string multi_index_str(const MultiIndex& m, int dimension);

/// All multi-indices over `dimension` axes with order <= max_order,
/// enumerated by total order then lexicographically.
std::vector<MultiIndex> multi_indices_up_to(int dimension, int max_order);

/// Exact-derivative engine: finite sums of c * v^e * (1 + |v|^2)^s are
/// closed under partial differentiation, which covers the whole catalog.
struct PowerTerm {
  double coeff = 0.0;
  std::array<int, 2> expo{0, 0};
  double s = 0.0;
};
using PowerSum = std::vector<PowerTerm>;

PowerSum power_derivative(const PowerSum& p, int axis);
double power_eval(const PowerSum& p, const Point& v, int dimension);

using SymbolParams = std::map<std::string, double>;

/// Symbol a(x, xi). `evaluate` is total; `derivative` (optional) returns
/// exact partials for |alpha| <= exact_xi_order, |beta| <= exact_x_order.
struct Symbol {
  std::string id;
  SymbolParams params;
  int dimension = 1;
  bool x_independent = false;
  int exact_x_order = 0;
  int exact_xi_order = 0;
  std::function<Complex(const Point& x, const Point& xi)> evaluate;
  std::function<Complex(const MultiIndex& alpha, const MultiIndex& beta, const Point& x,
                        const Point& xi)>
      derivative;
};

/// Catalog ids: one, bessel_multiplier (param m), smoothed_sign,
/// modulated (param m), holder_rough (params kappa > 0, kappa2 >= 0).
Symbol catalog_symbol(const std::string& id, const SymbolParams& params, int dimension);

/// a(xi) = xi_1; the standard example of a symbol outside S^0.
Symbol coordinate_symbol(int dimension);

Symbol scale_symbol(const Symbol& a, double c);
Symbol add_symbols(const Symbol& a, const Symbol& b);

/// Scaling of finite-difference steps to the class geometry: steps in xi
/// grow like (1+|xi|)^rho, steps in x shrink like (1+|xi|)^-delta.
struct FdGeometry {
  double rho = 0.0;
  double delta = 0.0;
};

/// Exact derivative when declared, otherwise second-order central
/// differences with one Richardson step. Orders above 4 per variable
/// without an exact evaluator raise a capability error.
Complex eval_derivative(const Symbol& a, const MultiIndex& alpha, const MultiIndex& beta,
                        const Point& x, const Point& xi, const FdGeometry& geo = {});

struct HormanderSpec {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  int K_xi = 2;
  int K_x = 2;
};

struct MiyachiSpec {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  double kappa = 1.0;
  double kappa_prime = 1.0;
  int k() const;        // k < kappa <= k+1
  int k_prime() const;  // k' < kappa' <= k'+1
};

/// How the certifiers sample. Each refinement level doubles the magnitude
/// ceiling and the frequency/x sample counts; reported constants are
/// cumulative sups, so they never decrease across levels.
struct SamplingPlan {
  double xi_max = 64.0;         // magnitude ceiling at level 0
  int xi_magnitude_count = 48;  // log-spaced magnitudes per level (>= 32)
  int xi_direction_count = 8;   // n = 2 equiangular count; n = 1 uses {-1,+1}
  int x_count = 12;             // random x points per level (origin always added)
  double x_extent = 8.0;        // x sampled in [-x_extent, x_extent]^n
  int step_count = 8;           // log-spaced |h|, |eta| fractions (>= 8)
  std::uint64_t direction_seed = 1234;
  int refinement_levels = 3;
  double stability_threshold = 1.5;
};

struct ConditionEstimate {
  std::string label;
  std::vector<double> per_level;  // cumulative sup after each level
  double constant() const { return per_level.empty() ? 0.0 : per_level.back(); }
};

struct CertificateReport {
  std::string symbol_id;
  std::string class_name;  // "hormander" or "miyachi"
  std::string spec_desc;
  std::string plan_digest;
  std::vector<ConditionEstimate> conditions;
  std::size_t sample_count = 0;
  double stability_factor = 0.0;
  double stability_threshold = 0.0;
  bool pass = false;

  std::string to_json() const;
};

CertificateReport certify_hormander(const Symbol& a, const HormanderSpec& spec,
                                    const SamplingPlan& plan);

CertificateReport certify_miyachi(const Symbol& a, const MiyachiSpec& spec,
                                  const SamplingPlan& plan);

/// Largest per-condition constant of a passing Miyachi certificate.
double miyachi_norm(const CertificateReport& report);

struct InclusionResult {
  bool ok = false;
  double norm_strong = 0.0;  // certified at (kappa_1, kappa_1')
  double norm_weak = 0.0;    // certified at (kappa_2, kappa_2')
  double ratio = 0.0;        // norm_weak / norm_strong
  CertificateReport strong;
  CertificateReport weak;
};

/// Samples the inclusion S(k1, k1') into S(k2, k2') for k2 <= k1: a pass
/// under the stronger spec must yield a pass under the weaker one with
/// norm_weak <= max_ratio * norm_strong. Vacuously true if the stronger
/// certification fails.
InclusionResult check_inclusion(const Symbol& a, const MiyachiSpec& strong,
                                const MiyachiSpec& weak, const SamplingPlan& plan,
                                double max_ratio = 10.0);

}  // namespace psb
