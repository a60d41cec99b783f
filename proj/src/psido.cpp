#include "psb/psido.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "psb/errors.hpp"

namespace psb {
namespace {

using CReal = std::complex<long double>;

void check_apply_input(const Symbol& a, const GridFunction& f, const char* where) {
  if (a.dimension != f.spec.dimension) {
    std::ostringstream out;
    out << where << ": symbol dimension " << a.dimension << " does not match grid "
        << f.spec.dimension;
    throw Error::parameter(out.str());
  }
  if (f.domain != Domain::space) {
    throw Error::parameter(std::string(where) + ": expects a space-domain function");
  }
  if (!a.evaluate) {
    throw Error::parameter(std::string(where) + ": symbol has no evaluator");
  }
  check_finite(f, where);
}

Complex symbol_value(const Symbol& a, const Point& x, const Point& xi, const char* where) {
  const Complex v = a.evaluate(x, xi);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    std::ostringstream out;
    out << where << ": symbol " << a.id << " is non-finite at x = (" << x[0] << ", " << x[1]
        << "), xi = (" << xi[0] << ", " << xi[1] << ")";
    throw Error::compute(out.str());
  }
  return v;
}

GridFunction apply_full(const Symbol& a, const GridFunction& f, int chunk) {
  const GridSpec& s = f.spec;
  const int n = s.points_per_axis;
  const GridFunction hat = forward_transform(f);

  // e^{i x_j xi_k} split along axes
  std::vector<Complex> phase(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      phase[static_cast<std::size_t>(j) * n + k] = std::polar(1.0, s.x(j) * s.xi(k));
    }
  }

  long double scale = 1.0L;
  for (int axis = 0; axis < s.dimension; ++axis) {
    scale *= static_cast<long double>(s.dxi()) / (2.0L * std::numbers::pi_v<long double>);
  }

  GridFunction out{s, Domain::space, std::vector<Complex>(f.size())};
  const std::size_t total = f.size();
  const std::size_t block = chunk > 0 ? static_cast<std::size_t>(chunk) : total;
  for (std::size_t begin = 0; begin < total; begin += block) {
    const std::size_t end = std::min(total, begin + block);
    for (std::size_t node = begin; node < end; ++node) {
      const Point x = s.node_point(node);
      const auto j = s.unravel(node);
      CReal acc(0.0L, 0.0L);
      if (s.dimension == 1) {
        for (int k = 0; k < n; ++k) {
          const Complex av = symbol_value(a, x, {s.xi(k), 0.0}, "apply_op");
          const Complex ph = phase[static_cast<std::size_t>(j[0]) * n + k];
          const Complex term = av * hat[k] * ph;
          acc += CReal(term.real(), term.imag());
        }
      } else {
        for (int k0 = 0; k0 < n; ++k0) {
          const Complex ph0 = phase[static_cast<std::size_t>(j[0]) * n + k0];
          for (int k1 = 0; k1 < n; ++k1) {
            const Point xi{s.xi(k0), s.xi(k1)};
            const Complex av = symbol_value(a, x, xi, "apply_op");
            const Complex ph = ph0 * phase[static_cast<std::size_t>(j[1]) * n + k1];
            const Complex term = av * hat[static_cast<std::size_t>(k0) * n + k1] * ph;
            acc += CReal(term.real(), term.imag());
          }
        }
      }
      acc *= scale;
      out.values[node] = Complex(static_cast<double>(acc.real()),
                                 static_cast<double>(acc.imag()));
    }
  }
  return out;
}

}  // namespace

GridFunction apply_multiplier(const Symbol& a, const GridFunction& f) {
  check_apply_input(a, f, "apply_multiplier");
  if (!a.x_independent) {
    throw Error::path("apply_multiplier: symbol " + a.id +
                      " depends on x; use the full quadrature path");
  }
  GridFunction hat = forward_transform(f);
  const Point origin{0.0, 0.0};
  for (std::size_t k = 0; k < hat.size(); ++k) {
    hat.values[k] *= symbol_value(a, origin, hat.spec.frequency_point(k), "apply_multiplier");
  }
  return inverse_transform(hat);
}

GridFunction apply_op(const Symbol& a, const GridFunction& f, const ApplyOptions& opts) {
  check_apply_input(a, f, "apply_op");
  if (opts.chunk < 0) {
    throw Error::parameter("apply_op: chunk must be non-negative");
  }
  switch (opts.path) {
    case ApplyPath::multiplier:
      return apply_multiplier(a, f);
    case ApplyPath::full:
      return apply_full(a, f, opts.chunk);
    case ApplyPath::automatic:
      break;
  }
  return a.x_independent ? apply_multiplier(a, f) : apply_full(a, f, opts.chunk);
}

OpNormWitness op_norm_witness(const Symbol& a, const std::vector<FamilyMember>& family,
                              const std::function<double(const GridFunction&)>& norm,
                              const ApplyOptions& opts) {
  if (family.empty()) {
    throw Error::parameter("op_norm_witness: family is empty");
  }
  if (!norm) {
    throw Error::parameter("op_norm_witness: missing norm functional");
  }
  OpNormWitness best;
  bool found = false;
  for (const FamilyMember& member : family) {
    const double denom = norm(member.f);
    if (!(denom > 0.0)) {
      ++best.skipped;
      continue;
    }
    const double numer = norm(apply_op(a, member.f, opts));
    const double ratio = numer / denom;
    if (!found || ratio > best.ratio) {
      best.ratio = ratio;
      best.witness_id = member.id;
      found = true;
    }
  }
  if (!found) {
    throw Error::degenerate_family("op_norm_witness: every member had zero norm");
  }
  return best;
}

}  // namespace psb
