#pragma once

#include <functional>
#include <string>
#include <vector>

#include "psb/grid.hpp"
#include "psb/symbols.hpp"

namespace psb {

enum class ApplyPath { automatic, multiplier, full };

struct ApplyOptions {
  ApplyPath path = ApplyPath::automatic;
  // Nodes per block in the full quadrature sweep; 0 processes everything
  // in one pass. Blocking changes the footprint, never the values.
  int chunk = 0;
};

/// Fourier multiplier fast path: a must not depend on x.
GridFunction apply_multiplier(const Symbol& a, const GridFunction& f);

/// Op(a)f(x_j) = (2 pi)^-n dxi^n sum_k a(x_j, xi_k) fhat(xi_k) e^{i<x_j, xi_k>},
/// dispatching to the multiplier path when the symbol allows it.
GridFunction apply_op(const Symbol& a, const GridFunction& f, const ApplyOptions& opts = {});

/// Largest norm ratio ||Op(a) f|| / ||f|| over a family of test functions.
struct OpNormWitness {
  double ratio = 0.0;
  std::string witness_id;
  int skipped = 0;  // members whose input norm vanished
};
OpNormWitness op_norm_witness(const Symbol& a, const std::vector<FamilyMember>& family,
                              const std::function<double(const GridFunction&)>& norm,
                              const ApplyOptions& opts = {});

}  // namespace psb
