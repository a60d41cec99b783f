#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "psb/errors.hpp"

namespace psb {

using Complex = std::complex<double>;

/// Coordinate vector; entries [0, n) are meaningful, the rest are zero.
using Point = std::array<double, 2>;

/// Uniform grid on [-L, L)^n, n in {1, 2}, N even points per axis.
///
/// Spatial nodes   x_j  = -L + j*dx,          j = 0..N-1,  dx  = 2L/N
/// Frequency nodes xi_k = (pi/L)*k,           k = -N/2..N/2-1, dxi = pi/L
/// so dx * dxi * N = 2*pi. Frequency storage is by ascending k, row-major.
struct GridSpec {
  int dimension = 1;
  double half_extent = 1.0;
  int points_per_axis = 16;

  double dx() const { return 2.0 * half_extent / points_per_axis; }
  double dxi() const { return std::numbers::pi / half_extent; }
  double cell_volume() const;  // dx^n
  std::size_t node_count() const;

  double x(int j) const { return -half_extent + j * dx(); }
  double xi(int j) const { return dxi() * (j - points_per_axis / 2); }
  double xi_max() const { return dxi() * (points_per_axis / 2); }

  std::array<int, 2> unravel(std::size_t idx) const;
  std::size_t ravel(int j0, int j1) const;
  Point node_point(std::size_t idx) const;
  Point frequency_point(std::size_t idx) const;

  bool operator==(const GridSpec&) const = default;
};

enum class Domain { space, frequency };

/// Complex samples on a grid, row-major by axis order.
struct GridFunction {
  GridSpec spec;
  Domain domain = Domain::space;
  std::vector<Complex> values;

  std::size_t size() const { return values.size(); }
  Complex& operator[](std::size_t i) { return values[i]; }
  const Complex& operator[](std::size_t i) const { return values[i]; }
};

GridSpec make_grid(int dimension, double half_extent, int points_per_axis);

using PointFn = std::function<Complex(const Point&)>;

/// Samples f at every spatial node; rejects non-finite values.
GridFunction sample(const GridSpec& spec, const PointFn& f);

/// u_hat(xi_k) = dx^n * sum_m u(x_m) exp(-i<x_m, xi_k>), via FFT.
GridFunction forward_transform(const GridFunction& f);

/// u(x_m) = (2 pi)^-n * dxi^n * sum_k u_hat(xi_k) exp(+i<x_m, xi_k>); exact
/// inverse of forward_transform up to rounding.
GridFunction inverse_transform(const GridFunction& g);

enum class FamilyKind { gaussian_pack, smooth_bump, bandlimited_random };

std::string family_kind_name(FamilyKind kind);

/// Kind-specific generation parameters. Non-positive entries select
/// defaults scaled to the grid half-extent.
struct FamilyParams {
  double width_min = 0.0;
  double width_max = 0.0;
  double center_halfwidth = -1.0;
  double modulation_max = -1.0;
  double band_fraction = 0.125;
};

struct TestFamilySpec {
  FamilyKind kind = FamilyKind::gaussian_pack;
  int count = 1;
  std::uint64_t seed = 0;
  FamilyParams params;
};

struct FamilyMember {
  std::string id;
  GridFunction f;
};

/// Deterministic test-function family. gaussian_pack and smooth_bump members
/// are confined (to 1e-12 relative) inside [-L/2, L/2]^n; bandlimited_random
/// members are exactly band-limited on the discrete frequency grid instead.
/// Every member is normalized to unit sup-norm.
std::vector<FamilyMember> generate_family(const GridSpec& spec, const TestFamilySpec& fam);

double sup_norm(const GridFunction& f);

void check_finite(const GridFunction& f, const char* where);

}  // namespace psb
