#include "psb/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "psb/random.hpp"

namespace psb {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Gaussian tails: |e^{-d^2/(2w^2)}| <= 1e-12 needs d >= w*sqrt(-2 ln 1e-12).
constexpr double kGaussianDecayRadii = 7.4343;  // sqrt(55.262...)

std::string point_str(const GridSpec& spec, const Point& p) {
  std::ostringstream os;
  os << "(" << p[0];
  if (spec.dimension == 2) os << ", " << p[1];
  os << ")";
  return os.str();
}

// (-1)^{sum_a k_a} for the stored frequency index (k_a = j_a - N/2); used to
// fold the [-L, L) offset and the ascending-k layout into a plain DFT.
double checker_sign(const GridSpec& spec, std::size_t idx) {
  const auto j = spec.unravel(idx);
  int parity = 0;
  for (int a = 0; a < spec.dimension; ++a) parity += j[a] + spec.points_per_axis / 2;
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

GridFunction run_fft(const GridFunction& f, int sign) {
  const GridSpec& spec = f.spec;
  const int n = spec.points_per_axis;
  std::vector<Complex> in(f.size()), out(f.size());

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto* fin = reinterpret_cast<fftw_complex*>(in.data());
    auto* fout = reinterpret_cast<fftw_complex*>(out.data());
    plan = (spec.dimension == 1)
               ? fftw_plan_dft_1d(n, fin, fout, sign, FFTW_ESTIMATE)
               : fftw_plan_dft_2d(n, n, fin, fout, sign, FFTW_ESTIMATE);
  }

  if (sign == FFTW_FORWARD) {
    // DFT index (j + N/2) mod N holds frequency slot j; fill input as-is.
    std::copy(f.values.begin(), f.values.end(), in.begin());
  } else {
    // Pre-apply the sign and reshuffle ascending-k storage into DFT order.
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const auto j = spec.unravel(idx);
      const int d0 = (j[0] + n / 2) % n;
      const int d1 = spec.dimension == 2 ? (j[1] + n / 2) % n : 0;
      const std::size_t dft_idx =
          spec.dimension == 1 ? static_cast<std::size_t>(d0) : spec.ravel(d0, d1);
      in[dft_idx] = checker_sign(spec, idx) * f.values[idx];
    }
  }

  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }

  GridFunction result{spec, sign == FFTW_FORWARD ? Domain::frequency : Domain::space, {}};
  result.values.resize(f.size());
  if (sign == FFTW_FORWARD) {
    const double scale = spec.cell_volume();
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const auto j = spec.unravel(idx);
      const int d0 = (j[0] + n / 2) % n;
      const int d1 = spec.dimension == 2 ? (j[1] + n / 2) % n : 0;
      const std::size_t dft_idx =
          spec.dimension == 1 ? static_cast<std::size_t>(d0) : spec.ravel(d0, d1);
      result.values[idx] = scale * checker_sign(spec, idx) * out[dft_idx];
    }
  } else {
    double scale = 1.0;
    for (int a = 0; a < spec.dimension; ++a) scale /= n * spec.dx();
    for (std::size_t idx = 0; idx < f.size(); ++idx) result.values[idx] = scale * out[idx];
  }
  return result;
}

}  // namespace

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dimension; ++a) v *= dx();
  return v;
}

std::size_t GridSpec::node_count() const {
  std::size_t c = 1;
  for (int a = 0; a < dimension; ++a) c *= static_cast<std::size_t>(points_per_axis);
  return c;
}

std::array<int, 2> GridSpec::unravel(std::size_t idx) const {
  if (dimension == 1) return {static_cast<int>(idx), 0};
  const int n = points_per_axis;
  return {static_cast<int>(idx) / n, static_cast<int>(idx) % n};
}

std::size_t GridSpec::ravel(int j0, int j1) const {
  if (dimension == 1) return static_cast<std::size_t>(j0);
  return static_cast<std::size_t>(j0) * points_per_axis + static_cast<std::size_t>(j1);
}

Point GridSpec::node_point(std::size_t idx) const {
  const auto j = unravel(idx);
  return {x(j[0]), dimension == 2 ? x(j[1]) : 0.0};
}

Point GridSpec::frequency_point(std::size_t idx) const {
  const auto j = unravel(idx);
  return {xi(j[0]), dimension == 2 ? xi(j[1]) : 0.0};
}

GridSpec make_grid(int dimension, double half_extent, int points_per_axis) {
  std::ostringstream os;
  if (dimension != 1 && dimension != 2) {
    os << "make_grid: dimension must be 1 or 2, got " << dimension;
    throw Error::parameter(os.str());
  }
  if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
    os << "make_grid: half_extent must be positive and finite, got " << half_extent;
    throw Error::parameter(os.str());
  }
  if (points_per_axis < 16 || points_per_axis % 2 != 0) {
    os << "make_grid: points_per_axis must be even and >= 16, got " << points_per_axis;
    throw Error::parameter(os.str());
  }
  return GridSpec{dimension, half_extent, points_per_axis};
}

GridFunction sample(const GridSpec& spec, const PointFn& f) {
  GridFunction out{spec, Domain::space, {}};
  out.values.resize(spec.node_count());
  for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
    const Point p = spec.node_point(idx);
    const Complex v = f(p);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error::sampling("sample: evaluator returned non-finite value at node " +
                            point_str(spec, p));
    }
    out.values[idx] = v;
  }
  return out;
}

GridFunction forward_transform(const GridFunction& f) {
  if (f.domain != Domain::space) {
    throw Error::parameter("forward_transform: input must be a spatial GridFunction");
  }
  check_finite(f, "forward_transform");
  return run_fft(f, FFTW_FORWARD);
}

GridFunction inverse_transform(const GridFunction& g) {
  if (g.domain != Domain::frequency) {
    throw Error::parameter("inverse_transform: input must be a frequency GridFunction");
  }
  check_finite(g, "inverse_transform");
  return run_fft(g, FFTW_BACKWARD);
}

std::string family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian_pack: return "gaussian-pack";
    case FamilyKind::smooth_bump: return "smooth-bump";
    case FamilyKind::bandlimited_random: return "bandlimited-random";
  }
  return "?";
}

namespace {

FamilyParams resolve_params(const GridSpec& spec, const TestFamilySpec& fam) {
  FamilyParams p = fam.params;
  const double L = spec.half_extent;
  // Default widths scale with the box but never drop below what the grid
  // resolves; a bump narrower than a cell diagonal can miss every node.
  const double diag = spec.dx() * std::sqrt(static_cast<double>(spec.dimension));
  const bool bump = fam.kind == FamilyKind::smooth_bump;
  double floor_min = bump ? 2.5 * diag : 0.6 * spec.dx();
  double floor_max = bump ? 3.5 * diag : 0.9 * spec.dx();
  if (!bump) {
    // Keep Gaussian tails below 1e-12 at |x| = L/2 even on coarse grids.
    floor_min = std::min(floor_min, L / 16.0);
    floor_max = std::min(floor_max, L / 15.0);
  }
  if (p.width_min <= 0.0) p.width_min = std::max(L / 40.0, floor_min);
  if (p.width_max <= 0.0) p.width_max = std::max({L / 20.0, floor_max, p.width_min});
  if (p.modulation_max < 0.0) p.modulation_max = spec.xi_max() / 4.0;
  if (p.center_halfwidth < 0.0) {
    const double margin = fam.kind == FamilyKind::smooth_bump
                              ? p.width_max
                              : kGaussianDecayRadii * p.width_max;
    p.center_halfwidth = std::max(0.0, L / 2.0 - margin);
  }
  return p;
}

void validate_params(const GridSpec& spec, const TestFamilySpec& fam, const FamilyParams& p) {
  std::ostringstream os;
  if (fam.count < 1) {
    os << "generate_family: count must be positive, got " << fam.count;
    throw Error::parameter(os.str());
  }
  if (!(p.width_min > 0.0) || !(p.width_max >= p.width_min)) {
    os << "generate_family: need 0 < width_min <= width_max, got [" << p.width_min << ", "
       << p.width_max << "]";
    throw Error::parameter(os.str());
  }
  const double L = spec.half_extent;
  if (fam.kind == FamilyKind::bandlimited_random) {
    if (!(p.band_fraction > 0.0) || p.band_fraction > 1.0) {
      os << "generate_family: band_fraction must lie in (0, 1], got " << p.band_fraction;
      throw Error::parameter(os.str());
    }
    return;
  }
  // Support confinement in [-L/2, L/2]^n: bumps vanish outside radius w,
  // Gaussians drop below 1e-12 relative outside ~7.43 widths.
  const double margin = fam.kind == FamilyKind::smooth_bump ? p.width_max
                                                            : kGaussianDecayRadii * p.width_max;
  if (p.center_halfwidth + margin > L / 2.0 + 1e-12 * L) {
    os << "generate_family: " << family_kind_name(fam.kind) << " support reaches |x| = "
       << p.center_halfwidth + margin << " > L/2 = " << L / 2.0
       << "; shrink widths or centers";
    throw Error::parameter(os.str());
  }
}

GridFunction normalize_sup(GridFunction f, const std::string& id) {
  const double s = sup_norm(f);
  if (s <= 0.0) {
    throw Error::degenerate_family("generate_family: member " + id + " is identically zero");
  }
  for (auto& v : f.values) v /= s;
  return f;
}

GridFunction make_gaussian(const GridSpec& spec, Rng& rng, const FamilyParams& p) {
  const int n = spec.dimension;
  const double w = rng.uniform(p.width_min, p.width_max);
  Point c{0.0, 0.0};
  for (int a = 0; a < n; ++a) c[a] = rng.uniform(-p.center_halfwidth, p.center_halfwidth);
  Point theta{0.0, 0.0};
  for (int a = 0; a < n; ++a) theta[a] = rng.uniform(-p.modulation_max, p.modulation_max);
  return sample(spec, [&](const Point& x) {
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = x[a] - c[a];
      r2 += d * d;
      phase += theta[a] * x[a];
    }
    return std::exp(-r2 / (2.0 * w * w)) * Complex(std::cos(phase), std::sin(phase));
  });
}

GridFunction make_bump(const GridSpec& spec, Rng& rng, const FamilyParams& p) {
  const int n = spec.dimension;
  const double w = rng.uniform(p.width_min, p.width_max);
  Point c{0.0, 0.0};
  for (int a = 0; a < n; ++a) c[a] = rng.uniform(-p.center_halfwidth, p.center_halfwidth);
  return sample(spec, [&](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = (x[a] - c[a]) / w;
      r2 += d * d;
    }
    if (r2 >= 1.0) return Complex(0.0, 0.0);
    return Complex(std::exp(-1.0 / (1.0 - r2)), 0.0);
  });
}

GridFunction make_bandlimited(const GridSpec& spec, Rng& rng, const FamilyParams& p) {
  GridFunction hat{spec, Domain::frequency, {}};
  hat.values.assign(spec.node_count(), Complex(0.0, 0.0));
  const double cutoff = p.band_fraction * spec.xi_max();
  for (std::size_t idx = 0; idx < hat.values.size(); ++idx) {
    const Point xi = spec.frequency_point(idx);
    const double mag = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
    if (mag <= cutoff) {
      hat.values[idx] = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
  }
  return inverse_transform(hat);
}

}  // namespace

std::vector<FamilyMember> generate_family(const GridSpec& spec, const TestFamilySpec& fam) {
  const FamilyParams p = resolve_params(spec, fam);
  validate_params(spec, fam, p);
  Rng rng(fam.seed);
  std::vector<FamilyMember> out;
  out.reserve(fam.count);
  for (int i = 0; i < fam.count; ++i) {
    std::ostringstream id;
    id << family_kind_name(fam.kind) << "-" << fam.seed << "-" << i;
    GridFunction f;
    switch (fam.kind) {
      case FamilyKind::gaussian_pack: f = make_gaussian(spec, rng, p); break;
      case FamilyKind::smooth_bump: f = make_bump(spec, rng, p); break;
      case FamilyKind::bandlimited_random: f = make_bandlimited(spec, rng, p); break;
    }
    out.push_back({id.str(), normalize_sup(std::move(f), id.str())});
  }
  return out;
}

double sup_norm(const GridFunction& f) {
  double s = 0.0;
  for (const auto& v : f.values) s = std::max(s, std::abs(v));
  return s;
}

void check_finite(const GridFunction& f, const char* where) {
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const Complex v = f.values[idx];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << where << ": non-finite value at flat index " << idx;
      throw Error::compute(os.str());
    }
  }
}

}  // namespace psb
