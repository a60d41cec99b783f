#include "psb/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <sstream>
#include <vector>

#include "psb/errors.hpp"

namespace psb {
namespace {

using Real = long double;
using CReal = std::complex<Real>;

void check_family(const GridSpec& spec, const CubeFamilySpec& fam, const char* where) {
  const int w = fam.max_halfwidth_cells;
  if (w < 1 || w > spec.points_per_axis / 2) {
    std::ostringstream out;
    out << where << ": max_halfwidth_cells " << w << " outside [1, "
        << spec.points_per_axis / 2 << "]";
    throw Error::parameter(out.str());
  }
}

void check_space_domain(const GridFunction& f, const char* where) {
  if (f.domain != Domain::space) {
    std::ostringstream out;
    out << where << ": expects a space-domain function";
    throw Error::parameter(out.str());
  }
}

std::vector<int> family_sides(const CubeFamilySpec& fam, bool dyadic) {
  std::vector<int> sides;
  const int max_side = 2 * fam.max_halfwidth_cells;
  if (dyadic) {
    for (int s = 1; s <= max_side; s *= 2) sides.push_back(s);
  } else {
    for (int s = 1; s <= max_side; ++s) sides.push_back(s);
  }
  return sides;
}

// out[j] = max(v[j .. j+window-1]); out.size() == v.size() - window + 1.
void sliding_max(const std::vector<Real>& v, int window, std::vector<Real>& out) {
  const int n = static_cast<int>(v.size());
  out.assign(static_cast<std::size_t>(n - window + 1), 0.0L);
  std::deque<int> best;  // indices with decreasing values
  for (int i = 0; i < n; ++i) {
    while (!best.empty() && v[best.back()] <= v[i]) best.pop_back();
    best.push_back(i);
    while (best.front() <= i - window) best.pop_front();
    if (i >= window - 1) out[i - window + 1] = v[best.front()];
  }
}

// Placement arrays: for side s the admissible window starts are
// p in [1-s, N-1]; index t = p + s - 1 runs over [0, N+s-2]. Windows are
// clipped to the domain and averaged over the intersection.
void window_bounds(int p, int s, int n, int& lo, int& hi) {
  lo = std::max(0, p);
  hi = std::min(n - 1, p + s - 1);
}

void placement_averages_1d(const std::vector<Real>& v, int n, int s, std::vector<Real>& a) {
  std::vector<Real> prefix(static_cast<std::size_t>(n) + 1, 0.0L);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
  a.assign(static_cast<std::size_t>(n + s - 1), 0.0L);
  for (int t = 0; t < n + s - 1; ++t) {
    int lo = 0, hi = 0;
    window_bounds(t - (s - 1), s, n, lo, hi);
    a[t] = (prefix[hi + 1] - prefix[lo]) / static_cast<Real>(hi - lo + 1);
  }
}

void placement_averages_2d(const std::vector<Real>& v, int n, int s, std::vector<Real>& a) {
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  std::vector<Real> prefix(stride * stride, 0.0L);
  for (int i0 = 0; i0 < n; ++i0) {
    Real row = 0.0L;
    for (int i1 = 0; i1 < n; ++i1) {
      row += v[static_cast<std::size_t>(i0) * n + i1];
      prefix[(i0 + 1) * stride + (i1 + 1)] = prefix[i0 * stride + (i1 + 1)] + row;
    }
  }
  const int m = n + s - 1;
  a.assign(static_cast<std::size_t>(m) * m, 0.0L);
  for (int t0 = 0; t0 < m; ++t0) {
    int lo0 = 0, hi0 = 0;
    window_bounds(t0 - (s - 1), s, n, lo0, hi0);
    for (int t1 = 0; t1 < m; ++t1) {
      int lo1 = 0, hi1 = 0;
      window_bounds(t1 - (s - 1), s, n, lo1, hi1);
      const Real sum = prefix[(hi0 + 1) * stride + (hi1 + 1)] -
                       prefix[lo0 * stride + (hi1 + 1)] -
                       prefix[(hi0 + 1) * stride + lo1] + prefix[lo0 * stride + lo1];
      const Real count = static_cast<Real>((hi0 - lo0 + 1) * (hi1 - lo1 + 1));
      a[static_cast<std::size_t>(t0) * m + t1] = sum / count;
    }
  }
}

// Mean oscillation per placement: mean of |f - f_Q| over the clipped window.
void placement_oscillation_1d(const std::vector<Complex>& f, int n, int s,
                              std::vector<Real>& a) {
  std::vector<CReal> prefix(static_cast<std::size_t>(n) + 1, CReal(0.0L, 0.0L));
  for (int i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + CReal(f[i].real(), f[i].imag());
  }
  a.assign(static_cast<std::size_t>(n + s - 1), 0.0L);
  for (int t = 0; t < n + s - 1; ++t) {
    int lo = 0, hi = 0;
    window_bounds(t - (s - 1), s, n, lo, hi);
    const Real count = static_cast<Real>(hi - lo + 1);
    const CReal mean = (prefix[hi + 1] - prefix[lo]) / count;
    Real acc = 0.0L;
    for (int i = lo; i <= hi; ++i) {
      acc += std::abs(CReal(f[i].real(), f[i].imag()) - mean);
    }
    a[t] = acc / count;
  }
}

void placement_oscillation_2d(const std::vector<Complex>& f, int n, int s,
                              std::vector<Real>& a) {
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  std::vector<CReal> prefix(stride * stride, CReal(0.0L, 0.0L));
  for (int i0 = 0; i0 < n; ++i0) {
    CReal row(0.0L, 0.0L);
    for (int i1 = 0; i1 < n; ++i1) {
      const Complex& z = f[static_cast<std::size_t>(i0) * n + i1];
      row += CReal(z.real(), z.imag());
      prefix[(i0 + 1) * stride + (i1 + 1)] = prefix[i0 * stride + (i1 + 1)] + row;
    }
  }
  const int m = n + s - 1;
  a.assign(static_cast<std::size_t>(m) * m, 0.0L);
  for (int t0 = 0; t0 < m; ++t0) {
    int lo0 = 0, hi0 = 0;
    window_bounds(t0 - (s - 1), s, n, lo0, hi0);
    for (int t1 = 0; t1 < m; ++t1) {
      int lo1 = 0, hi1 = 0;
      window_bounds(t1 - (s - 1), s, n, lo1, hi1);
      const Real count = static_cast<Real>((hi0 - lo0 + 1) * (hi1 - lo1 + 1));
      const CReal mean = (prefix[(hi0 + 1) * stride + (hi1 + 1)] -
                          prefix[lo0 * stride + (hi1 + 1)] -
                          prefix[(hi0 + 1) * stride + lo1] + prefix[lo0 * stride + lo1]) /
                         count;
      Real acc = 0.0L;
      for (int i0c = lo0; i0c <= hi0; ++i0c) {
        for (int i1c = lo1; i1c <= hi1; ++i1c) {
          const Complex& z = f[static_cast<std::size_t>(i0c) * n + i1c];
          acc += std::abs(CReal(z.real(), z.imag()) - mean);
        }
      }
      a[static_cast<std::size_t>(t0) * m + t1] = acc / count;
    }
  }
}

// Fold one side's placement scores into the running per-node maxima.
void reduce_side_1d(const std::vector<Real>& a, int n, int s, Placement placement,
                    std::vector<Real>& node_max) {
  if (placement == Placement::all_containing) {
    std::vector<Real> reduced;
    sliding_max(a, s, reduced);
    for (int j = 0; j < n; ++j) node_max[j] = std::max(node_max[j], reduced[j]);
  } else {
    for (int j = 0; j < n; ++j) {
      const int t = j - s / 2 + (s - 1);
      node_max[j] = std::max(node_max[j], a[t]);
    }
  }
}

void reduce_side_2d(const std::vector<Real>& a, int n, int s, Placement placement,
                    std::vector<Real>& node_max) {
  const int m = n + s - 1;
  if (placement == Placement::all_containing) {
    // Separable: max over the placement rectangle is a sliding max along
    // axis 1 followed by one along axis 0.
    std::vector<Real> rows(static_cast<std::size_t>(m) * n, 0.0L);
    std::vector<Real> line(static_cast<std::size_t>(m), 0.0L);
    std::vector<Real> reduced;
    for (int t0 = 0; t0 < m; ++t0) {
      for (int t1 = 0; t1 < m; ++t1) line[t1] = a[static_cast<std::size_t>(t0) * m + t1];
      sliding_max(line, s, reduced);
      for (int j1 = 0; j1 < n; ++j1) rows[static_cast<std::size_t>(t0) * n + j1] = reduced[j1];
    }
    for (int j1 = 0; j1 < n; ++j1) {
      for (int t0 = 0; t0 < m; ++t0) line[t0] = rows[static_cast<std::size_t>(t0) * n + j1];
      sliding_max(line, s, reduced);
      for (int j0 = 0; j0 < n; ++j0) {
        const std::size_t flat = static_cast<std::size_t>(j0) * n + j1;
        node_max[flat] = std::max(node_max[flat], reduced[j0]);
      }
    }
  } else {
    for (int j0 = 0; j0 < n; ++j0) {
      const int t0 = j0 - s / 2 + (s - 1);
      for (int j1 = 0; j1 < n; ++j1) {
        const int t1 = j1 - s / 2 + (s - 1);
        const std::size_t flat = static_cast<std::size_t>(j0) * n + j1;
        node_max[flat] = std::max(node_max[flat], a[static_cast<std::size_t>(t0) * m + t1]);
      }
    }
  }
}

GridFunction run_maximal(const GridFunction& f, const CubeFamilySpec& fam, bool oscillation,
                         const char* where) {
  check_space_domain(f, where);
  check_finite(f, where);
  check_family(f.spec, fam, where);
  const int n = f.spec.points_per_axis;
  const bool dyadic = oscillation && fam.sharp_dyadic_sides;

  std::vector<Real> absf;
  if (!oscillation) {
    absf.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f.values[i]);
  }

  std::vector<Real> node_max(f.size(), 0.0L);
  std::vector<Real> scores;
  for (int s : family_sides(fam, dyadic)) {
    if (f.spec.dimension == 1) {
      if (oscillation) {
        placement_oscillation_1d(f.values, n, s, scores);
      } else {
        placement_averages_1d(absf, n, s, scores);
      }
      reduce_side_1d(scores, n, s, fam.placement, node_max);
    } else {
      if (oscillation) {
        placement_oscillation_2d(f.values, n, s, scores);
      } else {
        placement_averages_2d(absf, n, s, scores);
      }
      reduce_side_2d(scores, n, s, fam.placement, node_max);
    }
  }

  GridFunction out{f.spec, Domain::space, std::vector<Complex>(f.size())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.values[i] = Complex(static_cast<double>(node_max[i]), 0.0);
  }
  return out;
}

}  // namespace

Cube cube_from_box(const GridSpec& spec, const Point& lo, const Point& hi) {
  Cube cube;
  for (int a = 0; a < spec.dimension; ++a) {
    if (!(lo[a] <= hi[a])) {
      std::ostringstream out;
      out << "cube_from_box: empty box on axis " << a;
      throw Error::parameter(out.str());
    }
    const double dx = spec.dx();
    // Nodes x_j with lo <= x_j <= hi; the slack absorbs box ends that sit
    // exactly on a node.
    int jlo = static_cast<int>(std::ceil((lo[a] + spec.half_extent) / dx - 1e-9));
    int jhi = static_cast<int>(std::floor((hi[a] + spec.half_extent) / dx + 1e-9));
    jlo = std::max(jlo, 0);
    jhi = std::min(jhi, spec.points_per_axis - 1);
    if (jlo > jhi) {
      std::ostringstream out;
      out << "cube_from_box: box contains no grid node on axis " << a;
      throw Error::parameter(out.str());
    }
    cube.lo[a] = jlo;
    cube.hi[a] = jhi;
  }
  return cube;
}

Complex cube_average(const GridFunction& f, const Cube& q) {
  const GridSpec& spec = f.spec;
  int lo[2] = {0, 0};
  int hi[2] = {0, 0};
  for (int a = 0; a < spec.dimension; ++a) {
    lo[a] = q.lo[a];
    hi[a] = q.hi[a];
    if (lo[a] < 0 || hi[a] >= spec.points_per_axis || lo[a] > hi[a]) {
      std::ostringstream out;
      out << "cube_average: axis " << a << " range [" << lo[a] << ", " << hi[a]
          << "] not inside the grid";
      throw Error::parameter(out.str());
    }
  }
  check_finite(f, "cube_average");
  CReal acc(0.0L, 0.0L);
  long count = 0;
  const int n = spec.points_per_axis;
  for (int j0 = lo[0]; j0 <= hi[0]; ++j0) {
    for (int j1 = lo[1]; j1 <= hi[1]; ++j1) {
      const std::size_t flat = spec.dimension == 1
                                   ? static_cast<std::size_t>(j0)
                                   : static_cast<std::size_t>(j0) * n + j1;
      const Complex& z = f.values[flat];
      acc += CReal(z.real(), z.imag());
      ++count;
    }
  }
  acc /= static_cast<Real>(count);
  return Complex(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
}

GridFunction hardy_littlewood(const GridFunction& f, const CubeFamilySpec& fam) {
  return run_maximal(f, fam, false, "hardy_littlewood");
}

GridFunction q_maximal(const GridFunction& f, double q, const CubeFamilySpec& fam) {
  check_space_domain(f, "q_maximal");
  if (!(q >= 1.0) || !std::isfinite(q)) {
    std::ostringstream out;
    out << "q_maximal: q must lie in [1, inf), got " << q;
    throw Error::parameter(out.str());
  }
  if (q == 1.0) return hardy_littlewood(f, fam);
  GridFunction powered{f.spec, f.domain, std::vector<Complex>(f.size())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    powered.values[i] = Complex(std::pow(std::abs(f.values[i]), q), 0.0);
  }
  GridFunction out = hardy_littlewood(powered, fam);
  const double inv_q = 1.0 / q;
  for (Complex& v : out.values) v = Complex(std::pow(v.real(), inv_q), 0.0);
  return out;
}

GridFunction sharp_maximal(const GridFunction& f, const CubeFamilySpec& fam) {
  return run_maximal(f, fam, true, "sharp_maximal");
}

}  // namespace psb
