#pragma once

#include "psb/grid.hpp"

namespace psb {

/// Axis-aligned grid cube, inclusive cell index ranges per axis.
struct Cube {
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{0, 0};
};

/// Cells whose nodes lie inside the physical box [lo, hi] (componentwise).
Cube cube_from_box(const GridSpec& spec, const Point& lo, const Point& hi);

/// Arithmetic mean of the samples in q (midpoint quadrature).
Complex cube_average(const GridFunction& f, const Cube& q);

enum class Placement { all_containing, centered_only };

/// The finite cube family behind the maximal operators: all grid-aligned
/// cubes with side up to 2W cells containing the query node (or only the
/// centered one per side). Windows are clipped at the domain boundary and
/// average over the intersection.
struct CubeFamilySpec {
  int max_halfwidth_cells = 1;  // W; sides run over 1..2W cells
  Placement placement = Placement::all_containing;
  // f^# walks every cell of every window, so by default its side lengths
  // are thinned to powers of two; M and M_q always use every side.
  bool sharp_dyadic_sides = true;
};

/// (Mf)(x_j) = max over family cubes containing x_j of the average of |f|.
GridFunction hardy_littlewood(const GridFunction& f, const CubeFamilySpec& fam);

/// M_q f = (M(|f|^q))^{1/q}; q = 1 falls through to hardy_littlewood.
GridFunction q_maximal(const GridFunction& f, double q, const CubeFamilySpec& fam);

/// f^#(x_j) = max over cubes of the mean of |f - f_Q| over Q.
GridFunction sharp_maximal(const GridFunction& f, const CubeFamilySpec& fam);

}  // namespace psb
