#pragma once

#include <string>

#include "psb/grid.hpp"

namespace psb {

/// Binary GridFunction file: 5 magic bytes "PSBF1", then n, L, N as
/// little-endian 64-bit floats, then interleaved (re, im) pairs row-major.
void save_psbf(const GridFunction& f, const std::string& path);

/// The format does not record the domain; callers say what they stored.
GridFunction load_psbf(const std::string& path, Domain domain = Domain::space);

/// CSV with one row per node: per-axis index, per-axis coordinate, re, im.
void write_csv(const GridFunction& f, const std::string& path);

}  // namespace psb
