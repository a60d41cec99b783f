#include "psb/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace psb {

static_assert(std::endian::native == std::endian::little,
              "file format is little-endian; add byte swapping for this platform");

namespace {

constexpr char kMagic[5] = {'P', 'S', 'B', 'F', '1'};

void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double get_f64(std::istream& is) {
  double v = 0.0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_psbf(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error::io("save_psbf: cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put_f64(os, static_cast<double>(f.spec.dimension));
  put_f64(os, f.spec.half_extent);
  put_f64(os, static_cast<double>(f.spec.points_per_axis));
  for (const Complex& v : f.values) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
  if (!os) throw Error::io("save_psbf: write failed on " + path);
}

GridFunction load_psbf(const std::string& path, Domain domain) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error::io("load_psbf: cannot open " + path);
  char magic[5] = {};
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error::io("load_psbf: " + path + " is not a PSBF1 file");
  }
  const double n = get_f64(is);
  const double L = get_f64(is);
  const double N = get_f64(is);
  if (!is || n != std::floor(n) || N != std::floor(N)) {
    throw Error::io("load_psbf: malformed header in " + path);
  }
  GridSpec spec = make_grid(static_cast<int>(n), L, static_cast<int>(N));
  GridFunction f{spec, domain, {}};
  f.values.resize(spec.node_count());
  for (Complex& v : f.values) {
    const double re = get_f64(is);
    const double im = get_f64(is);
    v = Complex(re, im);
  }
  if (!is) throw Error::io("load_psbf: truncated data in " + path);
  return f;
}

void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error::io("write_csv: cannot open " + path + " for writing");
  const GridSpec& spec = f.spec;
  const bool freq = f.domain == Domain::frequency;
  const char* coord = freq ? "xi" : "x";
  if (spec.dimension == 1) {
    os << "j," << coord << ",re,im\n";
  } else {
    os << "j0,j1," << coord << "0," << coord << "1,re,im\n";
  }
  os.precision(17);
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const auto j = spec.unravel(idx);
    const Point p = freq ? spec.frequency_point(idx) : spec.node_point(idx);
    if (spec.dimension == 1) {
      os << j[0] << "," << p[0];
    } else {
      os << j[0] << "," << j[1] << "," << p[0] << "," << p[1];
    }
    os << "," << f.values[idx].real() << "," << f.values[idx].imag() << "\n";
  }
  if (!os) throw Error::io("write_csv: write failed on " + path);
}

}  // namespace psb
