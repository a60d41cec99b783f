// Acceptance checks: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its own tolerance and wall-clock budget;
// bodies throw nothing on success and append messages on failure.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "psb/errors.hpp"
#include "psb/grid.hpp"
#include "psb/harness.hpp"
#include "psb/maximal.hpp"
#include "psb/psido.hpp"
#include "psb/random.hpp"
#include "psb/spaces.hpp"
#include "psb/symbols.hpp"
#include "reference_maximal.hpp"

namespace {

using psb::Complex;
using psb::CubeFamilySpec;
using psb::Domain;
using psb::ExponentFunction;
using psb::FamilyKind;
using psb::FamilyMember;
using psb::GridFunction;
using psb::GridSpec;
using psb::RatioReport;
using psb::Symbol;
using psb::TestFamilySpec;

struct Check {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

GridFunction random_function(const GridSpec& s, unsigned long long seed) {
  psb::Rng rng(seed);
  GridFunction f{s, Domain::space, {}};
  f.values.resize(s.node_count());
  for (auto& v : f.values) v = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return f;
}

std::vector<GridFunction> mixed_family(const GridSpec& s, int count, unsigned long long seed) {
  std::vector<GridFunction> out;
  const FamilyKind kinds[] = {FamilyKind::gaussian_pack, FamilyKind::smooth_bump,
                              FamilyKind::bandlimited_random};
  int per = (count + 2) / 3;
  for (FamilyKind kind : kinds) {
    for (const FamilyMember& m : psb::generate_family(s, TestFamilySpec{kind, per, seed})) {
      if (static_cast<int>(out.size()) < count) out.push_back(m.f);
    }
    ++seed;
  }
  return out;
}

double rel_sup_error(const GridFunction& a, const GridFunction& b) {
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return err / std::max(scale, 1e-300);
}

double rel_l2_error(const GridFunction& a, const GridFunction& b) {
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err += std::norm(a[i] - b[i]);
    scale += std::norm(b[i]);
  }
  return std::sqrt(err / std::max(scale, 1e-300));
}

const RatioReport* report_named(const psb::ExperimentResult& result, const std::string& label) {
  for (const RatioReport& rep : result.reports) {
    if (rep.label == label) return &rep;
  }
  return nullptr;
}

// --- criterion bodies ------------------------------------------------------

void transform_roundtrip(Check& chk) {
  const GridSpec specs[] = {psb::make_grid(1, 16.0, 512), psb::make_grid(2, 8.0, 64)};
  for (const GridSpec& s : specs) {
    for (FamilyKind kind : {FamilyKind::gaussian_pack, FamilyKind::smooth_bump,
                            FamilyKind::bandlimited_random}) {
      for (const FamilyMember& m :
           psb::generate_family(
               s, TestFamilySpec{kind, 3, static_cast<unsigned long long>(7 + s.dimension)})) {
        const GridFunction back = psb::inverse_transform(psb::forward_transform(m.f));
        const double err = rel_sup_error(back, m.f);
        chk.require(err <= 1e-10,
                    m.id + " roundtrip sup error " + fmt(err) + " exceeds 1e-10");
      }
    }
  }
}

void op_identity_multiplication(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 256);
  const Symbol one = psb::catalog_symbol("one", {}, 1);
  const Symbol profile = psb::catalog_symbol("modulated", {{"m", 0.0}}, 1);

  Symbol cosine;  // a(x, xi) = 2 + cos(pi x / L), a pure multiplication
  cosine.id = "cosine-profile";
  cosine.dimension = 1;
  cosine.x_independent = false;
  cosine.evaluate = [&s](const psb::Point& x, const psb::Point&) {
    return Complex(2.0 + std::cos(std::numbers::pi * x[0] / s.half_extent), 0.0);
  };

  int checked = 0;
  for (const GridFunction& f : mixed_family(s, 20, 21)) {
    ++checked;
    const double id_err = rel_sup_error(psb::apply_op(one, f), f);
    chk.require(id_err <= 1e-9, "identity symbol error " + fmt(id_err) + " exceeds 1e-9");

    const Symbol* const multipliers[] = {&profile, &cosine};
    for (const Symbol* a : multipliers) {
      GridFunction expected = f;
      for (std::size_t i = 0; i < f.size(); ++i) {
        expected.values[i] = a->evaluate(s.node_point(i), {0.0, 0.0}) * f[i];
      }
      const double err = rel_sup_error(psb::apply_op(*a, f), expected);
      chk.require(err <= 1e-9,
                  a->id + " multiplication error " + fmt(err) + " exceeds 1e-9");
    }
  }
  chk.require(checked == 20, "expected 20 functions, generated " + std::to_string(checked));
}

void multiplier_vs_full(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 256);
  const Symbol symbols[] = {psb::catalog_symbol("one", {}, 1),
                            psb::catalog_symbol("bessel_multiplier", {{"m", -0.5}}, 1),
                            psb::catalog_symbol("smoothed_sign", {}, 1)};
  for (const Symbol& a : symbols) {
    chk.require(a.x_independent, a.id + " is not frequency-only");
    for (const GridFunction& f : mixed_family(s, 10, 33)) {
      psb::ApplyOptions fast;
      fast.path = psb::ApplyPath::multiplier;
      psb::ApplyOptions slow;
      slow.path = psb::ApplyPath::full;
      const double err = rel_l2_error(psb::apply_op(a, f, slow), psb::apply_op(a, f, fast));
      chk.require(err <= 1e-8, a.id + " path disagreement " + fmt(err) + " exceeds 1e-8");
    }
  }
}

void maximal_oracle(Check& chk) {
  struct Setup {
    GridSpec spec;
    int halfwidth;
  };
  const Setup setups[] = {{psb::make_grid(1, 16.0, 128), 32}, {psb::make_grid(2, 8.0, 32), 8}};
  for (const Setup& setup : setups) {
    const GridFunction f = random_function(setup.spec, 404 + setup.spec.dimension);
    CubeFamilySpec fam;
    fam.max_halfwidth_cells = setup.halfwidth;
    fam.sharp_dyadic_sides = false;
    const GridFunction m = psb::hardy_littlewood(f, fam);
    const GridFunction mq = psb::q_maximal(f, 2.0, fam);
    const GridFunction sharp = psb::sharp_maximal(f, fam);

    psb::Rng rng(515);
    for (int probe = 0; probe < 50; ++probe) {
      const auto flat =
          static_cast<std::size_t>(rng.uniform(0.0, 1.0) * setup.spec.node_count());
      const double m_ref = refmax::hardy_littlewood_at(f, fam, flat);
      const double mq_ref = refmax::q_maximal_at(f, 2.0, fam, flat);
      const double sharp_ref = refmax::sharp_maximal_at(f, fam, flat);
      const std::string where = "n=" + std::to_string(setup.spec.dimension) + " node " +
                                std::to_string(flat);
      chk.require(std::abs(m[flat].real() - m_ref) <= 1e-12 * std::max(1.0, m_ref),
                  "M mismatch at " + where);
      chk.require(std::abs(mq[flat].real() - mq_ref) <= 1e-12 * std::max(1.0, mq_ref),
                  "M_q mismatch at " + where);
      chk.require(std::abs(sharp[flat].real() - sharp_ref) <= 1e-12 * std::max(1.0, sharp_ref),
                  "sharp mismatch at " + where);
    }
  }
}

void pointwise_inequalities(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 128);
  CubeFamilySpec fam;
  fam.max_halfwidth_cells = 16;
  for (int i = 0; i < 20; ++i) {
    const GridFunction f = random_function(s, 600 + i);
    const GridFunction m = psb::hardy_littlewood(f, fam);
    for (double q : {1.5, 2.0, 4.0}) {
      const GridFunction mq = psb::q_maximal(f, q, fam);
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (!(m[j].real() <= mq[j].real() + 1e-12)) {
          chk.require(false, "M > M_q at node " + std::to_string(j) + ", q = " + fmt(q));
          break;
        }
      }
    }
    const GridFunction sharp = psb::sharp_maximal(f, fam);
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (!(sharp[j].real() <= 2.0 * m[j].real() + 1e-12)) {
        chk.require(false, "sharp > 2M at node " + std::to_string(j));
        break;
      }
    }
  }
}

void chebyshev(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 256);
  for (int i = 0; i < 20; ++i) {
    const GridFunction f = random_function(s, 700 + i);
    for (double q : {1.0, 2.0}) {
      const double mass = std::pow(psb::constant_norm(f, q), q);
      for (double lambda : {0.1, 1.0, 10.0}) {
        const double lhs = psb::distribution_measure(f, lambda);
        const double rhs = std::pow(lambda, -q) * mass + 1e-12;
        chk.require(lhs <= rhs, "distribution bound fails at q = " + fmt(q) +
                                    ", lambda = " + fmt(lambda) + ": " + fmt(lhs) + " > " +
                                    fmt(rhs));
      }
    }
  }
}

void variable_norm_oracles(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 512);
  for (double p : {1.5, 2.0, 3.0}) {
    const ExponentFunction pc = psb::exponent_catalog("constant", {{"p", p}}, 1);
    for (int i = 0; i < 5; ++i) {
      const GridFunction f = random_function(s, 800 + i);
      const double a = psb::vlp_norm(f, pc);
      const double b = psb::constant_norm(f, p);
      chk.require(std::abs(a - b) <= 1e-9 * b,
                  "constant-exponent mismatch at p = " + fmt(p) + ": " + fmt(a) + " vs " +
                      fmt(b));
    }
  }

  // two unit-measure slabs across a p = 2 | p = 3 jump: the norm solves
  // l^-2 + l^-3 = 1, i.e. l^3 = l + 1
  GridFunction slab{s, Domain::space, std::vector<Complex>(s.node_count(), Complex())};
  for (std::size_t i = 0; i < slab.size(); ++i) {
    const double x = s.node_point(i)[0];
    if (x >= -1.0 && x < 1.0) slab.values[i] = Complex(1.0, 0.0);
  }
  const ExponentFunction two_piece =
      psb::exponent_catalog("step", {{"p_left", 2.0}, {"p_right", 3.0}}, 1);
  long double root = 1.3L;
  for (int i = 0; i < 64; ++i) {
    root -= (root * root * root - root - 1.0L) / (3.0L * root * root - 1.0L);
  }
  const double norm = psb::vlp_norm(slab, two_piece);
  chk.require(std::abs(norm - static_cast<double>(root)) <= 1e-6 + 2.0 * s.dx(),
              "two-piece norm " + fmt(norm) + " far from cubic root " +
                  fmt(static_cast<double>(root)));

  const ExponentFunction dec =
      psb::exponent_catalog("log_decay", {{"p_inf", 2.0}, {"amplitude", 1.0}}, 1);
  for (int i = 0; i < 5; ++i) {
    const GridFunction f = random_function(s, 820 + i);
    const double residual = std::abs(psb::modular(f, dec, psb::vlp_norm(f, dec)) - 1.0);
    chk.require(residual <= 1e-8, "unit-ball residual " + fmt(residual) + " exceeds 1e-8");
  }
}

void norm_axioms_pairing(Check& chk) {
  const GridSpec s = psb::make_grid(1, 16.0, 256);
  const ExponentFunction exponents[] = {
      psb::exponent_catalog("constant", {{"p", 2.0}}, 1),
      psb::exponent_catalog("log_decay", {{"p_inf", 2.0}, {"amplitude", 1.0}}, 1)};
  for (const ExponentFunction& p : exponents) {
    const ExponentFunction pc = psb::conjugate_exponent(p);
    for (int i = 0; i < 50; ++i) {
      const GridFunction f = random_function(s, 900 + i);
      const GridFunction g = random_function(s, 1900 + i);
      const double nf = psb::vlp_norm(f, p);
      const double ng = psb::vlp_norm(g, p);
      chk.require(nf > 0.0, "norm of a nonzero function is not positive");

      GridFunction doubled = f;
      for (auto& v : doubled.values) v *= 2.0;
      chk.require(std::abs(psb::vlp_norm(doubled, p) - 2.0 * nf) <= 1e-10 * nf,
                  "homogeneity fails at pair " + std::to_string(i));

      GridFunction sum = f;
      for (std::size_t j = 0; j < sum.size(); ++j) sum.values[j] += g[j];
      chk.require(psb::vlp_norm(sum, p) <= (nf + ng) * (1.0 + 1e-10),
                  "triangle inequality fails at pair " + std::to_string(i));

      GridFunction envelope = f;  // |envelope| >= |f| node by node
      for (std::size_t j = 0; j < envelope.size(); ++j) {
        envelope.values[j] = Complex(std::abs(f[j]) + std::abs(g[j]), 0.0);
      }
      chk.require(nf <= psb::vlp_norm(envelope, p) * (1.0 + 1e-10),
                  "lattice monotonicity fails at pair " + std::to_string(i));

      double previous = 0.0;  // truncations climb to the full norm
      const double top = psb::sup_norm(f);
      for (double c : {0.25, 0.5, 0.75, 1.0}) {
        GridFunction cut = f;
        for (auto& v : cut.values) v = Complex(std::min(std::abs(v), c * top), 0.0);
        const double nc = psb::vlp_norm(cut, p);
        chk.require(nc >= previous * (1.0 - 1e-12),
                    "truncation norms decrease at pair " + std::to_string(i));
        previous = nc;
      }
      GridFunction mod = f;
      for (auto& v : mod.values) v = Complex(std::abs(v), 0.0);
      chk.require(std::abs(previous - psb::vlp_norm(mod, p)) <= 1e-10 * nf,
                  "final truncation misses the norm at pair " + std::to_string(i));

      const double pairing = psb::pairing_integral(f, g);
      const double bound = 2.0 * nf * psb::vlp_norm(g, pc);
      chk.require(pairing <= bound * (1.0 + 1e-9) + 1e-12,
                  "pairing " + fmt(pairing) + " exceeds 2 * " + fmt(bound / 2.0));
    }
  }
}

void symbol_certifiers(Check& chk) {
  psb::SamplingPlan plan;
  plan.xi_magnitude_count = 32;
  plan.x_count = 8;
  plan.step_count = 8;
  plan.refinement_levels = 2;

  psb::SamplingPlan deep = plan;
  deep.refinement_levels = 3;
  for (double m : {-0.5, -1.0}) {
    const Symbol bessel = psb::catalog_symbol("bessel_multiplier", {{"m", m}}, 1);
    psb::HormanderSpec own;
    own.m = m;
    const psb::CertificateReport cert = psb::certify_hormander(bessel, own, deep);
    chk.require(cert.pass, "bessel m = " + fmt(m) + " fails its own order");
    chk.require(cert.stability_factor <= 1.1,
                "bessel m = " + fmt(m) + " stability " + fmt(cert.stability_factor) +
                    " exceeds 1.1");
  }

  {
    psb::HormanderSpec zero;  // xi_1 against order zero: sup doubles per level
    const psb::CertificateReport cert =
        psb::certify_hormander(psb::coordinate_symbol(1), zero, deep);
    chk.require(!cert.pass, "coordinate symbol passes order zero");
    bool found = false;
    for (const auto& cond : cert.conditions) {
      if (cond.label != "C[a=(0),b=(0)]") continue;
      found = true;
      chk.require(cond.per_level.size() >= 2, "no refinement trail on the base condition");
      for (std::size_t r = 1; r < cond.per_level.size(); ++r) {
        const double growth = cond.per_level[r] / cond.per_level[r - 1];
        chk.require(growth >= 1.9, "base condition grew only " + fmt(growth) + "x");
      }
    }
    chk.require(found, "base condition missing from the report");
  }

  {
    const Symbol rough = psb::catalog_symbol("holder_rough", {{"kappa", 0.5}}, 1);
    const psb::MiyachiSpec spec{0.0, 0.0, 0.0, 0.5, 1.0};
    chk.require(psb::certify_miyachi(rough, spec, plan).pass,
                "holder_rough(1/2) fails its natural rough class");
  }

  const struct {
    const char* id;
    psb::SymbolParams params;
    double m;
  } smooth[] = {{"one", {}, 0.0},
                {"bessel_multiplier", {{"m", -0.5}}, -0.5},
                {"smoothed_sign", {}, 0.0},
                {"modulated", {{"m", 0.0}}, 0.0}};
  for (const auto& entry : smooth) {
    const Symbol a = psb::catalog_symbol(entry.id, entry.params, 1);
    psb::HormanderSpec hs;
    hs.m = entry.m;
    if (!psb::certify_hormander(a, hs, plan).pass) {
      chk.require(false, std::string(entry.id) + " fails its own smooth class");
      continue;
    }
    const psb::MiyachiSpec ms{entry.m, 1.0, 0.0, 1.0, 1.0};
    chk.require(psb::certify_miyachi(a, ms, plan).pass,
                std::string(entry.id) + " passes smooth but fails the rough relaxation");
  }

  {
    const Symbol base = psb::catalog_symbol("bessel_multiplier", {{"m", -0.5}}, 1);
    psb::HormanderSpec own;
    own.m = -0.5;
    const psb::CertificateReport a = psb::certify_hormander(base, own, plan);
    const psb::CertificateReport b =
        psb::certify_hormander(psb::scale_symbol(base, 2.0), own, plan);
    chk.require(a.conditions.size() == b.conditions.size(), "condition sets differ");
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
      const double lhs = b.conditions[i].constant();
      const double rhs = 2.0 * a.conditions[i].constant();
      chk.require(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs),
                  "scaling breaks covariance on " + a.conditions[i].label);
    }
  }
}

void miyachi_inclusion(Check& chk) {
  psb::SamplingPlan plan;
  plan.xi_magnitude_count = 32;
  plan.x_count = 8;
  plan.step_count = 8;
  plan.refinement_levels = 2;

  const struct {
    const char* id;
    psb::SymbolParams params;
    double m;
  } catalog[] = {{"one", {}, 0.0},
                 {"bessel_multiplier", {{"m", -0.5}}, -0.5},
                 {"smoothed_sign", {}, 0.0},
                 {"modulated", {{"m", 0.0}}, 0.0}};
  for (const auto& entry : catalog) {
    const Symbol a = psb::catalog_symbol(entry.id, entry.params, 1);
    const psb::MiyachiSpec weak{entry.m, 1.0, 0.0, 1.0, 1.0};
    const psb::MiyachiSpec strong{entry.m, 1.0, 0.0, 2.0, 2.0};
    const psb::CertificateReport weak_cert = psb::certify_miyachi(a, weak, plan);
    const psb::CertificateReport strong_cert = psb::certify_miyachi(a, strong, plan);
    if (!weak_cert.pass || !strong_cert.pass) {
      chk.require(false, std::string(entry.id) + " fails a certification leg");
      continue;
    }
    const double lo = psb::miyachi_norm(weak_cert);
    const double hi = psb::miyachi_norm(strong_cert);
    chk.require(lo <= 10.0 * hi, std::string(entry.id) + " inclusion ratio " +
                                     fmt(lo / hi) + " exceeds the configured 10x");
  }
}

void estimate_two_desk_scale(Check& chk) {
  const struct {
    const char* symbol;
    psb::SymbolParams params;
  } symbols[] = {{"smoothed_sign", {}}, {"modulated", {{"m", 0.0}}}};
  for (const auto& entry : symbols) {
    double coarse[2] = {0.0, 0.0};
    for (int n : {256, 512}) {
      psb::ExperimentConfig cfg = psb::preset_config("estimate-2");
      cfg.points_per_axis = n;
      cfg.family_kinds = {FamilyKind::gaussian_pack};
      cfg.family_count = 25;  // two refinement levels reach 50 functions
      cfg.symbol_id = entry.symbol;
      cfg.symbol_params = entry.params;
      const psb::ExperimentResult result = psb::run_experiment(cfg);
      chk.require(result.pass, std::string(entry.symbol) + " run fails at N = " +
                                   std::to_string(n));
      int qi = 0;
      for (const char* label : {"pointwise-sharp(q=1.5)", "pointwise-sharp(q=2)"}) {
        const RatioReport* rep = report_named(result, label);
        if (rep == nullptr) {
          chk.require(false, std::string("missing report ") + label);
          continue;
        }
        chk.require(std::isfinite(rep->constant) && rep->constant > 0.0,
                    std::string(label) + " constant is not finite and positive");
        chk.require(rep->stability_factor <= 2.0,
                    std::string(label) + " level stability " + fmt(rep->stability_factor) +
                        " exceeds 2");
        if (n == 256) {
          coarse[qi] = rep->constant;
        } else if (coarse[qi] > 0.0) {
          const double growth = rep->constant / coarse[qi];
          chk.require(growth <= 2.0, std::string(entry.symbol) + " " + label +
                                         " grew " + fmt(growth) + "x from N=256 to N=512");
        }
        ++qi;
      }
    }
  }
}

void theorem_desk_scale(Check& chk) {
  for (const char* preset : {"theorem-3.2a", "corollary-3.3"}) {
    const psb::ExperimentResult result = psb::run_experiment(psb::preset_config(preset));
    chk.require(result.pass, std::string(preset) + " preset fails");
    const RatioReport* op = report_named(result, "operator-bound");
    if (op == nullptr) {
      chk.require(false, std::string(preset) + " has no operator-bound report");
    } else {
      chk.require(std::isfinite(op->constant) && op->constant > 0.0,
                  std::string(preset) + " operator bound is not finite and positive");
      chk.require(op->stability_factor <= 2.0,
                  std::string(preset) + " operator stability " + fmt(op->stability_factor) +
                      " exceeds 2");
    }
    const RatioReport* chain = report_named(result, "chain-consistency(q=1.5)");
    if (chain == nullptr) {
      chk.require(false, std::string(preset) + " has no chain report");
    } else {
      chk.require(chain->pass, std::string(preset) + " chain report fails");
      for (double level : chain->per_level) {
        chk.require(std::isfinite(level) && level <= 1.0 + 1e-9,
                    std::string(preset) + " chain level " + fmt(level) + " breaks the cap");
      }
    }
  }
}

void oscillation_probes(Check& chk) {
  for (const char* preset : {"fefferman-stein", "lerner-perez"}) {
    const psb::ExperimentResult result = psb::run_experiment(psb::preset_config(preset));
    chk.require(result.pass, std::string(preset) + " preset fails");
    chk.require(result.reports.size() == 1, std::string(preset) + " report count is off");
    const RatioReport& rep = result.reports.front();
    chk.require(std::isfinite(rep.constant) && rep.constant > 0.0,
                std::string(preset) + " constant is not finite and positive");
    chk.require(rep.stability_factor <= 2.0, std::string(preset) + " stability " +
                                                 fmt(rep.stability_factor) + " exceeds 2");
  }

  psb::ExperimentConfig cfg = psb::preset_config("diening-duality");
  cfg.exponent_id = "constant";
  cfg.exponent_params = {{"p", 2.0}};
  const psb::ExperimentResult result = psb::run_experiment(cfg);
  chk.require(result.pass, "duality probe fails at constant exponent");
  const RatioReport* plain = report_named(result, "maximal-bound(q=1)");
  const RatioReport* conj = report_named(result, "maximal-bound-conjugate(q=1)");
  if (plain == nullptr || conj == nullptr) {
    chk.require(false, "duality probe is missing a side");
  } else {
    chk.require(std::abs(plain->constant - conj->constant) <= 1e-9 * plain->constant,
                "self-dual exponent gives unequal sides: " + fmt(plain->constant) + " vs " +
                    fmt(conj->constant));
  }
}

void determinism(Check& chk) {
  for (const char* preset :
       {"theorem-1.2", "theorem-3.2a", "theorem-3.2b", "corollary-3.3", "estimate-2",
        "fefferman-stein", "lerner-perez", "diening-duality"}) {
    psb::ExperimentConfig cfg = psb::preset_config(preset);
    cfg.points_per_axis = 64;
    cfg.family_count = 2;
    const psb::ExperimentResult a = psb::run_experiment(cfg);
    const psb::ExperimentResult b = psb::run_experiment(cfg);
    chk.require(a.to_csv() == b.to_csv(), std::string(preset) + " sample logs differ");
    if (a.reports.size() != b.reports.size()) {
      chk.require(false, std::string(preset) + " report counts differ");
      continue;
    }
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
      chk.require(a.reports[i].constant == b.reports[i].constant &&
                      a.reports[i].per_level == b.reports[i].per_level &&
                      a.reports[i].witness_id == b.reports[i].witness_id,
                  std::string(preset) + " report " + a.reports[i].label +
                      " is not reproducible");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* label;
    double limit_seconds;
    std::function<void(Check&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "transform roundtrip on every family kind", 5.0, transform_roundtrip},
      {2, "identity and multiplication symbols act pointwise", 10.0,
       op_identity_multiplication},
      {3, "multiplier fast path matches the full quadrature", 30.0, multiplier_vs_full},
      {4, "maximal operators match the all-windows reference", 60.0, maximal_oracle},
      {5, "pointwise maximal inequalities", 20.0, pointwise_inequalities},
      {6, "distribution bound from the q-th moment", 5.0, chebyshev},
      {7, "variable norm closed-form oracles", 5.0, variable_norm_oracles},
      {8, "norm axioms and the pairing bound", 10.0, norm_axioms_pairing},
      {9, "certifier passes, failures, and covariance", 60.0, symbol_certifiers},
      {10, "rough-class norms respect the inclusion direction", 30.0, miyachi_inclusion},
      {11, "pointwise estimate stays stable across refinement", 180.0,
       estimate_two_desk_scale},
      {12, "operator bound presets hold the proof chain", 300.0, theorem_desk_scale},
      {13, "oscillation and duality probes", 180.0, oscillation_probes},
      {14, "fixed seeds reproduce every estimate bit for bit", 120.0, determinism},
  };

  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Check chk;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(chk);
    } catch (const std::exception& e) {
      chk.failures.push_back(std::string("unhandled error: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= c.limit_seconds) {
      chk.failures.push_back("runtime " + fmt(seconds) + "s exceeds the " +
                             fmt(c.limit_seconds) + "s budget");
    }
    const bool ok = chk.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s %2d  %-55s %7.2fs\n", ok ? "PASS" : "FAIL", c.id, c.label, seconds);
    std::size_t shown = 0;
    for (const std::string& why : chk.failures) {
      if (++shown > 8) {
        std::printf("         ... and %zu more\n", chk.failures.size() - 8);
        break;
      }
      std::printf("         - %s\n", why.c_str());
    }
  }
  return failed == 0 ? 0 : 1;
}
