#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psb/grid.hpp"
#include "psb/maximal.hpp"
#include "psb/psido.hpp"
#include "psb/spaces.hpp"
#include "psb/symbols.hpp"

namespace psb {

/// Certified class gating an experiment; `family` picks which spec applies.
struct SymbolClassSpec {
  enum class Family { hormander, miyachi };
  Family family = Family::hormander;
  HormanderSpec hormander;
  MiyachiSpec miyachi;
};

/// One recorded ratio: a family member (or member pair), the refinement
/// level it entered at, and the node index for pointwise estimates
/// (-1 for whole-member ratios). Skipped samples carry ratio 0 and never
/// contribute to the reported constant.
struct SampleRatio {
  std::string member;
  int level = 0;
  long node = -1;
  double ratio = 0.0;
  bool skipped = false;
};

/// One estimated constant: the supremum of a ratio over test functions
/// (and, for pointwise estimates, over nodes). per_level records the
/// running supremum as the family doubles; the stability factor is the
/// last-to-previous ratio. Ties in the supremum resolve to the lowest
/// member id, then the lowest node index.
struct RatioReport {
  std::string label;
  double constant = 0.0;
  std::string witness_id;
  long witness_node = -1;  // pointwise estimates only
  std::vector<double> per_level;
  double stability_factor = 1.0;
  double stability_threshold = 2.0;
  int skipped_members = 0;
  long guarded_nodes = 0;
  double bound = 0.0;  // 0 = no a-priori cap recorded
  bool pass = false;
  std::vector<SampleRatio> samples;
};

struct ExperimentConfig {
  std::string preset = "theorem-1.2";
  int dimension = 1;
  double half_extent = 16.0;
  int points_per_axis = 256;
  int family_count = 3;  // members per kind at the first level
  int refinement_levels = 2;
  std::uint64_t seed = 2026;
  std::vector<double> q_values{1.5};
  std::string exponent_id = "log_decay";
  ExponentParams exponent_params{{"p_inf", 2.0}, {"amplitude", 1.0}};
  std::vector<FamilyKind> family_kinds{FamilyKind::gaussian_pack, FamilyKind::smooth_bump,
                                       FamilyKind::bandlimited_random};
  std::string symbol_id = "smoothed_sign";
  SymbolParams symbol_params;
  SymbolClassSpec cls;           // defaults to Hormander S^0_{1,0}
  int max_halfwidth_cells = 0;   // 0 resolves to N/2
  bool centered_only = false;
  bool sharp_dyadic_sides = true;
  double stability_threshold = 2.0;
  double guard_fraction = 1e-8;  // node/member guard, relative to the max denominator
  std::string out_dir;           // optional; the CLI flag overrides
  SamplingPlan plan;
};

/// Baseline configuration for a named experiment.
ExperimentConfig preset_config(const std::string& name);

/// Parse / serialize the "psido-bench-config/1" JSON document. Unknown
/// keys are rejected; a "preset" key seeds the defaults before overrides.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

/// Test functions grouped by kind; each list is a deterministic prefix
/// family of base_count << (levels-1) members.
struct ExperimentFamily {
  std::vector<std::vector<FamilyMember>> by_kind;
  int base_count = 0;
  int levels = 0;
};
ExperimentFamily build_family(const GridSpec& spec, const ExperimentConfig& cfg);

/// sup over members and nodes of sharp(Op(a) f) / M_q f, skipping nodes
/// where M_q f falls under guard_fraction times its per-member peak.
/// Gated on q > 1 and on the symbol certifying in a theorem-shaped class.
RatioReport estimate_pointwise_constant(const Symbol& a, const SymbolClassSpec& cls, double q,
                                        const GridSpec& spec, const ExperimentFamily& fam,
                                        const ExperimentConfig& cfg,
                                        CertificateReport* certificate_out = nullptr);

/// sup over members of ||Op(a) f||_p / ||f||_p. Gated on certification
/// and on the exponent's regularity probes.
RatioReport estimate_operator_bound(const Symbol& a, const SymbolClassSpec& cls,
                                    const ExponentFunction& p, const GridSpec& spec,
                                    const ExperimentFamily& fam, const ExperimentConfig& cfg,
                                    CertificateReport* certificate_out = nullptr);

/// sup over members of ||M_q f||_p / ||f||_p for q >= 1.
RatioReport estimate_maximal_bound(const ExponentFunction& p, double q, const GridSpec& spec,
                                   const ExperimentFamily& fam, const ExperimentConfig& cfg);

/// sup over members of ||f||_p / ||f#||_p, skipping members whose
/// denominator falls under guard_fraction times the family maximum.
RatioReport verify_fefferman_stein(const ExponentFunction& p, const GridSpec& spec,
                                   const ExperimentFamily& fam, const ExperimentConfig& cfg);

/// sup over ordered member pairs of the pairing against ||f||_p ||g||_p';
/// the report carries the a-priori cap 2.
RatioReport estimate_pairing_bound(const ExponentFunction& p, const GridSpec& spec,
                                   const ExperimentFamily& fam, const ExperimentConfig& cfg);

struct ExperimentResult {
  std::string preset;
  ExperimentConfig config;
  std::vector<CertificateReport> certificates;
  std::vector<RatioReport> reports;
  double wall_seconds = 0.0;
  bool pass = false;

  std::string to_json() const;  // "psido-bench-report/1"
  std::string to_csv() const;   // one row per recorded sample ratio
};

/// Run one named experiment end to end. The theorem presets compose the
/// full proof chain: operator bound, sharp-vs-norm link on the image
/// family, pointwise constant, maximal bound, and a chain-consistency
/// report capping op / (link product) at 1.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Write report.json and report.csv under out_dir (created if missing).
void write_experiment(const ExperimentResult& result, const std::string& out_dir);

}  // namespace psb
