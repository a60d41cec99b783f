// psido-bench: experiment runner and utility front end.
//
// Exit codes: 0 success (and all pass criteria held), 1 a computation failed
// or a pass criterion did not hold, 2 malformed flags or configuration.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psb/errors.hpp"
#include "psb/grid.hpp"
#include "psb/harness.hpp"
#include "psb/io.hpp"
#include "psb/maximal.hpp"
#include "psb/psido.hpp"
#include "psb/spaces.hpp"
#include "psb/symbols.hpp"

namespace {

using psb::Error;
using psb::GridFunction;
using psb::GridSpec;

const char* kind_name(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::parameter: return "parameter";
    case Error::Kind::sampling: return "sampling";
    case Error::Kind::catalog: return "catalog";
    case Error::Kind::capability: return "capability";
    case Error::Kind::path: return "path";
    case Error::Kind::precondition: return "precondition";
    case Error::Kind::degenerate_family: return "degenerate_family";
    case Error::Kind::norm_undefined: return "norm_undefined";
    case Error::Kind::io: return "io";
    case Error::Kind::compute: return "compute";
  }
  return "unknown";
}

// "k=v,k=v" lists used by --params and --spec.
std::map<std::string, double> parse_kv(const std::string& text, const char* what) {
  std::map<std::string, double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error::parameter(std::string(what) + ": expected k=v, got \"" + item + "\"");
    }
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error::parameter(std::string(what) + ": \"" + item + "\" has no numeric value");
    }
  }
  return out;
}

double take(std::map<std::string, double>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const double v = it->second;
  kv.erase(it);
  return v;
}

void expect_drained(const std::map<std::string, double>& kv, const char* what) {
  if (kv.empty()) return;
  throw Error::parameter(std::string(what) + ": unknown key \"" + kv.begin()->first + "\"");
}

GridFunction load_input(const std::string& path) {
  return psb::load_psbf(path, psb::Domain::space);
}

void save_output(const GridFunction& f, const std::string& path) {
  if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    psb::write_csv(f, path);
  } else {
    psb::save_psbf(f, path);
  }
}

// --exponent forms: "constant:2", "log-decay:2[,amplitude]",
// "step:1.5,3", "loglog-decay:2[,amplitude]", or a CSV of node,p rows.
psb::ExponentFunction parse_exponent(const std::string& text, const GridSpec& spec) {
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string name = text.substr(0, colon);
    std::vector<double> args;
    std::stringstream stream(text.substr(colon + 1));
    std::string item;
    while (std::getline(stream, item, ',')) args.push_back(std::stod(item));
    if (name == "constant" && args.size() == 1) {
      return psb::exponent_catalog("constant", {{"p", args[0]}}, spec.dimension);
    }
    if (name == "log-decay" && (args.size() == 1 || args.size() == 2)) {
      return psb::exponent_catalog(
          "log_decay", {{"p_inf", args[0]}, {"amplitude", args.size() == 2 ? args[1] : 1.0}},
          spec.dimension);
    }
    if (name == "loglog-decay" && (args.size() == 1 || args.size() == 2)) {
      return psb::exponent_catalog(
          "loglog_decay",
          {{"p_inf", args[0]}, {"amplitude", args.size() == 2 ? args[1] : 1.0}},
          spec.dimension);
    }
    if (name == "step" && args.size() == 2) {
      return psb::exponent_catalog("step", {{"p_left", args[0]}, {"p_right", args[1]}},
                                   spec.dimension);
    }
    throw Error::parameter("norm: cannot parse exponent \"" + text + "\"");
  }

  // CSV fallback: one "node,p" row per grid node, optional header line.
  std::ifstream in(text);
  if (!in) throw Error::io("norm: cannot open exponent file " + text);
  std::vector<double> values(spec.node_count(), 0.0);
  std::vector<bool> seen(spec.node_count(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string node_text, p_text;
    if (!std::getline(row, node_text, ',') || !std::getline(row, p_text, ',')) {
      throw Error::io("norm: bad exponent row \"" + line + "\"");
    }
    std::size_t node = 0;
    double p = 0.0;
    try {
      node = std::stoul(node_text);
      p = std::stod(p_text);
    } catch (const std::exception&) {
      continue;  // header line
    }
    if (node >= values.size()) {
      throw Error::parameter("norm: exponent row names node index " + node_text +
                             "; rows are \"index,p\" with index in [0, " +
                             std::to_string(values.size() - 1) + "]");
    }
    values[node] = p;
    seen[node] = true;
  }
  double lo = 1e300;
  double hi = -1e300;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!seen[i]) {
      throw Error::parameter("norm: exponent file misses node " + std::to_string(i));
    }
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }

  psb::ExponentFunction p;
  p.id = "tabulated";
  p.dimension = spec.dimension;
  p.p_minus = lo;
  p.p_plus = hi;
  p.p_infinity = values.back();
  const auto table = std::make_shared<const std::vector<double>>(std::move(values));
  p.evaluate = [table, spec](const psb::Point& x) {
    std::size_t flat = 0;
    for (int a = 0; a < spec.dimension; ++a) {
      long i = std::lround((x[a] + spec.half_extent) / spec.dx());
      i = std::min<long>(std::max<long>(i, 0), spec.points_per_axis - 1);
      flat = flat * static_cast<std::size_t>(spec.points_per_axis) +
             static_cast<std::size_t>(i);
    }
    return (*table)[flat];
  };
  return p;
}

// Gnuplot-friendly histogram blocks: one index per report, "ratio count"
// rows, usable as  plot 'ratios.dat' index K using 1:2 with boxes.
void write_histograms(const psb::ExperimentResult& result, const std::string& out_dir) {
  std::ofstream out(std::filesystem::path(out_dir) / "ratios.dat");
  if (!out) throw Error::io("cannot write ratio histograms under " + out_dir);
  out.precision(17);
  for (const auto& rep : result.reports) {
    double top = 0.0;
    for (const auto& s : rep.samples) {
      if (!s.skipped) top = std::max(top, s.ratio);
    }
    const int bins = 32;
    const double width = top > 0.0 ? top / bins : 1.0;
    std::vector<long> counts(bins, 0);
    for (const auto& s : rep.samples) {
      if (s.skipped) continue;
      int b = static_cast<int>(s.ratio / width);
      counts[std::min(b, bins - 1)] += 1;
    }
    out << "# " << rep.label << "\n";
    for (int b = 0; b < bins; ++b) {
      out << (width * (b + 0.5)) << " " << counts[b] << "\n";
    }
    out << "\n\n";
  }
}

int run_command(const std::string& preset, const std::string& config_path,
                const std::string& out_flag, bool histograms) {
  nlohmann::json doc;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error::io("run: cannot open config " + config_path);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
      throw Error::parameter("run: config " + config_path + " is not valid JSON");
    }
    if (!doc.is_object()) {
      throw Error::parameter("run: config " + config_path + " must be a JSON object");
    }
  } else {
    doc = nlohmann::json{{"schema", "psido-bench-config/1"}};
  }
  if (!preset.empty()) {
    if (doc.contains("preset") && doc["preset"] != preset) {
      throw Error::parameter("run: config names preset " + doc["preset"].dump() +
                             " but the flag says \"" + preset + "\"");
    }
    doc["preset"] = preset;
  }
  if (!doc.contains("preset")) {
    throw Error::parameter("run: name a preset via --preset or the config file");
  }

  psb::ExperimentConfig cfg = psb::parse_config(doc.dump());
  if (!out_flag.empty()) cfg.out_dir = out_flag;
  if (cfg.out_dir.empty()) cfg.out_dir = "psido-bench-out";

  psb::ExperimentResult result;
  try {
    result = psb::run_experiment(cfg);
  } catch (const Error& e) {
    // Leave a structured trace of what failed next to where the report
    // would have been, then surface the failure.
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "report.json");
    if (out) {
      const nlohmann::json failure{{"schema", "psido-bench-report/1"},
                                   {"preset", cfg.preset},
                                   {"pass", false},
                                   {"error", {{"kind", kind_name(e.kind())},
                                              {"message", e.what()}}}};
      out << failure.dump(2) << "\n";
    }
    throw;
  }

  psb::write_experiment(result, cfg.out_dir);
  if (histograms) write_histograms(result, cfg.out_dir);

  for (const auto& rep : result.reports) {
    std::printf("%-34s constant %-12.6g stability %-8.4g %s\n", rep.label.c_str(),
                rep.constant, rep.stability_factor, rep.pass ? "pass" : "FAIL");
  }
  std::printf("%s: %s in %.2fs, reports in %s\n", result.preset.c_str(),
              result.pass ? "pass" : "FAIL", result.wall_seconds, cfg.out_dir.c_str());
  return result.pass ? 0 : 1;
}

psb::Symbol resolve_symbol(const std::string& id, const std::string& params_text,
                           const std::string& context, int dimension) {
  const auto params = parse_kv(params_text, context.c_str());
  if (id == "xi1") {
    if (!params.empty()) throw Error::parameter(context + ": xi1 takes no parameters");
    return psb::coordinate_symbol(dimension);
  }
  return psb::catalog_symbol(id, params, dimension);
}

int certify_command(const std::string& symbol, const std::string& params_text, int dimension,
                    const std::string& cls, const std::string& spec_text, int levels,
                    double threshold, const std::string& out_path) {
  const psb::Symbol a = resolve_symbol(symbol, params_text, "certify --params", dimension);
  psb::SamplingPlan plan;
  if (levels > 0) plan.refinement_levels = levels;
  if (threshold > 0.0) plan.stability_threshold = threshold;

  auto kv = parse_kv(spec_text, "certify --spec");
  psb::CertificateReport report;
  if (cls == "hormander") {
    psb::HormanderSpec spec;
    spec.m = take(kv, "m", spec.m);
    spec.rho = take(kv, "rho", spec.rho);
    spec.delta = take(kv, "delta", spec.delta);
    spec.K_xi = static_cast<int>(take(kv, "K_xi", spec.K_xi));
    spec.K_x = static_cast<int>(take(kv, "K_x", spec.K_x));
    expect_drained(kv, "certify --spec");
    report = psb::certify_hormander(a, spec, plan);
  } else if (cls == "miyachi") {
    psb::MiyachiSpec spec;
    spec.m = take(kv, "m", spec.m);
    spec.rho = take(kv, "rho", spec.rho);
    spec.delta = take(kv, "delta", spec.delta);
    spec.kappa = take(kv, "kappa", spec.kappa);
    spec.kappa_prime = take(kv, "kappa_prime", spec.kappa_prime);
    expect_drained(kv, "certify --spec");
    report = psb::certify_miyachi(a, spec, plan);
  } else {
    throw Error::parameter("certify: --class must be hormander or miyachi");
  }

  const std::string text = report.to_json();
  if (out_path.empty()) {
    std::printf("%s\n", text.c_str());
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error::io("certify: cannot write " + out_path);
    out << text << "\n";
  }
  std::fprintf(stderr, "%s %s: %s (stability %.4g)\n", symbol.c_str(),
               report.spec_desc.c_str(), report.pass ? "pass" : "FAIL",
               report.stability_factor);
  return report.pass ? 0 : 1;
}

int apply_command(const std::string& symbol, const std::string& params_text,
                  const std::string& grid_text, const std::string& input,
                  const std::string& output, const std::string& path_name) {
  const GridFunction f = load_input(input);
  if (!grid_text.empty()) {
    std::stringstream stream(grid_text);
    std::string n_text, l_text, count_text;
    if (!std::getline(stream, n_text, ',') || !std::getline(stream, l_text, ',') ||
        !std::getline(stream, count_text, ',')) {
      throw Error::parameter("apply: --grid wants n,L,N");
    }
    const GridSpec expect = psb::make_grid(std::stoi(n_text), std::stod(l_text),
                                           std::stoi(count_text));
    if (expect.dimension != f.spec.dimension || expect.half_extent != f.spec.half_extent ||
        expect.points_per_axis != f.spec.points_per_axis) {
      throw Error::parameter("apply: --grid disagrees with the input file header");
    }
  }

  psb::ApplyOptions opts;
  if (path_name == "multiplier") {
    opts.path = psb::ApplyPath::multiplier;
  } else if (path_name == "full") {
    opts.path = psb::ApplyPath::full;
  } else if (path_name != "auto") {
    throw Error::parameter("apply: --path must be auto, multiplier, or full");
  }

  const psb::Symbol a = resolve_symbol(symbol, params_text, "apply --params",
                                       f.spec.dimension);
  save_output(psb::apply_op(a, f, opts), output);
  return 0;
}

int maximal_command(const std::string& op, double q, int window,
                    const std::string& placement, const std::string& dyadic,
                    const std::string& input, const std::string& output) {
  const GridFunction f = load_input(input);
  psb::CubeFamilySpec fam;
  fam.max_halfwidth_cells = window > 0 ? window : f.spec.points_per_axis / 2;
  if (placement == "centered") {
    fam.placement = psb::Placement::centered_only;
  } else if (placement != "all") {
    throw Error::parameter("maximal: --placement must be all or centered");
  }
  if (dyadic == "off") {
    fam.sharp_dyadic_sides = false;
  } else if (dyadic != "on") {
    throw Error::parameter("maximal: --dyadic must be on or off");
  }

  GridFunction result;
  if (op == "m") {
    result = psb::hardy_littlewood(f, fam);
  } else if (op == "mq") {
    result = psb::q_maximal(f, q, fam);
  } else if (op == "sharp") {
    result = psb::sharp_maximal(f, fam);
  } else {
    throw Error::parameter("maximal: --op must be m, mq, or sharp");
  }
  save_output(result, output);
  return 0;
}

int norm_command(const std::string& exponent_text, const std::string& input) {
  const GridFunction f = load_input(input);
  const psb::ExponentFunction p = parse_exponent(exponent_text, f.spec);
  const double value = psb::vlp_norm(f, p);
  const double residual = value > 0.0 ? std::abs(psb::modular(f, p, value) - 1.0) : 0.0;
  const nlohmann::json out{{"exponent", p.id},
                           {"p_minus", p.p_minus},
                           {"p_plus", p.p_plus},
                           {"value", value},
                           {"residual", residual}};
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudodifferential operator and maximal-function benchmarks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment preset and write reports");
  std::string run_preset, run_config, run_out;
  bool run_hist = false;
  run->add_option("--preset", run_preset, "preset name");
  run->add_option("--config", run_config, "JSON config with overrides");
  run->add_option("--out", run_out, "report directory");
  run->add_flag("--histograms", run_hist, "also write gnuplot ratio histograms");

  auto* certify = app.add_subcommand("certify", "estimate symbol-class constants");
  std::string cert_symbol, cert_params, cert_class, cert_spec, cert_out;
  int cert_dimension = 1, cert_levels = 0;
  double cert_threshold = 0.0;
  certify->add_option("--symbol", cert_symbol, "symbol id (catalog id or xi1)")->required();
  certify->add_option("--params", cert_params, "symbol parameters k=v,...");
  certify->add_option("--dimension", cert_dimension, "1 or 2");
  certify->add_option("--class", cert_class, "hormander or miyachi")->required();
  certify->add_option("--spec", cert_spec, "class parameters k=v,...");
  certify->add_option("--levels", cert_levels, "refinement levels");
  certify->add_option("--threshold", cert_threshold, "stability threshold");
  certify->add_option("--out", cert_out, "write the certificate JSON here");

  auto* apply = app.add_subcommand("apply", "apply Op(a) to a stored function");
  std::string ap_symbol, ap_params, ap_grid, ap_input, ap_output, ap_path = "auto";
  apply->add_option("--symbol", ap_symbol, "symbol id (catalog id or xi1)")->required();
  apply->add_option("--params", ap_params, "symbol parameters k=v,...");
  apply->add_option("--grid", ap_grid, "n,L,N cross-check against the input");
  apply->add_option("--input", ap_input, "input function (PSBF1)")->required();
  apply->add_option("--output", ap_output, "output path (.csv for text)")->required();
  apply->add_option("--path", ap_path, "auto, multiplier, or full");

  auto* maximal = app.add_subcommand("maximal", "apply a maximal operator");
  std::string mx_op, mx_placement = "all", mx_dyadic = "on", mx_input, mx_output;
  double mx_q = 2.0;
  int mx_window = 0;
  maximal->add_option("--op", mx_op, "m, mq, or sharp")->required();
  maximal->add_option("--q", mx_q, "exponent for mq");
  maximal->add_option("--window", mx_window, "halfwidth W in cells (0 = N/2)");
  maximal->add_option("--placement", mx_placement, "all or centered");
  maximal->add_option("--dyadic", mx_dyadic, "on or off (sharp side lengths)");
  maximal->add_option("--input", mx_input, "input function (PSBF1)")->required();
  maximal->add_option("--output", mx_output, "output path (.csv for text)")->required();

  auto* norm = app.add_subcommand("norm", "variable Lebesgue norm of a stored function");
  std::string nm_exponent, nm_input;
  norm->add_option("--exponent", nm_exponent,
                   "constant:p | log-decay:p | step:p1,p2 | loglog-decay:p | node,p CSV")
      ->required();
  norm->add_option("--input", nm_input, "input function (PSBF1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return run_command(run_preset, run_config, run_out, run_hist);
    if (certify->parsed()) {
      return certify_command(cert_symbol, cert_params, cert_dimension, cert_class, cert_spec,
                             cert_levels, cert_threshold, cert_out);
    }
    if (apply->parsed()) {
      return apply_command(ap_symbol, ap_params, ap_grid, ap_input, ap_output, ap_path);
    }
    if (maximal->parsed()) {
      return maximal_command(mx_op, mx_q, mx_window, mx_placement, mx_dyadic, mx_input,
                             mx_output);
    }
    if (norm->parsed()) return norm_command(nm_exponent, nm_input);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", kind_name(e.kind()), e.what());
    // Configuration mistakes are distinguishable from computations that fail.
    const bool config_error = e.kind() == Error::Kind::parameter ||
                              e.kind() == Error::Kind::catalog;
    return config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
