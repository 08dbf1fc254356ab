// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "smoothfix/acceptance.hpp"
#include "smoothfix/error.hpp"
#include "smoothfix/fixpoints.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/quicksort.hpp"
#include "smoothfix/spectral.hpp"
#include "smoothfix/stable.hpp"
#include "smoothfix/stats.hpp"
#include "smoothfix/verify.hpp"
#include "smoothfix/wbp.hpp"

namespace smoothfix::cli {
namespace {

using nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_dir;
  std::size_t mc_budget = 200'000;
};

struct FamilyArgs {
  std::string model = "quicksort";
  std::string regime;
  double sigma = 1.0;
  double beta = 0.0;
  double mu = 0.0;
  bool inhomogeneous = false;
  std::uint32_t depth = 20;
  double weight_floor = 1e-3;
  std::size_t batch = 10000;
  std::string spec_file;
};

void add_family_options(CLI::App* cmd, FamilyArgs& f) {
  cmd->add_option("--spec", f.spec_file, "key = value file of these options; the command line takes precedence");
  cmd->add_option("--model", f.model, "model spec name[:key=value,...]")->capture_default_str();
  cmd->add_option("--regime", f.regime, "alpha_ne_1_2, alpha_eq_1 or alpha_eq_2 (default: from the model's alpha)");
  cmd->add_option("--sigma", f.sigma, "scale of the stable component")->capture_default_str();
  cmd->add_option("--beta", f.beta, "skewness (alpha_ne_1_2 only)")->capture_default_str();
  cmd->add_option("--mu", f.mu, "shift multiplying W (alpha_eq_1 only)")->capture_default_str();
  cmd->add_flag("--inhomogeneous", f.inhomogeneous, "include the W* term");
  cmd->add_option("--depth", f.depth, "truncation depth of (W*, W)")->capture_default_str();
  cmd->add_option("--weight-floor", f.weight_floor, "stop expanding nodes with L below this")->capture_default_str();
  cmd->add_option("--batch", f.batch, "number of independent trees")->capture_default_str();
}

// Fills the options of `cmd` not given on the command line from a key = value
// file. Keys are option names without the leading dashes; '_' and '-' are
// interchangeable.
void apply_spec_file(CLI::App* cmd, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::FileError&) {
    throw InvalidArgument("cannot read spec file '" + path + "'");
  }
  for (const auto& item : items) {
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "spec") throw InvalidArgument("spec files cannot include other spec files");
    CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw InvalidArgument("unknown key '" + item.name + "' in spec file '" + path + "'");
    }
    if (opt->count() > 0) continue;
    try {
      for (const auto& v : item.inputs) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InvalidArgument("bad value for '" + item.name + "' in spec file: " + e.what());
    }
  }
}

struct Family {
  BasicSequenceModel model;
  ModelAnalysis analysis;
  SolutionSpec spec;
};

Family resolve_family(const FamilyArgs& f, const Common& c) {
  Family out{parse_model_spec(f.model), {}, {}};
  out.analysis = analyze_model(out.model, c.seed, c.mc_budget);
  out.spec.model = out.model;
  out.spec.regime = f.regime.empty() ? regime_for_alpha(out.analysis.profile.alpha) : parse_regime(f.regime);
  out.spec.sigma = f.sigma;
  out.spec.beta = f.beta;
  out.spec.mu = f.mu;
  out.spec.inhomogeneous = f.inhomogeneous;
  out.spec.depth = f.depth;
  out.spec.weight_floor = f.weight_floor;
  out.spec.validate(out.analysis.profile.alpha);
  return out;
}

ordered_json spec_json(const SolutionSpec& spec, double alpha) {
  ordered_json j;
  j["model"] = spec.model.spec_string();
  j["alpha"] = alpha;
  j["regime"] = to_string(spec.regime);
  j["sigma"] = spec.sigma;
  j["beta"] = spec.beta;
  j["mu"] = spec.mu;
  j["inhomogeneous"] = spec.inhomogeneous;
  j["depth"] = spec.depth;
  j["weight_floor"] = spec.weight_floor;
  return j;
}

ordered_json report_json(const TestReport& r) {
  ordered_json j;
  j["statistic_name"] = r.statistic_name;
  j["statistic"] = r.statistic;
  j["pvalue"] = r.pvalue;
  j["n_permutations"] = r.n_permutations;
  j["level"] = r.level;
  j["decision"] = r.pass ? "pass" : "reject";
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  j["test_seed"] = r.seed;
  return j;
}

ordered_json profile_json(const SpectralProfile& p) {
  ordered_json j;
  j["alpha"] = p.alpha;
  j["m_alpha"] = p.m_alpha;
  j["m_prime_alpha"] = p.m_prime_alpha;
  j["residual"] = p.residual;
  j["residual_bound"] = p.residual_bound;
  j["m_alpha_se"] = p.m_alpha_se;
  j["closed_form"] = p.closed_form;
  j["mc_samples"] = p.mc_samples;
  j["m_prime_negative"] = p.m_prime_negative;
  j["min_m_below_alpha"] = p.min_m_below_alpha;
  return j;
}

ordered_json assumptions_json(const AssumptionReport& r) {
  ordered_json j;
  j["A1"] = to_string(r.a1);
  j["A2"] = r.a2;
  j["A3"] = r.a3;
  j["A4a"] = to_string(r.a4a);
  j["A4b"] = to_string(r.a4b);
  j["A5"] = to_string(r.a5);
  j["C1"] = to_string(r.c1);
  j["C1_method"] = "moment-trajectory heuristic";
  j["C2"] = to_string(r.c2);
  ordered_json e;
  e["m0"] = r.m0;
  e["log_moment"] = r.log_moment;
  e["llog_moment"] = r.llog_moment;
  e["a5_moment"] = r.a5_moment;
  e["c2_beta"] = r.c2_beta;
  e["c1_ratio_p1"] = r.c1_ratio_p1;
  e["c1_ratio_p2"] = r.c1_ratio_p2;
  j["estimates"] = e;
  j["notes"] = r.notes;
  return j;
}

void write_values(const OutputContext& ctx, const std::string& name, const std::string& column,
                  const std::vector<double>& values) {
  CsvWriter csv(ctx, name, {"index", column});
  for (std::size_t i = 0; i < values.size(); ++i) csv.row({std::to_string(i), format_double(values[i])});
}

// --- spectral ---------------------------------------------------------------

int cmd_spectral(const OutputContext& ctx, const Common& c, const std::string& model_spec, std::ostream& out) {
  const auto model = parse_model_spec(model_spec);
  const auto analysis = analyze_model(model, c.seed, c.mc_budget);
  auto doc = stamped_json(ctx);
  doc["model"] = model.spec_string();
  doc["spectral"] = profile_json(analysis.profile);
  doc["alpha"] = analysis.profile.alpha;
  doc["lattice"] = to_string(model.is_lattice());
  doc["assumptions"] = assumptions_json(analysis.report);
  const auto path = write_json(ctx, "spectral.json", doc);
  out << "spectral " << model.spec_string() << ": alpha=" << format_double(analysis.profile.alpha)
      << " |m(alpha)-1|=" << analysis.profile.residual << " report=" << path.string() << '\n';
  return kExitOk;
}

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string model = "quicksort";
  std::string quantity = "Wstar";
  std::uint32_t depth = 12;
  std::size_t batch = 1000;
  double weight_floor = 0.0;
  std::string depths;
  bool dump_tree = false;
  std::string out;
};

int cmd_sample(const OutputContext& ctx, const Common& c, const SampleArgs& a, std::ostream& out) {
  const auto model = parse_model_spec(a.model);
  const auto analysis = analyze_model(model, c.seed, c.mc_budget);
  SamplerOptions s;
  s.depth = a.depth;
  s.batch = a.batch;
  s.seed = c.seed;
  s.workers = c.workers;
  s.growth.weight_floor = a.weight_floor;
  auto doc = stamped_json(ctx);
  doc["model"] = model.spec_string();
  doc["quantity"] = a.quantity;
  doc["alpha"] = analysis.profile.alpha;

  if (a.quantity == "martingale") {
    std::vector<std::uint32_t> depths;
    if (a.depths.empty()) {
      for (std::uint32_t d = 0; d <= a.depth; ++d) depths.push_back(d);
    } else {
      for (double d : parse_double_list(a.depths)) {
        if (d < 0 || d != std::floor(d)) throw InvalidArgument("depths must be non-negative integers");
        depths.push_back(static_cast<std::uint32_t>(d));
      }
    }
    const auto rep = martingale_report(model, analysis.profile, depths, a.batch, c.seed, c.workers);
    CsvWriter csv(ctx, a.out.empty() ? "martingale.csv" : a.out, {"depth", "wstar_mean", "wstar_se", "w_mean", "w_se"});
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.rows) {
      csv.row({std::to_string(r.depth), format_double(r.wstar_mean), format_double(r.wstar_se),
               format_double(r.w_mean), format_double(r.w_se)});
      rows.push_back({{"depth", r.depth}, {"wstar_mean", r.wstar_mean}, {"wstar_se", r.wstar_se},
                      {"w_mean", r.w_mean}, {"w_se", r.w_se}});
    }
    doc["rows"] = rows;
    doc["drift_per_level"] = rep.drift_per_level;
    doc["drift_se"] = rep.drift_se;
    doc["drift"] = to_string(rep.drift);
    write_json(ctx, "martingale.json", doc);
    out << "martingale " << model.spec_string() << ": drift=" << to_string(rep.drift)
        << " per level=" << rep.drift_per_level << " se=" << rep.drift_se << '\n';
  } else if (a.quantity == "coupled") {
    const auto pairs = sample_coupled(model, analysis.profile, analysis.report, s);
    CsvWriter csv(ctx, a.out.empty() ? "sample_coupled.csv" : a.out, {"index", "wstar", "w"});
    for (std::size_t i = 0; i < pairs.size(); ++i)
      csv.row({std::to_string(i), format_double(pairs.wstar[i]), format_double(pairs.w[i])});
    doc["depth"] = a.depth;
    doc["batch"] = pairs.size();
    doc["wstar_mean"] = mean(pairs.wstar);
    doc["w_mean"] = mean(pairs.w);
    doc["omitted_l2"] = pairs.omitted_l2;
    write_json(ctx, "sample_coupled.json", doc);
    out << "coupled " << model.spec_string() << ": " << pairs.size() << " pairs, mean W*=" << mean(pairs.wstar)
        << " mean W=" << mean(pairs.w) << '\n';
  } else if (a.quantity == "W" || a.quantity == "Wstar") {
    const auto batch = a.quantity == "W" ? sample_W(model, analysis.profile, analysis.report, s)
                                         : sample_Wstar(model, analysis.report, s);
    write_values(ctx, a.out.empty() ? "sample_" + a.quantity + ".csv" : a.out, a.quantity, batch.values);
    doc["depth"] = batch.depth;
    doc["batch"] = batch.values.size();
    doc["mean"] = batch.mean;
    doc["se"] = batch.se;
    doc["variance"] = sample_variance(batch.values);
    doc["diagnostic_label"] = batch.diagnostic_label;
    doc["diagnostic"] = batch.diagnostic;
    doc["omitted_l2"] = batch.omitted_l2;
    write_json(ctx, "sample_" + a.quantity + ".json", doc);
    out << a.quantity << " " << model.spec_string() << ": mean=" << batch.mean << " se=" << batch.se
        << " n=" << batch.values.size() << '\n';
  } else {
    throw InvalidArgument("unknown quantity '" + a.quantity + "' (expected W, Wstar, coupled or martingale)");
  }

  if (a.dump_tree) {
    GrowthOptions g;
    g.weight_floor = a.weight_floor;
    const auto tree = grow_tree(model, a.depth, batch_tree_seed(c.seed, 0), g);
    std::error_code ec;
    std::filesystem::create_directories(ctx.dir, ec);
    std::ofstream f(ctx.file("tree.jsonl"), std::ios::binary | std::ios::trunc);
    if (!f) throw ResourceError("cannot write " + ctx.file("tree.jsonl").string());
    f << ordered_json{{"config_hash", ctx.config_hash}, {"seed", ctx.seed}, {"tree_index", 0}}.dump() << '\n';
    tree.write_jsonl(f);
    if (!f) throw ResourceError("failed writing tree.jsonl");
  }
  return kExitOk;
}

// --- solution ---------------------------------------------------------------

int cmd_solution(const OutputContext& ctx, const Common& c, const FamilyArgs& f, const std::string& csv_out,
                 std::ostream& out) {
  const auto fam = resolve_family(f, c);
  const auto batch = solution_sample(fam.spec, fam.analysis.profile, fam.analysis.report, f.batch, c.seed, c.workers);
  write_values(ctx, csv_out.empty() ? "solution.csv" : csv_out, "x", batch.values);
  auto doc = stamped_json(ctx);
  doc["spec"] = spec_json(fam.spec, fam.analysis.profile.alpha);
  doc["batch"] = batch.values.size();
  doc["median"] = median(batch.values);
  doc["omitted_l2"] = batch.omitted_l2;
  write_json(ctx, "solution.json", doc);
  out << "solution " << fam.spec.model.spec_string() << " " << to_string(fam.spec.regime) << ": "
      << batch.values.size() << " samples, median=" << median(batch.values) << '\n';
  return kExitOk;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  FamilyArgs family;
  std::string candidate;
  std::string column;
  std::string impostor;
  double impostor_variance = 1.0;
  std::size_t n = 5000;
  double level = 0.01;
  std::size_t n_perm = 499;
  std::string statistic = "auto";
};

int cmd_verify(const OutputContext& ctx, const Common& c, const VerifyArgs& a, std::ostream& out) {
  auto doc = stamped_json(ctx);
  TestOptions test;
  test.level = a.level;
  test.n_perm = a.n_perm;
  test.workers = c.workers;
  std::vector<double> candidate;
  BasicSequenceModel model = parse_model_spec(a.family.model);
  Statistic automatic = Statistic::energy;
  if (!a.candidate.empty()) {
    candidate = read_samples(a.candidate, a.column);
    doc["candidate"] = {{"source", "file"}, {"path", a.candidate}};
  } else if (!a.impostor.empty()) {
    if (a.impostor != "normal") throw InvalidArgument("unknown impostor '" + a.impostor + "' (expected normal)");
    if (!(a.impostor_variance > 0.0)) throw InvalidArgument("impostor variance must be positive");
    candidate = sample_stable({2.0, std::sqrt(a.impostor_variance / 2.0), 0.0, 0.0}, 2 * a.n, c.seed);
    doc["candidate"] = {{"source", "impostor"}, {"law", "normal"}, {"variance", a.impostor_variance}};
  } else {
    const auto fam = resolve_family(a.family, c);
    candidate = solution_sample(fam.spec, fam.analysis.profile, fam.analysis.report, 2 * a.n, c.seed, c.workers)
                    .values;
    automatic = auto_statistic(fam.spec, fam.analysis.profile.alpha);
    doc["candidate"] = {{"source", "solution family"}, {"spec", spec_json(fam.spec, fam.analysis.profile.alpha)}};
  }
  test.statistic = a.statistic == "auto" ? automatic : parse_statistic(a.statistic);
  const auto report = fixed_point_test(model, candidate, a.n, c.seed, test);
  doc["model"] = model.spec_string();
  doc["n"] = a.n;
  doc["candidate_size"] = candidate.size();
  doc["report"] = report_json(report);
  const auto path = write_json(ctx, "verify.json", doc);
  out << "verify " << model.spec_string() << ": " << (report.pass ? "pass" : "reject") << " p=" << report.pvalue
      << " " << report.statistic_name << "=" << report.statistic << " report=" << path.string() << '\n';
  return report.pass ? kExitOk : kExitRejected;
}

// --- disintegrate -----------------------------------------------------------

struct DisintegrateArgs {
  FamilyArgs family;
  std::uint32_t depth_max = 10;
  std::string t_grid = "-2,-1,-0.5,-0.25,0,0.25,0.5,1,2";
  std::size_t trees = 100;
  std::string cf = "auto";
  bool mean_identity = false;
};

int cmd_disintegrate(const OutputContext& ctx, const Common& c, const DisintegrateArgs& a, std::ostream& out) {
  const auto fam = resolve_family(a.family, c);
  const double alpha = fam.analysis.profile.alpha;
  const auto grid = parse_double_list(a.t_grid);
  double t_max = 0.0;
  for (double t : grid) t_max = std::max(t_max, std::abs(t));

  const bool w_is_one = fam.model.is_conservative() && fam.spec.regime == Regime::alpha_eq_1;
  std::string cf_mode = a.cf;
  if (cf_mode == "auto") cf_mode = w_is_one && !fam.spec.inhomogeneous ? "analytic" : "tabulated";
  CharacteristicFunction phi;
  std::optional<TabulatedCF> table;
  std::optional<CoupledBatch> pairs;
  if (cf_mode == "analytic") {
    if (fam.spec.inhomogeneous)
      throw InvalidArgument("the analytic characteristic function needs a homogeneous spec; use --cf tabulated");
    const SolutionSpec spec = fam.spec;
    phi = [spec, alpha](double t) { return solution_cf_term(spec, alpha, 0.0, 1.0, t); };
  } else if (cf_mode == "tabulated" || a.mean_identity) {
    pairs = solution_pairs(fam.spec, fam.analysis.profile, fam.analysis.report, a.family.batch,
                           tagged_seed(c.seed, 0x7061697273ull), c.workers);
    table.emplace(fam.spec, alpha, *pairs, std::max(t_max, 1e-12), 1024);
    phi = [&table](double t) { return (*table)(t); };
  } else {
    throw InvalidArgument("unknown --cf '" + cf_mode + "' (expected auto, analytic or tabulated)");
  }

  const auto trace = disintegration_track(fam.spec, alpha, phi, a.depth_max, grid, c.seed, a.trees, c.workers);
  CsvWriter csv(ctx, "trace.csv", {"depth", "t", "re", "im", "ref_re", "ref_im"});
  for (std::uint32_t n = 0; n <= trace.depth_max; ++n) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      csv.row({std::to_string(n), format_double(grid[k]), format_double(trace.values[n][k].real()),
               format_double(trace.values[n][k].imag()), format_double(trace.reference[n][k].real()),
               format_double(trace.reference[n][k].imag())});
    }
  }

  auto doc = stamped_json(ctx);
  doc["spec"] = spec_json(fam.spec, alpha);
  doc["cf"] = cf_mode;
  doc["trees"] = trace.trees;
  doc["t_grid"] = grid;
  doc["deviation_first_tree"] = trace.deviation;
  doc["deviation_mean"] = trace.mean_deviation;
  doc["deviation_max"] = trace.max_deviation;
  doc["deviation_note"] = "convergence thresholds for these deviations are engineering calibrations with no "
                          "proven rate behind them";
  ordered_json means = ordered_json::array();
  for (std::uint32_t n = 0; n <= trace.depth_max; ++n) {
    ordered_json row = ordered_json::array();
    for (const auto& z : trace.batch_mean[n]) row.push_back({z.real(), z.imag()});
    means.push_back(row);
  }
  doc["batch_mean"] = means;
  ordered_json phis = ordered_json::array();
  for (const auto& z : trace.phi) phis.push_back({z.real(), z.imag()});
  doc["phi"] = phis;

  int code = kExitOk;
  if (a.mean_identity) {
    const auto rep = mean_identity_check(fam.spec, alpha, *pairs, a.depth_max, grid, a.trees, c.seed, c.workers);
    ordered_json pts = ordered_json::array();
    for (const auto& p : rep.points) {
      pts.push_back({{"t", p.t},
                     {"mean_phi", {p.mean_phi.real(), p.mean_phi.imag()}},
                     {"se", {p.se_re, p.se_im}},
                     {"cf", {p.cf.real(), p.cf.imag()}},
                     {"cf_se", {p.cf_se_re, p.cf_se_im}},
                     {"within", p.within}});
    }
    doc["mean_identity"] = {{"depth", rep.depth}, {"batch", rep.batch}, {"n_se", rep.n_se},
                            {"all_within", rep.all_within}, {"points", pts}};
    if (!rep.all_within) code = kExitRejected;
  }
  const auto path = write_json(ctx, "disintegrate.json", doc);
  out << "disintegrate " << fam.spec.model.spec_string() << ": depth " << trace.depth_max
      << " mean deviation=" << trace.mean_deviation.back();
  if (a.mean_identity) out << " mean identity " << (code == kExitOk ? "holds" : "fails");
  out << " report=" << path.string() << '\n';
  return code;
}

// --- quicksort --------------------------------------------------------------

struct QuicksortArgs {
  std::size_t n = 10000;
  std::size_t reps = 5000;
  std::size_t wstar_batch = 5000;
  std::uint32_t depth = 20;
  double weight_floor = 1e-3;
  double level = 0.01;
  std::size_t n_perm = 499;
};

int cmd_quicksort(const OutputContext& ctx, const Common& c, const QuicksortArgs& a, std::ostream& out) {
  const auto model = builtin_model("quicksort");
  const auto analysis = analyze_model(model, c.seed, c.mc_budget);
  const auto cn = simulate_cn(a.n, a.reps, c.seed, c.workers);
  SamplerOptions s;
  s.depth = a.depth;
  s.batch = a.wstar_batch;
  s.seed = tagged_seed(c.seed, 0x7773ull);
  s.workers = c.workers;
  s.growth.weight_floor = a.weight_floor;
  const auto ws = sample_Wstar(model, analysis.report, s);
  TestOptions test;
  test.level = a.level;
  test.n_perm = a.n_perm;
  test.workers = c.workers;
  const auto report = two_sample_test(cn.values, ws.values, c.seed, test);
  write_values(ctx, "quicksort.csv", "normalized", cn.values);
  auto doc = stamped_json(ctx);
  doc["n"] = a.n;
  doc["reps"] = a.reps;
  doc["exact_mean"] = exact_mean(a.n);
  doc["normalized_mean"] = cn.mean;
  doc["normalized_se"] = cn.se;
  doc["normalized_variance"] = sample_variance(cn.values);
  doc["wstar"] = {{"depth", a.depth},
                  {"batch", a.wstar_batch},
                  {"weight_floor", a.weight_floor},
                  {"mean", ws.mean},
                  {"variance", sample_variance(ws.values)}};
  doc["report"] = report_json(report);
  const auto path = write_json(ctx, "quicksort.json", doc);
  out << "quicksort n=" << a.n << " reps=" << a.reps << ": " << (report.pass ? "pass" : "reject")
      << " p=" << report.pvalue << " report=" << path.string() << '\n';
  return report.pass ? kExitOk : kExitRejected;
}

// --- suite ------------------------------------------------------------------

int cmd_suite(const OutputContext& ctx, const Common& c, const std::string& only, std::ostream& out) {
  AcceptanceOptions o;
  o.seed = c.seed;
  o.workers = c.workers;
  if (!only.empty()) {
    for (double d : parse_double_list(only)) {
      if (d < 1 || d > kCriterionCount || d != std::floor(d))
        throw InvalidArgument("--only takes criterion numbers 1.." + std::to_string(kCriterionCount));
      o.only.push_back(static_cast<int>(d));
    }
  }
  const auto results = run_acceptance(o, out);
  auto doc = stamped_json(ctx);
  ordered_json rows = ordered_json::array();
  bool all = true;
  for (const auto& r : results) {
    rows.push_back({{"criterion", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  }
  doc["criteria"] = rows;
  doc["all_pass"] = all;
  write_json(ctx, "suite.json", doc);
  return all ? kExitOk : kExitRejected;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo experiments on fixed points of the smoothing transform", "smoothfix"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file with one section per subcommand");
  Common common;
  app.add_option("--seed", common.seed, "master seed (required)")->required();
  app.add_option("--workers", common.workers, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
  app.add_option("--out-dir", common.out_dir,
                 std::string("output directory (default $") + kOutDirEnv + " or the current directory)");
  app.add_option("--mc-budget", common.mc_budget, "Monte Carlo draws for m(θ) and the assumption checks")
      ->capture_default_str();

  std::function<int(const OutputContext&)> action;

  std::string spectral_model = "quicksort";
  auto* spectral = app.add_subcommand("spectral", "find alpha and check the assumptions");
  spectral->add_option("--model", spectral_model, "model spec")->capture_default_str();
  spectral->callback([&] { action = [&](const OutputContext& ctx) { return cmd_spectral(ctx, common, spectral_model, out); }; });

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "sample W, W*, coupled pairs or the martingale report");
  sample->add_option("--model", sample_args.model, "model spec")->capture_default_str();
  sample->add_option("--quantity", sample_args.quantity, "W, Wstar, coupled or martingale")
      ->capture_default_str()
      ->check(CLI::IsMember({"W", "Wstar", "coupled", "martingale"}));
  sample->add_option("--depth", sample_args.depth, "generation depth")->capture_default_str();
  sample->add_option("--batch", sample_args.batch, "number of trees")->capture_default_str();
  sample->add_option("--weight-floor", sample_args.weight_floor, "stop expanding nodes with L below this")
      ->capture_default_str();
  sample->add_option("--depths", sample_args.depths, "comma-separated depths for the martingale report");
  sample->add_flag("--dump-tree", sample_args.dump_tree, "write the first tree as tree.jsonl");
  sample->add_option("--out", sample_args.out, "CSV path (relative to the output directory unless absolute)");
  sample->callback([&] { action = [&](const OutputContext& ctx) { return cmd_sample(ctx, common, sample_args, out); }; });

  FamilyArgs solution_args;
  auto* solution = app.add_subcommand("solution", "sample a member of the solution families");
  add_family_options(solution, solution_args);
  std::string solution_out;
  solution->add_option("--out", solution_out, "CSV path (relative to the output directory unless absolute)");
  solution->callback([&] {
    action = [&](const OutputContext& ctx) { return cmd_solution(ctx, common, solution_args, solution_out, out); };
  });

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "fixed-point test of a candidate law");
  add_family_options(verify, verify_args.family);
  verify->add_option("--candidate", verify_args.candidate, "CSV file of candidate samples");
  verify->add_option("--column", verify_args.column, "column of the candidate CSV");
  verify->add_option("--impostor", verify_args.impostor, "draw the candidate from a named law (normal)");
  verify->add_option("--impostor-variance", verify_args.impostor_variance, "variance of the impostor")
      ->capture_default_str();
  verify->add_option("--n", verify_args.n, "per-side sample size")->capture_default_str();
  verify->add_option("--level", verify_args.level, "test level")->capture_default_str();
  verify->add_option("--n-perm", verify_args.n_perm, "permutations")->capture_default_str();
  verify->add_option("--statistic", verify_args.statistic, "auto, energy or ecf")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "energy", "ecf"}));
  verify->callback([&] { action = [&](const OutputContext& ctx) { return cmd_verify(ctx, common, verify_args, out); }; });

  DisintegrateArgs dis_args;
  dis_args.family.batch = 10000;
  auto* dis = app.add_subcommand("disintegrate", "trace the multiplicative martingale Phi_n(t)");
  add_family_options(dis, dis_args.family);
  dis->add_option("--depth-max", dis_args.depth_max, "largest generation")->capture_default_str();
  dis->add_option("--t-grid", dis_args.t_grid, "comma-separated t values")->capture_default_str();
  dis->add_option("--trees", dis_args.trees, "trees for the batch statistics")->capture_default_str();
  dis->add_option("--cf", dis_args.cf, "auto, analytic or tabulated")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "analytic", "tabulated"}));
  dis->add_flag("--mean-identity", dis_args.mean_identity, "check the batch mean of Phi_depth-max against phi");
  dis->callback([&] { action = [&](const OutputContext& ctx) { return cmd_disintegrate(ctx, common, dis_args, out); }; });

  QuicksortArgs qs_args;
  auto* qs = app.add_subcommand("quicksort", "Quicksort comparisons against W*");
  qs->add_option("--n", qs_args.n, "keys per run")->capture_default_str();
  qs->add_option("--reps", qs_args.reps, "runs")->capture_default_str();
  qs->add_option("--wstar-batch", qs_args.wstar_batch, "W* samples")->capture_default_str();
  qs->add_option("--depth", qs_args.depth, "W* depth")->capture_default_str();
  qs->add_option("--weight-floor", qs_args.weight_floor, "W* weight floor")->capture_default_str();
  qs->add_option("--level", qs_args.level, "test level")->capture_default_str();
  qs->add_option("--n-perm", qs_args.n_perm, "permutations")->capture_default_str();
  qs->callback([&] { action = [&](const OutputContext& ctx) { return cmd_quicksort(ctx, common, qs_args, out); }; });

  std::string suite_only;
  auto* suite = app.add_subcommand("suite", "run the acceptance suite");
  suite->add_option("--only", suite_only, "comma-separated criterion numbers");
  suite->callback([&] { action = [&](const OutputContext& ctx) { return cmd_suite(ctx, common, suite_only, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::pair<CLI::App*, const FamilyArgs*> families[] = {
        {solution, &solution_args}, {verify, &verify_args.family}, {dis, &dis_args.family}};
    for (const auto& [cmd, args] : families)
      if (cmd->parsed() && !args->spec_file.empty()) apply_spec_file(cmd, args->spec_file);

    OutputContext ctx;
    ctx.dir = resolve_out_dir(common.out_dir);
    ctx.seed = common.seed;
    // The hash covers the global options and those of the chosen command.
    // Output locations, spec file names and the thread count change nothing
    // in the results, so they are left out.
    const std::string chosen = app.get_subcommands().front()->get_name();
    std::string canonical = "[" + chosen + "]\n";
    std::istringstream config(app.config_to_str(true, false));
    for (std::string line; std::getline(config, line);) {
      std::string key = line.substr(0, line.find('='));
      if (const auto dot = key.find('.'); dot != std::string::npos) {
        if (key.substr(0, dot) != chosen) continue;
        key = key.substr(dot + 1);
      }
      if (key == "out-dir" || key == "workers" || key == "out" || key == "spec" || key == "config") continue;
      canonical += line + "\n";
    }
    ctx.config_hash = hex64(fnv1a64(canonical));
    return action(ctx);
  } catch (const InvalidArgument& e) {
    err << "smoothfix: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "smoothfix: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "smoothfix: resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    err << "smoothfix: resource error: out of memory\n";
    return kExitResource;
  } catch (const std::exception& e) {
    err << "smoothfix: error: " << e.what() << '\n';
    return kExitResource;
  }
}

}  // namespace smoothfix::cli
