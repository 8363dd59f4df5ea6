#include "tensorreg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tensorreg/datagen.hpp"
#include "tensorreg/experiment.hpp"
#include "tensorreg/packing.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/serialize.hpp"
#include "tensorreg/solver.hpp"
#include "tensorreg/tns_io.hpp"
#include "tensorreg/var.hpp"

namespace fs = std::filesystem;

namespace tensorreg {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out = "-";
  std::string format = "json";
  bool seed_given = false, threads_given = false;
};

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing " + path);
}

// Plain objects: pretty JSON, or key,value CSV lines with nested values as
// quoted compact JSON.
std::string render_object(const ojson& j, ReportFormat format) {
  if (format == ReportFormat::Json) return j.dump(2) + "\n";
  std::ostringstream os;
  os << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    std::string cell = v.dump();
    if (v.is_structured() || v.is_string()) {
      std::string q = "\"";
      for (char c : cell) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      cell = q + "\"";
    }
    os << it.key() << "," << cell << "\n";
  }
  return os.str();
}

void emit(const ojson& j, const Globals& g, std::ostream& out) {
  write_text(render_object(j, report_format_from_string(g.format)), g.out, out);
}

void emit(const ExperimentReport& r, const Globals& g, std::ostream& out) {
  write_text(render_report(r, report_format_from_string(g.format)), g.out, out);
}

DenseTensor stack(const std::vector<DenseTensor>& items, const Shape& item_shape) {
  Shape s{items.size()};
  s.insert(s.end(), item_shape.begin(), item_shape.end());
  std::vector<double> data;
  data.reserve(numel(s));
  for (const auto& t : items) data.insert(data.end(), t.data().begin(), t.data().end());
  return DenseTensor(s, std::move(data));
}

std::vector<DenseTensor> unstack(const DenseTensor& t) {
  if (t.order() < 1) throw FormatError("stacked tensor needs a leading sample axis");
  const Shape item(t.shape().begin() + 1, t.shape().end());
  const std::size_t k = numel(item);
  std::vector<DenseTensor> out;
  for (std::size_t i = 0; i < t.shape()[0]; ++i)
    out.emplace_back(item, std::vector<double>(t.data().begin() + static_cast<std::ptrdiff_t>(i * k),
                                               t.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * k)));
  return out;
}

RegularizerSpec load_regularizer(const std::string& text) {
  if (text.size() > 5 && text.substr(text.size() - 5) == ".json") return regularizer_from_json(read_json_file(text));
  return parse_regularizer(text);
}

// ---- gen ----

struct GenArgs {
  std::string model_file, cls, shape, dir, design_factor;
  std::size_t param = 1, n = 0;
  std::optional<std::size_t> split, axis;
  double magnitude = 1.0, sigma = 1.0;
};

int cmd_gen(const GenArgs& a, const Globals& g, std::ostream& out) {
  ModelClassSpec model;
  if (!a.model_file.empty()) {
    model = model_spec_from_json(read_json_file(a.model_file));
  } else {
    if (a.cls.empty() || a.shape.empty()) throw ConfigError("gen needs --model or --class with --shape");
    model.cls = model_class_from_string(a.cls);
    model.param = a.param;
    model.shape = parse_shape(a.shape);
    model.magnitude = a.magnitude;
    model.axis = a.axis;
    model.validate();
  }
  if (a.n == 0) throw ConfigError("--n must be positive");
  const std::size_t split = a.split.value_or(default_split(model.cls));
  const DenseTensor truth = gen_truth(model, derive_seed(g.seed, {1}));
  RegressionProblem prob;
  std::string generator = "iid";
  if (model.cls == ModelClass::T3) {
    if (a.split && *a.split != 2) throw ConfigError("VAR data has split 2");
    if (a.sigma != 1.0) throw ConfigError("VAR innovations have unit variance");
    prob = gen_var_series(var_model_from_truth(truth), a.n, derive_seed(g.seed, {2}));
    generator = "var";
  } else {
    Design design;
    if (!a.design_factor.empty()) {
      const DenseTensor f = read_tns_file(a.design_factor);
      require_order(f, 2, "design factor");
      design.covariance_factor = Eigen::Map<const ParamMatrix>(f.data().data(), static_cast<Eigen::Index>(f.shape()[0]),
                                                               static_cast<Eigen::Index>(f.shape()[1]));
    }
    prob = gen_problem(truth, a.n, split, a.sigma, design, derive_seed(g.seed, {2}));
  }
  std::error_code ec;
  fs::create_directories(a.dir, ec);
  if (ec) throw IoError("cannot create " + a.dir + ": " + ec.message());
  const fs::path dir(a.dir);
  write_tns_file((dir / "truth.tns").string(), truth);
  write_tns_file((dir / "covariates.tns").string(), stack(prob.covariates, prob.covariate_shape()));
  write_tns_file((dir / "responses.tns").string(), stack(prob.responses, prob.response_shape()));
  const auto member = certify_membership(model, truth);
  ojson manifest{{"format", "tensorreg-problem"},
                 {"model", to_json(model)},
                 {"n", a.n},
                 {"split", prob.split},
                 {"noise_sigma", prob.noise_sigma},
                 {"seed", g.seed},
                 {"generator", generator},
                 {"files", {{"truth", "truth.tns"}, {"covariates", "covariates.tns"}, {"responses", "responses.tns"}}},
                 {"membership", {{"member", member.member}, {"detail", member.detail}}},
                 {"truth_frobenius", truth.frobenius_norm()}};
  write_text(manifest.dump(2) + "\n", (dir / "manifest.json").string(), out);
  emit(manifest, g, out);
  return kExitOk;
}

// ---- solve ----

struct SolveArgs {
  std::string problem, regularizer, lambda = "auto", solver_file, estimate;
  double multiplier = 1.0, c_u = 1.0;
  std::size_t width_draws = 2000;
  std::optional<std::size_t> max_iters;
};

int cmd_solve(const SolveArgs& a, const Globals& g, std::ostream& out) {
  const ojson manifest = read_json_file(a.problem);
  const fs::path dir = fs::path(a.problem).parent_path();
  RegressionProblem prob;
  ModelClassSpec model;
  try {
    prob.split = manifest.at("split").get<std::size_t>();
    prob.noise_sigma = manifest.at("noise_sigma").get<double>();
    model = model_spec_from_json(manifest.at("model"));
    const auto& files = manifest.at("files");
    prob.covariates = unstack(read_tns_file((dir / files.at("covariates").get<std::string>()).string()));
    prob.responses = unstack(read_tns_file((dir / files.at("responses").get<std::string>()).string()));
    if (files.contains("truth")) prob.truth = read_tns_file((dir / files.at("truth").get<std::string>()).string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad manifest: ") + e.what());
  }
  prob.validate();
  const DesignMoments mo = summarize(prob);
  const RegularizerSpec reg = load_regularizer(a.regularizer);
  if (!reg.has_prox() && reg.kind != RegKind::MatricizedNuclearSum)
    throw UnsupportedKind(reg.describe() + " cannot be used as a penalty");
  SolverConfig cfg;
  if (!a.solver_file.empty()) cfg = solver_config_from_json(read_json_file(a.solver_file));
  if (a.max_iters) cfg.max_iters = *a.max_iters;

  ojson report{{"problem", a.problem}, {"regularizer", to_json(reg)}};
  double lambda = 0.0;
  if (a.lambda == "auto") {
    const auto w = gaussian_width_mc(reg, mo.parameter_shape(), a.width_draws, derive_seed(g.seed, {0}), g.threads,
                                     cfg.dual);
    lambda = prob.noise_sigma * lambda_rule(w, mo.n, a.c_u, reg.c_R(), a.multiplier);
    report["lambda_source"] = "auto";
    report["width"] = to_json(w);
    report["c_u"] = a.c_u;
    report["lambda_multiplier"] = a.multiplier;
  } else {
    try {
      std::size_t used = 0;
      lambda = std::stod(a.lambda, &used);
      if (used != a.lambda.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("--lambda must be a number or 'auto'");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("--lambda must be nonnegative");
    report["lambda_source"] = "given";
  }
  report["solver"] = to_json(cfg);
  const SolveResult res =
      reg.kind == RegKind::MatricizedNuclearSum ? admm_matricized(mo, lambda, cfg) : fista_solve(mo, reg, lambda, cfg);
  report["result"] = to_json(res);
  if (prob.truth) {
    const DenseTensor delta = res.estimate - *prob.truth;
    const double en = empirical_norm(mo, delta);
    report["err_f2"] = delta.squared_norm();
    report["err_n2"] = en * en;
  }
  if (!a.estimate.empty()) {
    write_tns_file(a.estimate, res.estimate);
    report["estimate"] = a.estimate;
  }
  emit(report, g, out);
  return res.status == SolveStatus::Converged ? kExitOk : kExitNoConvergence;
}

// ---- width / rate / compare ----

struct WidthArgs {
  std::string config;
  std::vector<std::string> kinds, shapes;
  std::size_t draws = 2000;
};

int cmd_width(const WidthArgs& a, const Globals& g, std::ostream& out) {
  WidthExperimentConfig c;
  if (!a.config.empty()) {
    c = width_config_from_json(read_json_file(a.config));
    if (g.seed_given) c.seed = g.seed;
    if (g.threads_given) c.threads = g.threads;
  } else {
    for (const auto& k : a.kinds) c.kinds.push_back(parse_regularizer(k));
    for (const auto& s : a.shapes) c.shapes.push_back(parse_shape(s));
    c.draws = a.draws;
    c.seed = g.seed;
    c.threads = g.threads;
  }
  emit(width_experiment(c), g, out);
  return kExitOk;
}

int cmd_rate(const std::string& config, const Globals& g, std::ostream& out) {
  RateExperimentConfig c = rate_config_from_json(read_json_file(config));
  if (g.seed_given) c.seed = g.seed;
  if (g.threads_given) c.threads = g.threads;
  emit(rate_experiment(c), g, out);
  return kExitOk;
}

int cmd_compare(const std::string& config, const Globals& g, std::ostream& out) {
  ComparisonConfig c = comparison_config_from_json(read_json_file(config));
  if (g.seed_given) c.seed = g.seed;
  if (g.threads_given) c.threads = g.threads;
  emit(comparison_experiment(c), g, out);
  return kExitOk;
}

// ---- packing ----

struct PackingArgs {
  std::string kind = "full";
  std::size_t d = 0, s = 0, d1 = 0, d2 = 0, r = 0, budget = 100000, target = 0;
  std::optional<double> delta;
  std::optional<std::size_t> fano_n;
  std::optional<double> fano_delta;
  double c_u = 1.0;
  bool elements = false;
};

int cmd_packing(const PackingArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  PackingShape shape;
  if (a.kind == "full") {
    shape = PackingShape::full();
  } else if (a.kind == "sparse") {
    shape = PackingShape::sparse(a.s);
  } else if (a.kind == "lowrank") {
    shape = PackingShape::lowrank(a.d1, a.d2, a.r);
  } else {
    throw ConfigError("--kind must be full, sparse or lowrank");
  }
  const std::size_t d = a.d;
  if (a.fano_n && !a.fano_delta) throw ConfigError("--fano-n needs --fano-delta");
  double delta = 0.0;
  ojson report = ojson::object();
  if (a.delta) {
    delta = *a.delta;
  } else if (a.fano_n) {
    // Packing scale chosen so its window sits inside the Fano window.
    delta = fano_packing_delta(*a.fano_n, a.c_u, *a.fano_delta);
    report["delta_rule"] = "2 sqrt(n) delta_fano / c_u";
  } else {
    throw ConfigError("packing needs --delta (or --fano-n with --fano-delta)");
  }
  PackingSet set;
  try {
    set = hypercube_packing(d, delta, shape, a.budget, g.seed, a.target);
  } catch (const BudgetExhausted& e) {
    err << render_object(to_json(e.partial(), false), ReportFormat::Json);
    throw;
  }
  report["packing"] = to_json(set, a.elements);
  report["verification"] = to_json(verify_packing(set));
  if (a.fano_n) {
    report["fano"] = to_json(fano_precondition_check(set, *a.fano_n, a.c_u, *a.fano_delta));
    report["fano"]["n"] = *a.fano_n;
    report["fano"]["c_u"] = a.c_u;
    report["fano"]["delta"] = *a.fano_delta;
  }
  emit(report, g, out);
  return kExitOk;
}

// ---- var-extrema ----

struct VarArgs {
  std::string model;
  std::size_t grid = 64, random_m = 0, random_p = 0, mc_n = 0;
  double random_scale = 0.1, tol = 1e-6;
};

int cmd_var(const VarArgs& a, const Globals& g, std::ostream& out) {
  std::optional<VarModel> model;
  if (!a.model.empty()) {
    model = var_model_from_json(read_json_file(a.model));
  } else {
    if (a.random_m == 0 || a.random_p == 0) throw ConfigError("var-extrema needs --model or --random-m/--random-p");
    model = random_var_model(a.random_m, a.random_p, a.random_scale, derive_seed(g.seed, {3}));
  }
  const auto ext = var_spectral_extrema(*model, a.grid, a.tol);
  ojson report{{"model", to_json(*model)}, {"extrema", to_json(ext)}};
  report["c_u"] = 1.0 / std::sqrt(ext.mu_min);
  report["c_ell"] = 1.0 / std::sqrt(ext.mu_max);
  if (a.mc_n > 0) {
    const auto sc = var_sandwich_check(*model, a.mc_n, derive_seed(g.seed, {4}), ext);
    report["sandwich"] = {{"n", a.mc_n},
                          {"lower_bound", sc.lower_bound},
                          {"upper_bound", sc.upper_bound},
                          {"gram_min", sc.gram_min},
                          {"gram_max", sc.gram_max},
                          {"excess", sc.excess()}};
  }
  emit(report, g, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regularized tensor regression toolkit", "tensorreg"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file ('-' for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a problem from a model class");
  gen->add_option("--model", ga.model_file, "Model class JSON file");
  gen->add_option("--class", ga.cls, "Model class tag");
  gen->add_option("--param", ga.param, "Sparsity or rank");
  gen->add_option("--shape", ga.shape, "Shape, e.g. 8x8x8");
  gen->add_option("--magnitude", ga.magnitude, "Signal magnitude");
  gen->add_option("--axis", ga.axis, "Fiber mode or slice axis");
  gen->add_option("--n", ga.n, "Sample size")->required();
  gen->add_option("--split", ga.split, "Covariate order");
  gen->add_option("--sigma", ga.sigma, "Noise level");
  gen->add_option("--design-factor", ga.design_factor, "TNS file with the covariance factor");
  gen->add_option("--dir", ga.dir, "Output directory")->required();

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Fit the regularized estimator");
  solve->add_option("--problem", sa.problem, "manifest.json written by gen")->required();
  solve->add_option("--regularizer", sa.regularizer, "e.g. EntryL1, FiberGroup:1, SliceFrob:0:1 or a .json file")
      ->required();
  solve->add_option("--lambda", sa.lambda, "Penalty level or 'auto'");
  solve->add_option("--multiplier", sa.multiplier, "Lambda rule multiplier (>= 1)");
  solve->add_option("--c-u", sa.c_u, "Upper design constant for the lambda rule");
  solve->add_option("--width-draws", sa.width_draws, "Monte Carlo draws for the width");
  solve->add_option("--solver", sa.solver_file, "Solver config JSON");
  solve->add_option("--max-iters", sa.max_iters, "Iteration cap");
  solve->add_option("--estimate", sa.estimate, "Write the estimate to this TNS file");

  WidthArgs wa;
  auto* width = app.add_subcommand("width", "Gaussian width study");
  width->add_option("--config", wa.config, "Width experiment JSON");
  width->add_option("--kind", wa.kinds, "Regularizer (repeatable)");
  width->add_option("--shape", wa.shapes, "Shape such as 10x10x10 (repeatable)");
  width->add_option("--draws", wa.draws, "Monte Carlo draws per cell");

  std::string rate_config;
  auto* rate = app.add_subcommand("rate", "Rate verification sweep");
  rate->add_option("--config", rate_config, "Rate experiment JSON")->required();

  std::string compare_config;
  auto* compare = app.add_subcommand("compare", "Compare estimators on shared data");
  compare->add_option("--config", compare_config, "Comparison experiment JSON")->required();

  PackingArgs pa;
  auto* packing = app.add_subcommand("packing", "Construct and verify a hypercube packing");
  packing->add_option("--kind", pa.kind, "full, sparse or lowrank");
  packing->add_option("--d", pa.d, "Ambient dimension");
  packing->add_option("--s", pa.s, "Nonzeros (sparse)");
  packing->add_option("--d1", pa.d1, "Rows (lowrank)");
  packing->add_option("--d2", pa.d2, "Columns (lowrank)");
  packing->add_option("--r", pa.r, "Rank (lowrank)");
  packing->add_option("--delta", pa.delta, "Packing scale");
  packing->add_option("--budget", pa.budget, "Candidate draws");
  packing->add_option("--target", pa.target, "Stop after this many elements");
  packing->add_option("--fano-n", pa.fano_n, "Check the Fano preconditions at this n");
  packing->add_option("--fano-delta", pa.fano_delta, "Fano delta");
  packing->add_option("--c-u", pa.c_u, "Upper design constant");
  packing->add_flag("--elements", pa.elements, "Include the elements in the report");

  VarArgs va;
  auto* var = app.add_subcommand("var-extrema", "Spectral extremes of a VAR model");
  var->add_option("--model", va.model, "VAR model JSON");
  var->add_option("--random-m", va.random_m, "Draw a random model of this dimension");
  var->add_option("--random-p", va.random_p, "Lag order of the random model");
  var->add_option("--random-scale", va.random_scale, "Entry scale of the random model");
  var->add_option("--grid", va.grid, "Initial frequency grid");
  var->add_option("--tol", va.tol, "Grid refinement tolerance");
  var->add_option("--mc-n", va.mc_n, "Also compare an empirical gram of this size");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  g.seed_given = seed_opt->count() > 0;
  g.threads_given = threads_opt->count() > 0;

  try {
    if (*gen) return cmd_gen(ga, g, out);
    if (*solve) return cmd_solve(sa, g, out);
    if (*width) return cmd_width(wa, g, out);
    if (*rate) return cmd_rate(rate_config, g, out);
    if (*compare) return cmd_compare(compare_config, g, out);
    if (*packing) return cmd_packing(pa, g, out, err);
    if (*var) return cmd_var(va, g, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fatal: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitValidation;
}

}  // namespace tensorreg
