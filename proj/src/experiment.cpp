#include "tensorreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "tensorreg/rng.hpp"
#include "tensorreg/serialize.hpp"
#include "tensorreg/var.hpp"

namespace tensorreg {

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

double dlog(std::size_t x) { return std::log(static_cast<double>(x)); }

// Non-finite numbers become null so reports round-trip exactly.
ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

std::array<std::size_t, 2> other_axes(std::size_t a) {
  return a == 0 ? std::array<std::size_t, 2>{1, 2} : a == 1 ? std::array<std::size_t, 2>{0, 2}
                                                            : std::array<std::size_t, 2>{0, 1};
}

}  // namespace

double rate_value(const std::string& tag, const ModelClassSpec& model, std::size_t n) {
  if (n == 0) throw InvalidValue("rate needs n >= 1");
  const Shape& d = model.shape;
  if (d.size() != 3) throw ShapeMismatch("rates are defined for third-order shapes");
  const double k = static_cast<double>(model.param);
  const std::size_t a = model.effective_axis();
  const auto o = other_axes(a);
  double v = 0.0;
  if (tag == "s_log_d1d2d3") {
    v = k * dlog(d[0] * d[1] * d[2]);
  } else if (tag == "s_max_da_log_rest") {
    v = k * std::max(static_cast<double>(d[a]), dlog(d[o[0]] * d[o[1]]));
  } else if (tag == "s_max_dadb_log_dc") {
    v = k * std::max(static_cast<double>(d[o[0]] * d[o[1]]), dlog(d[a]));
  } else if (tag == "r_max_da_db_log_dc") {
    v = k * std::max({static_cast<double>(d[o[0]]), static_cast<double>(d[o[1]]), dlog(d[a])});
  } else if (tag == "r_max_pair_products") {
    v = k * static_cast<double>(std::max({d[0] * d[1], d[0] * d[2], d[1] * d[2]}));
  } else if (tag == "s_max_m2_log_p") {
    v = k * std::max(static_cast<double>(d[1] * d[2]), dlog(d[0]));
  } else if (tag == "r_max_m_log_p_over_r") {
    v = k * std::max(static_cast<double>(d[1]), std::log(static_cast<double>(d[0]) / k));
  } else if (tag == "s_max_p_2log_m") {
    v = k * std::max(static_cast<double>(d[1]), 2.0 * dlog(d[0]));
  } else if (tag == "r_max_dk") {
    v = k * static_cast<double>(std::max({d[0], d[1], d[2]}));
  } else {
    throw ConfigError("unknown rate tag '" + tag + "'");
  }
  if (!(v > 0.0)) throw InvalidValue("rate expression '" + tag + "' is not positive at this shape");
  return v / static_cast<double>(n);
}

std::string default_rate_tag(ModelClass cls) {
  switch (cls) {
    case ModelClass::Theta1: return "s_log_d1d2d3";
    case ModelClass::Theta2: return "s_max_da_log_rest";
    case ModelClass::Theta3: return "s_max_dadb_log_dc";
    case ModelClass::Theta4: return "r_max_da_db_log_dc";
    case ModelClass::Theta5: return "r_max_pair_products";
    case ModelClass::T1: return "s_max_m2_log_p";
    case ModelClass::T2: return "r_max_m_log_p_over_r";
    case ModelClass::T3: return "s_max_p_2log_m";
    case ModelClass::T4: return "r_max_dk";
  }
  throw ConfigError("unknown class");
}

std::size_t default_split(ModelClass cls) {
  switch (cls) {
    case ModelClass::T1:
    case ModelClass::T2: return 1;
    case ModelClass::T3: return 2;
    default: return 3;
  }
}

bool matched_class(const ModelClassSpec& model, const RegularizerSpec& reg) {
  const auto slices_on = [&](RegKind k, std::size_t axis) { return reg.kind == k && reg.slice_axis() == axis; };
  switch (model.cls) {
    case ModelClass::Theta1: return reg.kind == RegKind::EntryL1;
    case ModelClass::Theta2: return reg.kind == RegKind::FiberGroup && reg.mode == model.effective_axis();
    case ModelClass::Theta3: return slices_on(RegKind::SliceFrob, model.effective_axis());
    case ModelClass::Theta4: return slices_on(RegKind::SliceNuclear, model.effective_axis());
    case ModelClass::Theta5: return reg.kind == RegKind::MatricizedNuclearSum;
    case ModelClass::T1: return slices_on(RegKind::SliceFrob, 0);
    case ModelClass::T2: return slices_on(RegKind::SliceNuclear, 0);
    case ModelClass::T3: return reg.kind == RegKind::FiberGroup && reg.mode == 1;
    case ModelClass::T4: return reg.kind == RegKind::MatricizedNuclearSum;
  }
  return false;
}

namespace {

bool solvable(const RegularizerSpec& r) { return r.has_prox() || r.kind == RegKind::MatricizedNuclearSum; }

void check_common(const ModelClassSpec& model, std::optional<std::size_t> split, double sigma, double multiplier,
                  std::size_t width_draws, std::size_t threads) {
  model.validate();
  if (split && (*split == 0 || *split > 3)) throw ConfigError("split must lie in 1..3");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("noise_sigma must be positive");
  if (model.cls == ModelClass::T3 && sigma != 1.0) throw ConfigError("VAR innovations have unit variance");
  if (!(multiplier >= 1.0)) throw ConfigError("lambda multiplier must be at least 1");
  if (width_draws < 100) throw ConfigError("width_draws must be at least 100");
  if (threads == 0) throw ConfigError("threads must be at least 1");
}

struct CellData {
  DesignMoments moments;
  std::string path;
};

CellData cell_moments(const ModelClassSpec& model, const DenseTensor& truth, std::size_t split, std::size_t n,
                      double sigma, std::uint64_t seed) {
  if (model.cls == ModelClass::T3) return {var_design_moments(var_model_from_truth(truth), n, seed), "var_stream"};
  std::size_t dm = 1;
  for (std::size_t k = 0; k < split; ++k) dm *= truth.shape()[k];
  if (n >= dm) return {sample_design_moments(truth, n, split, sigma, Design{}, seed), "moments"};
  return {summarize(gen_problem(truth, n, split, sigma, Design{}, seed)), "samples"};
}

SolveResult solve_with(const DesignMoments& m, const RegularizerSpec& reg, double lambda, const SolverConfig& cfg) {
  if (reg.kind == RegKind::MatricizedNuclearSum) return admm_matricized(m, lambda, cfg);
  return fista_solve(m, reg, lambda, cfg);
}

double c_u_for(const ModelClassSpec& model, const DenseTensor& truth, std::optional<double> fixed) {
  if (fixed) return *fixed;
  if (model.cls == ModelClass::T3) {
    const auto ext = var_spectral_extrema(var_model_from_truth(truth));
    return 1.0 / std::sqrt(ext.mu_min);
  }
  return 1.0;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

ojson fit_json(const LineFit& f) { return {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"r2", num(f.r2)}}; }

}  // namespace

void RateExperimentConfig::validate() const {
  check_common(model, split, noise_sigma, lambda_multiplier, width_draws, threads);
  regularizer.validate();
  if (!solvable(regularizer)) throw ConfigError("regularizer " + regularizer.describe() + " has no solver");
  if (!matched_class(model, regularizer))
    throw ConfigError("regularizer " + regularizer.describe() + " is not matched to class " + to_string(model.cls));
  if (n_grid.size() < 4) throw ConfigError("n grid needs at least 4 points");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw ConfigError("n grid values must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n grid must be strictly increasing");
  }
  if (replications < 10) throw ConfigError("replications must be at least 10");
  if (c_u && !(*c_u > 0.0)) throw ConfigError("c_u must be positive");
  rate_value(rate.empty() ? default_rate_tag(model.cls) : rate, model, 1);
}

ExperimentReport rate_experiment(const RateExperimentConfig& config) {
  config.validate();
  const std::string tag = config.rate.empty() ? default_rate_tag(config.model.cls) : config.rate;
  const std::size_t split = config.split.value_or(default_split(config.model.cls));
  const std::size_t reps = config.replications, cells = config.n_grid.size() * reps;

  const WidthEstimate width = gaussian_width_mc(config.regularizer, config.model.shape, config.width_draws,
                                                derive_seed(config.seed, {0}), config.threads, config.solver.dual);
  std::vector<DenseTensor> truths;
  std::vector<double> c_us;
  for (std::size_t r = 0; r < reps; ++r) {
    truths.push_back(gen_truth(config.model, derive_seed(config.seed, {1, r})));
    c_us.push_back(c_u_for(config.model, truths.back(), config.c_u));
  }

  struct Cell {
    double lambda = 0, err_f2 = 0, err_n2 = 0, kkt = 0;
    std::size_t iterations = 0;
    SolveStatus status = SolveStatus::MaxIters;
    std::string path;
  };
  std::vector<Cell> out(cells);
  parallel_for(cells, config.threads, [&](std::size_t idx) {
    const std::size_t i = idx / reps, r = idx % reps;
    const std::size_t n = config.n_grid[i];
    const auto data = cell_moments(config.model, truths[r], split, n, config.noise_sigma,
                                   derive_seed(config.seed, {2, i, r}));
    Cell& c = out[idx];
    c.lambda = config.noise_sigma *
               lambda_rule(width, n, c_us[r], config.regularizer.c_R(), config.lambda_multiplier);
    const SolveResult res = solve_with(data.moments, config.regularizer, c.lambda, config.solver);
    const DenseTensor delta = res.estimate - truths[r];
    c.err_f2 = delta.squared_norm();
    const double en = empirical_norm(data.moments, delta);
    c.err_n2 = en * en;
    c.kkt = res.kkt_residual;
    c.iterations = res.iterations;
    c.status = res.status;
    c.path = data.path;
  });

  ExperimentReport rep;
  rep.experiment = "rate";
  rep.config = to_json(config);
  rep.columns = {"n_index", "n", "replication", "rate", "c_u", "lambda", "err_f2", "err_n2",
                 "status", "iterations", "kkt_residual", "data"};
  std::vector<double> xs, ys_f, ys_n;
  ojson per_n = ojson::array();
  std::size_t max_iters_total = 0, diverged_total = 0;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    const std::size_t n = config.n_grid[i];
    const double rate = rate_value(tag, config.model, n);
    std::vector<double> f, e;
    std::size_t conv = 0, maxit = 0, div = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const Cell& c = out[i * reps + r];
      rep.rows.push_back({i, n, r, num(rate), num(c_us[r]), num(c.lambda), num(c.err_f2), num(c.err_n2),
                          to_string(c.status), c.iterations, num(c.kkt), c.path});
      f.push_back(c.err_f2);
      e.push_back(c.err_n2);
      conv += c.status == SolveStatus::Converged;
      maxit += c.status == SolveStatus::MaxIters;
      div += c.status == SolveStatus::Diverged;
    }
    const double mf = median(f), me = median(e);
    xs.push_back(std::log(rate));
    ys_f.push_back(std::log(mf));
    ys_n.push_back(std::log(me));
    max_iters_total += maxit;
    diverged_total += div;
    per_n.push_back({{"n", n},
                     {"rate", num(rate)},
                     {"median_f2", num(mf)},
                     {"median_n2", num(me)},
                     {"q10_f2", num(quantile(f, 0.1))},
                     {"q25_f2", num(quantile(f, 0.25))},
                     {"q75_f2", num(quantile(f, 0.75))},
                     {"q90_f2", num(quantile(f, 0.9))},
                     {"converged", conv},
                     {"max_iters", maxit},
                     {"diverged", div}});
  }
  rep.summary = {{"rate_tag", tag},
                 {"split", split},
                 {"width", {{"mean", num(width.mean)}, {"std_error", num(width.std_error)}, {"draws", width.draws}}},
                 {"fit_f2", fit_json(fit_line(xs, ys_f))},
                 {"fit_n2", fit_json(fit_line(xs, ys_n))},
                 {"per_n", per_n},
                 {"max_iters_total", max_iters_total},
                 {"diverged_total", diverged_total}};
  return rep;
}

void WidthExperimentConfig::validate() const {
  if (kinds.empty() || shapes.empty()) throw ConfigError("width experiment needs kinds and shapes");
  for (const auto& k : kinds) k.validate();
  for (const auto& s : shapes)
    if (s.size() != 3) throw ConfigError("width shapes must be third order");
  if (draws < 100) throw ConfigError("draws must be at least 100");
  if (threads == 0) throw ConfigError("threads must be at least 1");
  if (!(band_lo > 0.0 && band_lo < band_hi)) throw ConfigError("ratio band must satisfy 0 < lo < hi");
}

ExperimentReport width_experiment(const WidthExperimentConfig& config) {
  config.validate();
  ExperimentReport rep;
  rep.experiment = "width";
  rep.config = to_json(config);
  rep.columns = {"kind", "shape", "mean", "std_error", "draws", "lemma_bound_form", "lemma_rate", "ratio", "flagged"};
  ojson per_kind = ojson::array();
  std::size_t flagged_total = 0;
  for (std::size_t k = 0; k < config.kinds.size(); ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::size_t flagged = 0;
    for (std::size_t s = 0; s < config.shapes.size(); ++s) {
      const auto w = gaussian_width_mc(config.kinds[k], config.shapes[s], config.draws,
                                       derive_seed(config.seed, {k, s}), config.threads);
      const double ratio = w.mean / w.lemma_rate;
      const bool flag = !(ratio >= config.band_lo && ratio <= config.band_hi);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      flagged += flag;
      std::string shape;
      for (std::size_t a = 0; a < 3; ++a) shape += (a ? "x" : "") + std::to_string(config.shapes[s][a]);
      rep.rows.push_back({regularizer_text(config.kinds[k]), shape, num(w.mean), num(w.std_error), w.draws,
                          w.lemma_bound_form, num(w.lemma_rate), num(ratio), flag});
    }
    flagged_total += flagged;
    per_kind.push_back({{"kind", regularizer_text(config.kinds[k])},
                        {"ratio_min", num(lo)},
                        {"ratio_max", num(hi)},
                        {"ratio_spread", num(hi / lo)},
                        {"flagged", flagged}});
  }
  rep.summary = {{"per_kind", per_kind}, {"flagged_total", flagged_total}};
  return rep;
}

ExperimentReport width_experiment(const std::vector<RegularizerSpec>& kinds, const std::vector<Shape>& shapes,
                                  std::size_t draws, std::uint64_t seed, std::size_t threads) {
  WidthExperimentConfig c;
  c.kinds = kinds;
  c.shapes = shapes;
  c.draws = draws;
  c.seed = seed;
  c.threads = threads;
  return width_experiment(c);
}

void ComparisonConfig::validate() const {
  check_common(model, split, noise_sigma, lambda_multiplier, width_draws, threads);
  if (regularizers.empty()) throw ConfigError("comparison needs at least one regularizer");
  for (const auto& r : regularizers) {
    r.validate();
    if (!solvable(r)) throw ConfigError("regularizer " + r.describe() + " has no solver");
  }
  if (n == 0) throw ConfigError("n must be positive");
  if (replications == 0) throw ConfigError("replications must be positive");
}

ExperimentReport comparison_experiment(const ComparisonConfig& config) {
  config.validate();
  const std::size_t split = config.split.value_or(default_split(config.model.cls));
  const std::size_t nreg = config.regularizers.size(), reps = config.replications;
  std::vector<double> lambdas;
  for (std::size_t k = 0; k < nreg; ++k) {
    const auto& reg = config.regularizers[k];
    const auto w = gaussian_width_mc(reg, config.model.shape, config.width_draws, derive_seed(config.seed, {0, k}),
                                     config.threads, config.solver.dual);
    lambdas.push_back(config.noise_sigma * lambda_rule(w, config.n, 1.0, reg.c_R(), config.lambda_multiplier));
  }
  struct Cell {
    double err_f2 = 0, err_n2 = 0;
    std::size_t iterations = 0;
    SolveStatus status = SolveStatus::MaxIters;
  };
  std::vector<Cell> out(reps * nreg);
  parallel_for(reps, config.threads, [&](std::size_t r) {
    const DenseTensor truth = gen_truth(config.model, derive_seed(config.seed, {1, r}));
    const auto data = cell_moments(config.model, truth, split, config.n, config.noise_sigma,
                                   derive_seed(config.seed, {2, 0, r}));
    for (std::size_t k = 0; k < nreg; ++k) {
      const auto res = solve_with(data.moments, config.regularizers[k], lambdas[k], config.solver);
      const DenseTensor delta = res.estimate - truth;
      const double en = empirical_norm(data.moments, delta);
      out[r * nreg + k] = {delta.squared_norm(), en * en, res.iterations, res.status};
    }
  });

  ExperimentReport rep;
  rep.experiment = "comparison";
  rep.config = to_json(config);
  rep.columns = {"replication", "regularizer", "lambda", "err_f2", "err_n2", "status", "iterations"};
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t k = 0; k < nreg; ++k) {
      const Cell& c = out[r * nreg + k];
      rep.rows.push_back({r, regularizer_text(config.regularizers[k]), num(lambdas[k]), num(c.err_f2), num(c.err_n2),
                          to_string(c.status), c.iterations});
    }
  ojson per = ojson::array();
  for (std::size_t k = 0; k < nreg; ++k) {
    std::vector<double> f, e;
    std::size_t maxit = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      f.push_back(out[r * nreg + k].err_f2);
      e.push_back(out[r * nreg + k].err_n2);
      maxit += out[r * nreg + k].status != SolveStatus::Converged;
    }
    per.push_back({{"regularizer", regularizer_text(config.regularizers[k])},
                   {"lambda", num(lambdas[k])},
                   {"median_f2", num(median(f))},
                   {"median_n2", num(median(e))},
                   {"not_converged", maxit}});
  }
  rep.summary = {{"per_regularizer", per}};
  return rep;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidValue("line fit needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidValue("line fit needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InvalidValue("quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidValue("quantile level must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw ConfigError("format must be json or csv");
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one CSV line; `quoted` records which fields were quoted.
std::vector<std::string> csv_split(const std::string& line, std::vector<bool>* quoted) {
  std::vector<std::string> out;
  quoted->clear();
  std::size_t i = 0;
  for (;;) {
    std::string field;
    bool q = false;
    if (i < line.size() && line[i] == '"') {
      q = true;
      ++i;
      for (;;) {
        if (i >= line.size()) throw FormatError("unterminated quoted CSV field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      if (i < line.size() && line[i] != ',') throw FormatError("garbage after quoted CSV field");
    } else {
      while (i < line.size() && line[i] != ',') field += line[i++];
    }
    out.push_back(std::move(field));
    quoted->push_back(q);
    if (i >= line.size()) break;
    ++i;
  }
  return out;
}

std::string csv_cell(const ojson& v) { return v.is_string() ? csv_quote(v.get<std::string>()) : v.dump(); }

ojson parse_json_text(const std::string& s) {
  try {
    return ojson::parse(s);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bad JSON value in report: ") + e.what());
  }
}

}  // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    ojson cells = ojson::array();
    for (const auto& row : report.rows) {
      if (row.size() != report.columns.size()) throw InvalidValue("report row width does not match columns");
      ojson o = ojson::object();
      for (std::size_t c = 0; c < row.size(); ++c) o[report.columns[c]] = row[c];
      cells.push_back(std::move(o));
    }
    ojson j{{"experiment", report.experiment},
            {"config", report.config},
            {"summary", report.summary},
            {"columns", report.columns},
            {"cells", cells}};
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# experiment," << csv_quote(report.experiment) << "\n";
  os << "# config," << csv_quote(report.config.dump()) << "\n";
  for (std::size_t c = 0; c < report.columns.size(); ++c) os << (c ? "," : "") << report.columns[c];
  os << "\n";
  for (const auto& row : report.rows) {
    if (row.size() != report.columns.size()) throw InvalidValue("report row width does not match columns");
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << "\n";
  }
  os << "\n# summary\n";
  for (auto it = report.summary.begin(); it != report.summary.end(); ++it)
    os << it.key() << "," << csv_quote(it.value().dump()) << "\n";
  return os.str();
}

ExperimentReport parse_report(const std::string& text, ReportFormat format) {
  ExperimentReport rep;
  if (format == ReportFormat::Json) {
    const ojson j = parse_json_text(text);
    try {
      rep.experiment = j.at("experiment").get<std::string>();
      rep.config = j.at("config");
      rep.summary = j.at("summary");
      rep.columns = j.at("columns").get<std::vector<std::string>>();
      for (const auto& cell : j.at("cells")) {
        if (cell.size() != rep.columns.size()) throw FormatError("cell has the wrong number of fields");
        std::vector<ojson> row;
        for (const auto& c : rep.columns) row.push_back(cell.at(c));
        rep.rows.push_back(std::move(row));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed report: ") + e.what());
    }
    return rep;
  }
  std::istringstream is(text);
  std::string line;
  std::vector<bool> quoted;
  auto header = [&](const char* key) {
    if (!std::getline(is, line)) throw FormatError("truncated CSV report");
    const auto f = csv_split(line, &quoted);
    if (f.size() != 2 || f[0] != std::string("# ") + key || !quoted[1]) throw FormatError(std::string("expected ") + key);
    return f[1];
  };
  rep.experiment = header("experiment");
  rep.config = parse_json_text(header("config"));
  if (!std::getline(is, line)) throw FormatError("missing column header");
  rep.columns = csv_split(line, &quoted);
  rep.summary = ojson::object();
  bool in_summary = false;
  while (std::getline(is, line)) {
    if (!in_summary) {
      if (line.empty()) {
        if (!std::getline(is, line) || line != "# summary") throw FormatError("expected summary block");
        in_summary = true;
        continue;
      }
      const auto f = csv_split(line, &quoted);
      if (f.size() != rep.columns.size()) throw FormatError("CSV row has the wrong number of fields");
      std::vector<ojson> row;
      for (std::size_t c = 0; c < f.size(); ++c) row.push_back(quoted[c] ? ojson(f[c]) : parse_json_text(f[c]));
      rep.rows.push_back(std::move(row));
    } else {
      const auto f = csv_split(line, &quoted);
      if (f.size() != 2 || !quoted[1]) throw FormatError("bad summary line");
      rep.summary[f[0]] = parse_json_text(f[1]);
    }
  }
  if (!in_summary) throw FormatError("missing summary block");
  return rep;
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  const std::string text = render_report(report, format);
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write report to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace tensorreg
