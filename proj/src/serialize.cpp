#include "tensorreg/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <type_traits>

namespace tensorreg {

namespace {

void allow_keys(const ojson& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; });
    if (!known) throw ConfigError(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

const ojson& need(const ojson& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

// Runs a reader and maps nlohmann type errors to ConfigError.
template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

template <class T>
T get_or(const ojson& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!it->is_number_unsigned()) throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  }
  return it->template get<T>();
}

const char* role_name(SubspaceRole r) { return r == SubspaceRole::ASpace ? "A" : "B"; }

SubspaceRole role_from(const ojson& j) {
  const auto s = j.get<std::string>();
  if (s == "A") return SubspaceRole::ASpace;
  if (s == "B") return SubspaceRole::BSpace;
  throw ConfigError("subspace role must be \"A\" or \"B\"");
}

}  // namespace

ojson shape_json(const Shape& s) {
  ojson j = ojson::array();
  for (auto d : s) j.push_back(d);
  return j;
}

Shape shape_from_json(const ojson& j) {
  return guarded("shape", [&] {
    if (!j.is_array()) throw ConfigError("shape must be an array");
    Shape s;
    for (const auto& d : j) {
      if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) throw ConfigError("shape extents must be positive integers");
      s.push_back(d.get<std::size_t>());
    }
    return s;
  });
}

Shape parse_shape(const std::string& text) {
  Shape s;
  std::string tok;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), 'x', ',');
  std::stringstream ss(norm);
  while (std::getline(ss, tok, ',')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad shape '" + text + "'");
    const auto d = std::stoull(tok);
    if (d == 0) throw ConfigError("bad shape '" + text + "'");
    s.push_back(static_cast<std::size_t>(d));
  }
  if (s.empty()) throw ConfigError("empty shape");
  return s;
}

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson j = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(std::move(row));
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const ojson& j) {
  return guarded("matrix", [&] {
    if (!j.is_array()) throw ConfigError("matrix must be a list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix");
      for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
  });
}

ojson tensor_json(const DenseTensor& t) {
  return ojson{{"shape", shape_json(t.shape())}, {"data", t.data()}};
}

DenseTensor tensor_from_json(const ojson& j) {
  return guarded("tensor", [&] {
    allow_keys(j, {"shape", "data"}, "tensor");
    return DenseTensor(shape_from_json(need(j, "shape", "tensor")), need(j, "data", "tensor").get<std::vector<double>>());
  });
}

ojson to_json(const RegularizerSpec& r) {
  ojson j{{"kind", to_string(r.kind)}};
  if (r.kind == RegKind::FiberGroup) j["mode"] = r.mode;
  if (r.kind == RegKind::SliceFrob || r.kind == RegKind::SliceNuclear) j["axes"] = {r.axes[0], r.axes[1]};
  return j;
}

RegularizerSpec regularizer_from_json(const ojson& j) {
  return guarded("regularizer", [&] {
    if (j.is_string()) return parse_regularizer(j.get<std::string>());
    allow_keys(j, {"kind", "mode", "axes"}, "regularizer");
    RegularizerSpec r;
    r.kind = reg_kind_from_string(need(j, "kind", "regularizer").get<std::string>());
    r.mode = get_or<std::size_t>(j, "mode", 0);
    if (j.contains("axes")) {
      const auto ax = j["axes"].get<std::vector<std::size_t>>();
      if (ax.size() != 2) throw ConfigError("regularizer axes must have two entries");
      r.axes = {ax[0], ax[1]};
    }
    r.validate();
    return r;
  });
}

RegularizerSpec parse_regularizer(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.empty()) throw ConfigError("empty regularizer");
  RegularizerSpec r;
  r.kind = reg_kind_from_string(parts[0]);
  auto num = [&](std::size_t i) -> std::size_t {
    if (parts[i].empty() || parts[i].find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad regularizer '" + text + "'");
    return static_cast<std::size_t>(std::stoull(parts[i]));
  };
  if (r.kind == RegKind::FiberGroup) {
    if (parts.size() > 2) throw ConfigError("bad regularizer '" + text + "'");
    if (parts.size() == 2) r.mode = num(1);
  } else if (r.kind == RegKind::SliceFrob || r.kind == RegKind::SliceNuclear) {
    if (parts.size() != 1 && parts.size() != 3) throw ConfigError("bad regularizer '" + text + "'");
    if (parts.size() == 3) r.axes = {num(1), num(2)};
  } else if (parts.size() != 1) {
    throw ConfigError("bad regularizer '" + text + "'");
  }
  r.validate();
  return r;
}

std::string regularizer_text(const RegularizerSpec& r) {
  std::string t = to_string(r.kind);
  if (r.kind == RegKind::FiberGroup) t += ":" + std::to_string(r.mode);
  if (r.kind == RegKind::SliceFrob || r.kind == RegKind::SliceNuclear)
    t += ":" + std::to_string(r.axes[0]) + ":" + std::to_string(r.axes[1]);
  return t;
}

ojson to_json(const ModelClassSpec& m) {
  ojson j{{"class", to_string(m.cls)}, {"param", m.param}, {"shape", shape_json(m.shape)}, {"magnitude", m.magnitude}};
  if (m.axis) j["axis"] = *m.axis;
  return j;
}

ModelClassSpec model_spec_from_json(const ojson& j) {
  return guarded("model", [&] {
    allow_keys(j, {"class", "param", "shape", "magnitude", "axis"}, "model");
    ModelClassSpec m;
    m.cls = model_class_from_string(need(j, "class", "model").get<std::string>());
    m.param = need(j, "param", "model").get<std::size_t>();
    m.shape = shape_from_json(need(j, "shape", "model"));
    m.magnitude = get_or<double>(j, "magnitude", 1.0);
    if (j.contains("axis")) m.axis = j["axis"].get<std::size_t>();
    m.validate();
    return m;
  });
}

ojson to_json(const SubspaceSpec& s) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SupportEntries>) {
          ojson cells = ojson::array();
          for (const auto& c : v.cells) cells.push_back({c[0], c[1], c[2]});
          return {{"type", "SupportEntries"}, {"cells", cells}};
        } else if constexpr (std::is_same_v<T, SupportFibers>) {
          ojson pairs = ojson::array();
          for (const auto& p : v.pairs) pairs.push_back({p[0], p[1]});
          return {{"type", "SupportFibers"}, {"mode", v.mode}, {"pairs", pairs}};
        } else if constexpr (std::is_same_v<T, SupportSlices>) {
          return {{"type", "SupportSlices"}, {"axis", v.axis}, {"indices", v.indices}};
        } else if constexpr (std::is_same_v<T, SlicewiseProjectors>) {
          ojson rf = ojson::array(), cf = ojson::array();
          for (const auto& m : v.row_factors) rf.push_back(matrix_json(m));
          for (const auto& m : v.col_factors) cf.push_back(matrix_json(m));
          return {{"type", "SlicewiseProjectors"}, {"axis", v.axis}, {"role", role_name(v.role)},
                  {"row_factors", rf}, {"col_factors", cf}};
        } else {
          ojson f = ojson::array();
          for (std::size_t k = 0; k < 3; ++k) f.push_back(matrix_json(v.projectors.factor(k)));
          return {{"type", "TuckerProjectors"}, {"role", role_name(v.role)}, {"factors", f}};
        }
      },
      s);
}

SubspaceSpec subspace_from_json(const ojson& j) {
  return guarded("subspace", [&]() -> SubspaceSpec {
    const auto type = need(j, "type", "subspace").get<std::string>();
    if (type == "SupportEntries") {
      allow_keys(j, {"type", "cells"}, "subspace");
      SupportEntries s;
      for (const auto& c : need(j, "cells", "subspace")) {
        const auto v = c.get<std::vector<std::size_t>>();
        if (v.size() != 3) throw ConfigError("entry cells need three indices");
        s.cells.push_back({v[0], v[1], v[2]});
      }
      return s;
    }
    if (type == "SupportFibers") {
      allow_keys(j, {"type", "mode", "pairs"}, "subspace");
      SupportFibers s;
      s.mode = need(j, "mode", "subspace").get<std::size_t>();
      for (const auto& c : need(j, "pairs", "subspace")) {
        const auto v = c.get<std::vector<std::size_t>>();
        if (v.size() != 2) throw ConfigError("fiber pairs need two indices");
        s.pairs.push_back({v[0], v[1]});
      }
      return s;
    }
    if (type == "SupportSlices") {
      allow_keys(j, {"type", "axis", "indices"}, "subspace");
      return SupportSlices{need(j, "axis", "subspace").get<std::size_t>(),
                           need(j, "indices", "subspace").get<std::vector<std::size_t>>()};
    }
    if (type == "SlicewiseProjectors") {
      allow_keys(j, {"type", "axis", "role", "row_factors", "col_factors"}, "subspace");
      SlicewiseProjectors s;
      s.axis = need(j, "axis", "subspace").get<std::size_t>();
      s.role = role_from(get_or<std::string>(j, "role", "A"));
      for (const auto& m : need(j, "row_factors", "subspace")) s.row_factors.push_back(matrix_from_json(m));
      for (const auto& m : need(j, "col_factors", "subspace")) s.col_factors.push_back(matrix_from_json(m));
      return s;
    }
    if (type == "TuckerProjectors") {
      allow_keys(j, {"type", "role", "factors"}, "subspace");
      const auto& f = need(j, "factors", "subspace");
      if (!f.is_array() || f.size() != 3) throw ConfigError("Tucker projectors need three factors");
      TuckerProjectors t{ProjectorTriple({matrix_from_json(f[0]), matrix_from_json(f[1]), matrix_from_json(f[2])}),
                         role_from(get_or<std::string>(j, "role", "A"))};
      return t;
    }
    throw ConfigError("unknown subspace type '" + type + "'");
  });
}

ojson to_json(const SolverConfig& c) {
  return {{"max_iters", c.max_iters},
          {"tol", c.tol},
          {"kkt_tol", c.kkt_tol},
          {"power_iters", c.power_iters},
          {"divergence_factor", c.divergence_factor},
          {"rho", c.rho},
          {"admm_tol", c.admm_tol},
          {"balance_rho", c.balance_rho},
          {"hopm_restarts", c.dual.hopm.restarts},
          {"hopm_iters", c.dual.hopm.iters},
          {"hopm_seed", c.dual.hopm.seed}};
}

SolverConfig solver_config_from_json(const ojson& j) {
  return guarded("solver", [&] {
    allow_keys(j,
               {"max_iters", "tol", "kkt_tol", "power_iters", "divergence_factor", "rho", "admm_tol", "balance_rho",
                "hopm_restarts", "hopm_iters", "hopm_seed"},
               "solver");
    SolverConfig c;
    c.max_iters = get_or(j, "max_iters", c.max_iters);
    c.tol = get_or(j, "tol", c.tol);
    c.kkt_tol = get_or(j, "kkt_tol", c.kkt_tol);
    c.power_iters = get_or(j, "power_iters", c.power_iters);
    c.divergence_factor = get_or(j, "divergence_factor", c.divergence_factor);
    c.rho = get_or(j, "rho", c.rho);
    c.admm_tol = get_or(j, "admm_tol", c.admm_tol);
    c.balance_rho = get_or(j, "balance_rho", c.balance_rho);
    c.dual.hopm.restarts = get_or(j, "hopm_restarts", c.dual.hopm.restarts);
    c.dual.hopm.iters = get_or(j, "hopm_iters", c.dual.hopm.iters);
    c.dual.hopm.seed = get_or(j, "hopm_seed", c.dual.hopm.seed);
    if (c.max_iters == 0 || !(c.tol > 0.0) || !(c.rho > 0.0) || !(c.admm_tol > 0.0))
      throw ConfigError("solver: iteration cap, tolerances and rho must be positive");
    return c;
  });
}

ojson to_json(const WidthEstimate& w) {
  return {{"kind", to_json(w.kind)}, {"shape", shape_json(w.shape)},  {"mean", w.mean},
          {"std_error", w.std_error}, {"draws", w.draws},             {"seed", w.seed},
          {"lemma_bound_form", w.lemma_bound_form}, {"lemma_rate", w.lemma_rate}};
}

ojson to_json(const SolveResult& r) {
  return {{"status", to_string(r.status)},
          {"lambda", r.lambda},
          {"iterations", r.iterations},
          {"kkt_residual", r.kkt_residual},
          {"objective", r.objective_trace.empty() ? 0.0 : r.objective_trace.back()},
          {"objective_trace", r.objective_trace},
          {"estimate_shape", shape_json(r.estimate.shape())},
          {"estimate_frobenius", r.estimate.frobenius_norm()}};
}

ojson to_json(const VarModel& m) {
  ojson coeffs = ojson::array();
  for (const auto& a : m.coefficients()) coeffs.push_back(matrix_json(a));
  return {{"coefficients", coeffs}, {"burn_in", m.burn_in()}, {"rescaled", m.rescaled()},
          {"spectral_radius", m.spectral_radius()}};
}

VarModel var_model_from_json(const ojson& j) {
  return guarded("VAR model", [&] {
    allow_keys(j, {"coefficients", "burn_in", "auto_stabilize", "rescaled", "spectral_radius"}, "VAR model");
    std::vector<Eigen::MatrixXd> a;
    for (const auto& m : need(j, "coefficients", "VAR model")) a.push_back(matrix_from_json(m));
    if (a.empty()) throw ConfigError("VAR model needs at least one coefficient matrix");
    std::optional<std::size_t> burn;
    if (j.contains("burn_in")) burn = j["burn_in"].get<std::size_t>();
    return VarModel(std::move(a), get_or(j, "auto_stabilize", false), burn);
  });
}

ojson to_json(const SpectralExtrema& e) { return {{"mu_min", e.mu_min}, {"mu_max", e.mu_max}, {"grid", e.grid}}; }

ojson to_json(const PackingSet& p, bool with_elements) {
  ojson j{{"construction", p.construction},
          {"dimension", p.dimension},
          {"delta", p.delta},
          {"cardinality", p.elements.size()},
          {"log_cardinality", p.elements.empty() ? 0.0 : p.log_cardinality()},
          {"log_m_over_d", p.elements.empty() ? 0.0 : p.log_cardinality() / static_cast<double>(p.dimension)},
          {"window_lo", p.window_lo},
          {"window_hi", p.window_hi},
          {"min_dist2", p.min_dist2},
          {"max_dist2", p.max_dist2},
          {"candidates", p.candidates},
          {"seed", p.seed}};
  if (with_elements) {
    ojson el = ojson::array();
    for (const auto& e : p.elements) el.push_back(tensor_json(e));
    j["elements"] = el;
  }
  return j;
}

ojson to_json(const PackingVerification& v) {
  ojson j{{"ok", v.ok}, {"min_dist2", v.min_dist2}, {"max_dist2", v.max_dist2}, {"min_hamming", v.min_hamming},
          {"detail", v.detail}};
  j["offending_pair"] = v.offending_pair ? ojson{v.offending_pair->first, v.offending_pair->second} : ojson(nullptr);
  return j;
}

ojson to_json(const FanoReport& f) {
  ojson j{{"pass", f.pass},
          {"log_condition", f.log_condition},
          {"window_condition", f.window_condition},
          {"log_m", f.log_m},
          {"required_log_m", f.required_log_m},
          {"window_lo", f.window_lo},
          {"window_hi", f.window_hi}};
  j["offending_pair"] = f.offending_pair ? ojson{f.offending_pair->first, f.offending_pair->second} : ojson(nullptr);
  j["offending_dist2"] = f.offending_dist2;
  j["failures"] = f.failures;
  return j;
}

ojson to_json(const RateExperimentConfig& c) {
  ojson j{{"model", to_json(c.model)},
          {"regularizer", to_json(c.regularizer)},
          {"n_grid", c.n_grid},
          {"replications", c.replications},
          {"seed", c.seed},
          {"lambda_multiplier", c.lambda_multiplier},
          {"rate", c.rate},
          {"noise_sigma", c.noise_sigma}};
  j["c_u"] = c.c_u ? ojson(*c.c_u) : ojson(nullptr);
  j["split"] = c.split ? ojson(*c.split) : ojson(nullptr);
  j["width_draws"] = c.width_draws;
  j["solver"] = to_json(c.solver);
  j["threads"] = c.threads;
  return j;
}

RateExperimentConfig rate_config_from_json(const ojson& j) {
  return guarded("rate config", [&] {
    allow_keys(j,
               {"model", "regularizer", "n_grid", "replications", "seed", "lambda_multiplier", "rate", "noise_sigma",
                "c_u", "split", "width_draws", "solver", "threads"},
               "rate config");
    RateExperimentConfig c;
    c.model = model_spec_from_json(need(j, "model", "rate config"));
    c.regularizer = regularizer_from_json(need(j, "regularizer", "rate config"));
    c.n_grid = need(j, "n_grid", "rate config").get<std::vector<std::size_t>>();
    c.replications = get_or(j, "replications", c.replications);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.lambda_multiplier = get_or(j, "lambda_multiplier", 1.0);
    c.rate = get_or<std::string>(j, "rate", "");
    c.noise_sigma = get_or(j, "noise_sigma", 1.0);
    if (j.contains("c_u") && !j["c_u"].is_null()) c.c_u = j["c_u"].get<double>();
    if (j.contains("split") && !j["split"].is_null()) c.split = j["split"].get<std::size_t>();
    c.width_draws = get_or(j, "width_draws", c.width_draws);
    if (j.contains("solver")) c.solver = solver_config_from_json(j["solver"]);
    c.threads = get_or<std::size_t>(j, "threads", 1);
    c.validate();
    return c;
  });
}

ojson to_json(const WidthExperimentConfig& c) {
  ojson kinds = ojson::array(), shapes = ojson::array();
  for (const auto& k : c.kinds) kinds.push_back(to_json(k));
  for (const auto& s : c.shapes) shapes.push_back(shape_json(s));
  return {{"kinds", kinds}, {"shapes", shapes}, {"draws", c.draws},     {"seed", c.seed},
          {"threads", c.threads}, {"band_lo", c.band_lo}, {"band_hi", c.band_hi}};
}

WidthExperimentConfig width_config_from_json(const ojson& j) {
  return guarded("width config", [&] {
    allow_keys(j, {"kinds", "shapes", "draws", "seed", "threads", "band_lo", "band_hi"}, "width config");
    WidthExperimentConfig c;
    for (const auto& k : need(j, "kinds", "width config")) c.kinds.push_back(regularizer_from_json(k));
    for (const auto& s : need(j, "shapes", "width config"))
      c.shapes.push_back(s.is_string() ? parse_shape(s.get<std::string>()) : shape_from_json(s));
    c.draws = get_or(j, "draws", c.draws);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.threads = get_or<std::size_t>(j, "threads", 1);
    c.band_lo = get_or(j, "band_lo", c.band_lo);
    c.band_hi = get_or(j, "band_hi", c.band_hi);
    c.validate();
    return c;
  });
}

ojson to_json(const ComparisonConfig& c) {
  ojson regs = ojson::array();
  for (const auto& r : c.regularizers) regs.push_back(to_json(r));
  ojson j{{"model", to_json(c.model)}, {"regularizers", regs}, {"n", c.n},
          {"replications", c.replications}, {"seed", c.seed}, {"lambda_multiplier", c.lambda_multiplier},
          {"noise_sigma", c.noise_sigma}};
  j["split"] = c.split ? ojson(*c.split) : ojson(nullptr);
  j["width_draws"] = c.width_draws;
  j["solver"] = to_json(c.solver);
  j["threads"] = c.threads;
  return j;
}

ComparisonConfig comparison_config_from_json(const ojson& j) {
  return guarded("comparison config", [&] {
    allow_keys(j,
               {"model", "regularizers", "n", "replications", "seed", "lambda_multiplier", "noise_sigma", "split",
                "width_draws", "solver", "threads"},
               "comparison config");
    ComparisonConfig c;
    c.model = model_spec_from_json(need(j, "model", "comparison config"));
    for (const auto& r : need(j, "regularizers", "comparison config")) c.regularizers.push_back(regularizer_from_json(r));
    c.n = need(j, "n", "comparison config").get<std::size_t>();
    c.replications = get_or(j, "replications", c.replications);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.lambda_multiplier = get_or(j, "lambda_multiplier", 1.0);
    c.noise_sigma = get_or(j, "noise_sigma", 1.0);
    if (j.contains("split") && !j["split"].is_null()) c.split = j["split"].get<std::size_t>();
    c.width_draws = get_or(j, "width_draws", c.width_draws);
    if (j.contains("solver")) c.solver = solver_config_from_json(j["solver"]);
    c.threads = get_or<std::size_t>(j, "threads", 1);
    c.validate();
    return c;
  });
}

ojson read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace tensorreg
