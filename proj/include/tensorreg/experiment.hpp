#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tensorreg/datagen.hpp"
#include "tensorreg/solver.hpp"

namespace tensorreg {

using ojson = nlohmann::ordered_json;

// Rate tags (rate = tag expression / n):
//   s_log_d1d2d3          s log(d1 d2 d3)            Theta1
//   s_max_da_log_rest     s max{d_a, log(d_b d_c)}   Theta2, a = fiber mode
//   s_max_dadb_log_dc     s max{d_a d_b, log d_c}    Theta3, c = slice axis
//   r_max_da_db_log_dc    r max{d_a, d_b, log d_c}   Theta4
//   r_max_pair_products   r max{d1 d2, d1 d3, d2 d3} Theta5
//   s_max_m2_log_p        s max{m^2, log p}          T1 on (p, m, m)
//   r_max_m_log_p_over_r  r max{m, log(p / r)}       T2 on (p, m, m)
//   s_max_p_2log_m        s max{p, 2 log m}          T3 on (m, p, m)
//   r_max_dk              r max{d1, d2, d3}          T4
double rate_value(const std::string& tag, const ModelClassSpec& model, std::size_t n);
std::string default_rate_tag(ModelClass cls);
// Covariate order used for a class: 1 for (p, m, m) multi-response, 2 for
// the VAR layout, 3 (scalar response) otherwise.
std::size_t default_split(ModelClass cls);
// True when the regularizer is the one the class is designed for.
bool matched_class(const ModelClassSpec& model, const RegularizerSpec& reg);

struct RateExperimentConfig {
  ModelClassSpec model;
  RegularizerSpec regularizer;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 10;
  std::uint64_t seed = 0;
  double lambda_multiplier = 1.0;
  std::string rate;                 // empty: class default
  double noise_sigma = 1.0;         // scales the lambda rule as well
  std::optional<double> c_u;        // default 1, or 1/sqrt(mu_min) per VAR truth
  std::optional<std::size_t> split;
  std::size_t width_draws = 2000;
  SolverConfig solver;
  std::size_t threads = 1;

  void validate() const;
};

// Cells are (n, replication). Columns are fixed; the summary carries per-n
// medians and quantiles, the fitted log-log slope of the median Frobenius
// error against the predicted rate (and the same for the empirical norm),
// and solver status counts.
struct ExperimentReport {
  std::string experiment;
  ojson config;
  std::vector<std::string> columns;
  std::vector<std::vector<ojson>> rows;
  ojson summary;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

ExperimentReport rate_experiment(const RateExperimentConfig& config);

struct WidthExperimentConfig {
  std::vector<RegularizerSpec> kinds;
  std::vector<Shape> shapes;
  std::size_t draws = 2000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double band_lo = 0.2, band_hi = 5.0;

  void validate() const;
};

ExperimentReport width_experiment(const WidthExperimentConfig& config);
ExperimentReport width_experiment(const std::vector<RegularizerSpec>& kinds, const std::vector<Shape>& shapes,
                                  std::size_t draws, std::uint64_t seed, std::size_t threads = 1);

// Several estimators on the same truths and data (matched or not), for
// benefit comparisons such as FiberGroup vs EntryL1 on clustered fibers.
struct ComparisonConfig {
  ModelClassSpec model;
  std::vector<RegularizerSpec> regularizers;
  std::size_t n = 0;
  std::size_t replications = 10;
  std::uint64_t seed = 0;
  double lambda_multiplier = 1.0;
  double noise_sigma = 1.0;
  std::optional<std::size_t> split;
  std::size_t width_draws = 1000;
  SolverConfig solver;
  std::size_t threads = 1;

  void validate() const;
};

ExperimentReport comparison_experiment(const ComparisonConfig& config);

// Ordinary least squares of y on x.
struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> v, double q);

enum class ReportFormat { Json, Csv };
ReportFormat report_format_from_string(const std::string& s);

std::string render_report(const ExperimentReport& report, ReportFormat format);
ExperimentReport parse_report(const std::string& text, ReportFormat format);
// Writes to `path`, or to stdout when path is "-". Throws IoError.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the
// first exception.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace tensorreg
