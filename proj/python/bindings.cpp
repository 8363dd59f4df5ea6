#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tensorreg/cli.hpp"
#include "tensorreg/datagen.hpp"
#include "tensorreg/errors.hpp"
#include "tensorreg/experiment.hpp"
#include "tensorreg/serialize.hpp"
#include "tensorreg/solver.hpp"
#include "tensorreg/spectral.hpp"
#include "tensorreg/tns_io.hpp"
#include "tensorreg/var.hpp"

namespace py = pybind11;
using namespace tensorreg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseTensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return DenseTensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

// Stacks n equally shaped samples into one (n, ...) array.
Array stack(const std::vector<DenseTensor>& items, const Shape& item_shape) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(items.size())};
  shape.insert(shape.end(), item_shape.begin(), item_shape.end());
  Array out(shape);
  double* p = out.mutable_data();
  for (const auto& t : items) p = std::copy(t.data().begin(), t.data().end(), p);
  return out;
}

std::vector<DenseTensor> unstack(const Array& a) {
  if (a.ndim() < 1) throw InvalidValue("expected a leading sample axis");
  const Shape item(a.shape() + 1, a.shape() + a.ndim());
  const std::size_t k = numel(item);
  std::vector<DenseTensor> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    out.emplace_back(item, std::vector<double>(a.data() + i * k, a.data() + (i + 1) * k));
  return out;
}

RegressionProblem make_problem(const Array& x, const Array& y) {
  RegressionProblem p;
  p.covariates = unstack(x);
  p.responses = unstack(y);
  p.split = static_cast<std::size_t>(x.ndim() - 1);
  p.validate();
  return p;
}

py::object json_to_py(const ojson& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regularized tensor regression: norms, solvers, data generators and experiments";

  static py::exception<Error> base(m, "TensorregError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def("reg_eval", [](const std::string& kind, const Array& a) { return reg_eval(parse_regularizer(kind), to_tensor(a)); },
        py::arg("kind"), py::arg("a"));
  m.def("reg_dual", [](const std::string& kind, const Array& a) { return reg_dual(parse_regularizer(kind), to_tensor(a)); },
        py::arg("kind"), py::arg("a"));
  m.def("prox",
        [](const std::string& kind, const Array& z, double t) {
          return to_array(prox(parse_regularizer(kind), to_tensor(z), t));
        },
        py::arg("kind"), py::arg("z"), py::arg("t"));

  m.def("gaussian_width",
        [](const std::string& kind, const Shape& shape, std::size_t draws, std::uint64_t seed, std::size_t threads) {
          WidthEstimate w;
          {
            py::gil_scoped_release release;
            w = gaussian_width_mc(parse_regularizer(kind), shape, draws, seed, threads);
          }
          return json_to_py(to_json(w));
        },
        py::arg("kind"), py::arg("shape"), py::arg("draws") = 2000, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("gen_truth",
        [](const std::string& model_json, std::uint64_t seed) {
          return to_array(gen_truth(model_spec_from_json(ojson::parse(model_json)), seed));
        },
        py::arg("model_json"), py::arg("seed"));

  m.def("gen_problem",
        [](const Array& truth, std::size_t n, std::size_t split, double sigma, std::uint64_t seed) {
          const RegressionProblem p = gen_problem(to_tensor(truth), n, split, sigma, Design{}, seed);
          return py::make_tuple(stack(p.covariates, p.covariate_shape()), stack(p.responses, p.response_shape()));
        },
        py::arg("truth"), py::arg("n"), py::arg("split"), py::arg("sigma"), py::arg("seed"));

  m.def("solve",
        [](const Array& x, const Array& y, const std::string& kind, double lam, std::size_t max_iters) {
          const RegressionProblem p = make_problem(x, y);
          const RegularizerSpec spec = parse_regularizer(kind);
          SolverConfig cfg;
          cfg.max_iters = max_iters;
          SolveResult r;
          {
            py::gil_scoped_release release;
            const DesignMoments mom = summarize(p);
            r = spec.kind == RegKind::MatricizedNuclearSum ? admm_matricized(mom, lam, cfg)
                                                           : fista_solve(mom, spec, lam, cfg);
          }
          py::dict out = json_to_py(to_json(r));
          out["estimate"] = to_array(r.estimate);
          return out;
        },
        py::arg("x"), py::arg("y"), py::arg("kind"), py::arg("lam"), py::arg("max_iters") = 10000);

  m.def("objective",
        [](const Array& x, const Array& y, const std::string& kind, double lam, const Array& a) {
          return objective(make_problem(x, y), parse_regularizer(kind), lam, to_tensor(a));
        },
        py::arg("x"), py::arg("y"), py::arg("kind"), py::arg("lam"), py::arg("a"));

  m.def("var_spectral_extrema",
        [](const std::vector<Eigen::MatrixXd>& coefficients) {
          const SpectralExtrema e = var_spectral_extrema(VarModel(coefficients));
          return py::make_tuple(e.mu_min, e.mu_max);
        },
        py::arg("coefficients"));

  m.def("run_experiment",
        [](const std::string& kind, const std::string& config_json, const std::string& format) {
          const ojson cfg = ojson::parse(config_json);
          const ReportFormat f = report_format_from_string(format);
          py::gil_scoped_release release;
          if (kind == "rate") return render_report(rate_experiment(rate_config_from_json(cfg)), f);
          if (kind == "width") return render_report(width_experiment(width_config_from_json(cfg)), f);
          if (kind == "compare") return render_report(comparison_experiment(comparison_config_from_json(cfg)), f);
          throw ConfigError("experiment must be rate, width or compare");
        },
        py::arg("kind"), py::arg("config_json"), py::arg("format") = "json");

  m.def("read_tns", [](const std::string& path) { return to_array(read_tns_file(path)); }, py::arg("path"));
  m.def("write_tns", [](const std::string& path, const Array& a) { write_tns_file(path, to_tensor(a)); },
        py::arg("path"), py::arg("a"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
