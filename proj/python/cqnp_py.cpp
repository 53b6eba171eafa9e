// Python bindings. Images are 2-D complex128 arrays, data and coefficient
// vectors are 1-D complex128 arrays, trajectories are (M, 2) float arrays of
// (kx, ky).

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cqnp/bench.hpp"

namespace py = pybind11;
using namespace cqnp;

namespace {

using ImageArray = py::array_t<Cx, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

ComplexImage to_image(ImageArray const &a) {
  if (a.ndim() != 2)
    throw std::invalid_argument("expected a 2-D complex array");
  Dims const d{a.shape(0), a.shape(1)};
  return ComplexImage(d, Eigen::Map<CVec const>(a.data(), d.size()));
}

ImageArray from_image(ComplexImage const &img) {
  ImageArray out({img.rows(), img.cols()});
  std::copy(img.data().data(), img.data().data() + img.size(), out.mutable_data());
  return out;
}

Dims to_dims(std::pair<Index, Index> shape) { return {shape.first, shape.second}; }

Trajectory to_trajectory(RealArray const &a) {
  if (a.ndim() != 2 || a.shape(1) != 2)
    throw std::invalid_argument("trajectory must be an (M, 2) array of (kx, ky)");
  std::vector<KPoint> points;
  for (py::ssize_t m = 0; m < a.shape(0); ++m)
    points.push_back({a.at(m, 0), a.at(m, 1)});
  return Trajectory(std::move(points));
}

RealArray from_trajectory(Trajectory const &t) {
  RealArray out({t.size(), Index{2}});
  auto view = out.mutable_unchecked<2>();
  for (Index m = 0; m < t.size(); ++m) {
    view(m, 0) = t[m].kx;
    view(m, 1) = t[m].ky;
  }
  return out;
}

std::vector<ImageArray> from_maps(SensitivityMaps const &maps) {
  std::vector<ImageArray> out;
  for (auto const &m : maps.maps())
    out.push_back(from_image(m));
  return out;
}

SensitivityMaps to_maps(std::vector<ImageArray> const &arrays) {
  std::vector<ComplexImage> maps;
  for (auto const &a : arrays)
    maps.push_back(to_image(a));
  return SensitivityMaps(std::move(maps));
}

// Columns: iter, time_s, cost, psnr, inner_iters.
RealArray records_array(std::vector<IterationRecord> const &records) {
  RealArray out({static_cast<Index>(records.size()), Index{5}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto const &r = records[k];
    auto const row = static_cast<py::ssize_t>(k);
    view(row, 0) = r.iter;
    view(row, 1) = r.seconds;
    view(row, 2) = r.cost;
    view(row, 3) = r.psnr;
    view(row, 4) = r.inner_iters;
  }
  return out;
}

} // namespace

PYBIND11_MODULE(cqnp, m) {
  m.doc() = "Complex quasi-Newton proximal reconstruction for non-Cartesian multi-coil MRI";

  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ArithmeticError);
  py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

  m.def("radial_trajectory",
        [](int spokes, int readout) { return from_trajectory(make_radial_trajectory(spokes, readout)); },
        py::arg("spokes"), py::arg("readout"));
  m.def("spiral_trajectory",
        [](int interleaves, int readout) {
          return from_trajectory(make_spiral_trajectory(interleaves, readout));
        },
        py::arg("interleaves"), py::arg("readout"));
  m.def("nudft_forward",
        [](ImageArray const &img, RealArray const &traj) {
          return nudft_forward(to_image(img), to_trajectory(traj));
        },
        py::arg("image"), py::arg("trajectory"));
  m.def("nudft_adjoint",
        [](CVec const &samples, RealArray const &traj, std::pair<Index, Index> shape) {
          return from_image(nudft_adjoint(samples, to_trajectory(traj), to_dims(shape)));
        },
        py::arg("samples"), py::arg("trajectory"), py::arg("shape"));

  py::class_<ForwardModel>(m, "ForwardModel")
      .def(py::init([](RealArray const &traj, std::vector<ImageArray> const &maps) {
             return ForwardModel(to_trajectory(traj), to_maps(maps));
           }),
           py::arg("trajectory"), py::arg("maps"))
      .def_property_readonly("shape", [](ForwardModel const &f) {
        return std::pair(f.dims().rows, f.dims().cols);
      })
      .def_property_readonly("coils", &ForwardModel::coils)
      .def_property_readonly("data_size", &ForwardModel::data_size)
      .def_property_readonly("trajectory", [](ForwardModel const &f) { return from_trajectory(f.trajectory()); })
      .def("forward", [](ForwardModel const &f, ImageArray const &img) { return f.forward(to_image(img)).samples; })
      .def("adjoint", [](ForwardModel const &f, CVec const &y) { return from_image(f.adjoint({y})); })
      .def("normal", [](ForwardModel const &f, ImageArray const &img) { return from_image(f.normal(to_image(img))); })
      .def("fidelity",
           [](ForwardModel const &f, ImageArray const &img, CVec const &y) {
             auto const r = fidelity_grad(f, to_image(img), {y});
             return std::pair(r.value, from_image(r.grad));
           },
           "1/2 ||Ax - y||^2 and its gradient.");

  m.def("wavelet_forward",
        [](ImageArray const &img, int levels) {
          return wavelet_forward(to_image(img), {WaveletFamily::haar, levels});
        },
        py::arg("image"), py::arg("levels"));
  m.def("wavelet_adjoint",
        [](CVec const &coeffs, int levels, std::pair<Index, Index> shape) {
          return from_image(wavelet_adjoint(coeffs, {WaveletFamily::haar, levels}, to_dims(shape)));
        },
        py::arg("coeffs"), py::arg("levels"), py::arg("shape"));
  m.def("tv_value",
        [](ImageArray const &img, std::string const &variant) {
          return tv_value(to_image(img), parse_tv_variant(variant));
        },
        py::arg("image"), py::arg("variant") = "iso");
  m.def("L_apply",
        [](CMat const &p, CMat const &q) { return from_image(L_apply({p, q})); }, py::arg("P"),
        py::arg("Q"));
  m.def("L_adjoint",
        [](ImageArray const &img) {
          DualPair const pair = L_adjoint(to_image(img));
          return std::pair(CMat(pair.P), CMat(pair.Q));
        },
        py::arg("image"));

  py::class_<Rank1Metric>(m, "Rank1Metric")
      .def_property_readonly("tau", &Rank1Metric::tau)
      .def_property_readonly("sign", &Rank1Metric::sign)
      .def_property_readonly("u_tilde", &Rank1Metric::u_tilde)
      .def("apply", &Rank1Metric::apply)
      .def("apply_inverse", &Rank1Metric::apply_inverse)
      .def("min_eigenvalue", &Rank1Metric::min_eigenvalue)
      .def("dense", &Rank1Metric::dense);
  m.def("sr1_update",
        [](CVec const &s, CVec const &mv, double gamma, double xi) {
          return sr1_update(s, mv, SR1Settings{gamma, xi, 1e-8});
        },
        py::arg("s"), py::arg("m"), py::arg("gamma") = 1.7, py::arg("xi") = 1.0);

  m.def("weighted_prox",
        [](CVec const &v, Rank1Metric const &metric, double lambda_bar, double alpha,
           std::pair<Index, Index> shape, int levels, std::string const &variant, int max_iter,
           double tol) {
          WpmProblem const p{v, metric, lambda_bar, alpha, parse_tv_variant(variant),
                             {WaveletFamily::haar, levels}, to_dims(shape)};
          return solve_dual_fista(p, {max_iter, tol, std::nullopt}).x;
        },
        py::arg("v"), py::arg("metric"), py::arg("lambda_bar"), py::arg("alpha"), py::arg("shape"),
        py::arg("levels"), py::arg("variant") = "iso", py::arg("max_iter") = 20, py::arg("tol") = 1e-6,
        "Dual FISTA solution of argmin ||x - v||_B^2 + 2 lambda_bar h(x).");

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_property(
          "method", [](SolverConfig const &c) { return std::string(to_string(c.method)); },
          [](SolverConfig &c, std::string const &s) { c.method = parse_method(s); })
      .def_property(
          "formulation", [](SolverConfig const &c) { return std::string(to_string(c.formulation)); },
          [](SolverConfig &c, std::string const &s) { c.formulation = parse_formulation(s); })
      .def_property(
          "tv_variant", [](SolverConfig const &c) { return std::string(to_string(c.tv_variant)); },
          [](SolverConfig &c, std::string const &s) { c.tv_variant = parse_tv_variant(s); })
      .def_property(
          "wavelet_levels", [](SolverConfig const &c) { return c.wavelet.levels; },
          [](SolverConfig &c, int levels) { c.wavelet.levels = levels; })
      .def_readwrite("lambda_", &SolverConfig::lambda)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("gamma", &SolverConfig::gamma)
      .def_readwrite("xi", &SolverConfig::xi)
      .def_readwrite("step", &SolverConfig::step)
      .def_readwrite("outer_iters", &SolverConfig::outer_iters)
      .def_readwrite("wpm_max_iter", &SolverConfig::wpm_max_iter)
      .def_readwrite("wpm_tol", &SolverConfig::wpm_tol)
      .def_readwrite("sr1", &SolverConfig::sr1);

  m.def("solve",
        [](ForwardModel const &model, CVec const &y, SolverConfig const &config,
           std::optional<ImageArray> const &initial, std::optional<ImageArray> const &reference) {
          SolveOptions options;
          if (initial)
            options.initial = to_image(*initial);
          if (reference)
            options.reference = to_image(*reference);
          SolveResult result;
          {
            py::gil_scoped_release release;
            result = solve(model, {y}, config, options);
          }
          return std::pair(from_image(result.image), records_array(result.records));
        },
        py::arg("model"), py::arg("data"), py::arg("config"), py::arg("initial") = py::none(),
        py::arg("reference") = py::none(),
        "Returns (image, records) with record columns iter, time_s, cost, psnr, inner_iters.");
  m.def("cost",
        [](ForwardModel const &model, ImageArray const &img, CVec const &y, SolverConfig const &c) {
          return cost(model, to_image(img), {y}, c.lambda, c.alpha, c.tv_variant, c.wavelet);
        },
        py::arg("model"), py::arg("image"), py::arg("data"), py::arg("config"));
  m.def("psnr", [](ImageArray const &ref, ImageArray const &est) { return psnr(to_image(ref), to_image(est)); },
        py::arg("reference"), py::arg("estimate"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def("set", [](ExperimentConfig &c, std::string const &key, std::string const &value) {
        apply_setting(c, key, value);
      })
      .def("validate", [](ExperimentConfig const &c) { validate(c); })
      .def("to_text", [](ExperimentConfig const &c) { return emit_config(c); })
      .def("solver_config", [](ExperimentConfig const &c, std::string const &method) {
        return solver_config(c, parse_method(method));
      })
      .def_readwrite("size", &ExperimentConfig::size)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("outer_iters", &ExperimentConfig::outer_iters)
      .def("__eq__", [](ExperimentConfig const &a, ExperimentConfig const &b) { return a == b; });
  m.def("parse_config", [](std::string const &text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("config_keys", [] {
    std::vector<std::string> keys;
    for (auto k : config_keys())
      keys.emplace_back(k);
    return keys;
  });

  m.def("make_phantom", [](int size) { return from_image(make_phantom(size)); }, py::arg("size"));
  m.def("make_sensitivities", [](int size, int coils) { return from_maps(make_sensitivities(size, coils)); },
        py::arg("size"), py::arg("coils"));
  m.def("simulate",
        [](ExperimentConfig const &c) {
          Simulation sim = simulate(c);
          py::dict out;
          out["truth"] = from_image(sim.truth);
          out["model"] = sim.model;
          out["data"] = sim.data.samples;
          out["input_snr_db"] = sim.input_snr_db;
          return out;
        },
        py::arg("config"), "Dict with truth, model, data and input_snr_db.");
  m.def("run_experiment",
        [](ExperimentConfig const &c, std::optional<std::filesystem::path> const &out_dir) {
          RunArtifact art;
          {
            py::gil_scoped_release release;
            art = run_experiment(c, out_dir);
          }
          py::dict runs;
          for (auto const &r : art.runs) {
            py::dict entry;
            entry["records"] = records_array(r.records);
            entry["image"] = r.image ? py::object(from_image(*r.image)) : py::none();
            entry["error"] = r.error;
            runs[py::str(r.label)] = entry;
          }
          return runs;
        },
        py::arg("config"), py::arg("out_dir") = py::none(),
        "Dict keyed by method label with records, image and error for each run.");
}
