#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cli.hpp"
#include "symstat/artifacts.hpp"
#include "symstat/errors.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace symstat;

namespace {

std::shared_ptr<const PointGroup> group_ptr(const std::string& name) {
  return std::make_shared<const PointGroup>(group_from_name(name));
}

struct Model {
  std::shared_ptr<const SignalModel> m;
};

Model make(const std::string& group, int l_max, int n_q, double radius, std::optional<std::vector<int>> p_set,
           const std::string& mode, int workers) {
  auto g = group_ptr(group);
  const auto p = p_set ? *p_set : mode_p_set(mode_from_string(mode), *g);
  auto angular = std::make_shared<const AngularBasisSet>(build_angular_basis_set(g, l_max, workers));
  return {make_model(angular, radius, l_max, n_q, p)};
}

VolumeGrid to_grid(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double voxel) {
  if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(1) != a.shape(2))
    raise(ErrorKind::InvalidArgument, "volume must be a cubic 3-D array");
  VolumeGrid v(static_cast<int>(a.shape(0)), voxel);
  std::copy(a.data(), a.data() + a.size(), v.data.begin());
  return v;
}

py::array_t<double> from_grid(const VolumeGrid& v) {
  py::array_t<double> out({v.side, v.side, v.side});
  std::copy(v.data.begin(), v.data.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const RunReport& r) {
  py::list its;
  for (const auto& it : r.iterations) {
    py::dict d;
    d["stage"] = it.stage;
    d["iteration"] = it.iteration;
    d["loglik"] = it.loglik;
    d["q_gain"] = it.q_gain;
    its.append(d);
  }
  py::dict d;
  d["iterations"] = its;
  d["converged"] = r.converged;
  d["monotone"] = r.monotone;
  d["v_floor"] = r.v_floor;
  return d;
}

}  // namespace

PYBIND11_MODULE(_symstat, m) {
  m.doc() = "Mean and covariance reconstruction under symmetric statistics";
  py::register_exception<Error>(m, "SymstatError", PyExc_RuntimeError);

  m.def(
      "group_info",
      [](const std::string& name) {
        const auto g = group_from_name(name);
        const auto r = verify_group(g);
        py::dict d;
        d["name"] = g.name();
        d["order"] = g.size();
        d["dims"] = g.dims();
        d["real_irreps"] = g.has_real_irreps();
        d["elements"] = g.elements();
        d["passed"] = r.passed();
        d["closure"] = r.closure;
        d["homomorphism"] = r.homomorphism;
        d["schur"] = r.schur;
        return d;
      },
      py::arg("name"));
  m.def("tabulate_counts", [](const std::string& g, int l_max) { return tabulate_counts(group_from_name(g), l_max); },
        py::arg("group"), py::arg("l_max"));
  m.def(
      "param_count",
      [](const std::string& mode, int l_max, const std::string& g) {
        return param_count(mode_from_string(mode), l_max, group_from_name(g));
      },
      py::arg("mode"), py::arg("l_max"), py::arg("group"));
  m.def("real_sph_harm", [](int l, int mm, double theta, double phi) { return real_sph_harm(l, mm, {theta, phi}); },
        py::arg("l"), py::arg("m"), py::arg("theta"), py::arg("phi"));
  m.def("real_wigner_d", [](int l, const Mat3& r) { return real_wigner_d(l, r).matrix; }, py::arg("l"),
        py::arg("rotation"));

  py::class_<Model>(m, "Model")
      .def(py::init(&make), py::arg("group"), py::arg("l_max"), py::arg("n_q"), py::arg("radius"),
           py::arg("p_set") = py::none(), py::arg("mode") = "sym-statistics", py::arg("workers") = 1)
      .def_property_readonly("n_c", [](const Model& s) { return s.m->index.n_c(); })
      .def_property_readonly("n_vec", [](const Model& s) { return s.m->index.n_vec(); })
      .def_property_readonly("mean_count", [](const Model& s) { return s.m->index.mean_count(); })
      .def_property_readonly("p_set", [](const Model& s) { return s.m->index.p_set(); })
      .def("blocks", [](const Model& s) {
        py::list out;
        for (const auto& b : s.m->index.blocks())
          out.append(py::dict("p"_a = b.p, "l"_a = b.l, "n"_a = b.n, "q"_a = b.q, "offset"_a = b.offset, "dim"_a = b.dim));
        return out;
      })
      .def("feature_vector", [](const Model& s, const Vec3& x) { return feature_vector(*s.m, x); });

  py::class_<ModelParams>(m, "Params")
      .def(py::init([](const Model& model, const Eigen::VectorXd& mu, const Eigen::VectorXd& v) {
             return params_from_diagonal(model.m, mu, v);
           }),
           py::arg("model"), py::arg("mu"), py::arg("v"))
      .def_property_readonly("model", [](const ModelParams& p) { return Model{p.model}; })
      .def_readonly("mu", &ModelParams::mu)
      .def_property_readonly("v", &ModelParams::diag_v)
      .def_readonly("v_blocks", &ModelParams::v)
      .def("mean_density", [](const ModelParams& p, const Vec3& x) { return mean_density(p, x); })
      .def("covariance_density",
           [](const ModelParams& p, const Vec3& a, const Vec3& b) { return covariance_density(p, a, b); })
      .def("variance_density", [](const ModelParams& p, const Vec3& x) { return variance_density(p, x); })
      .def("sample", [](const ModelParams& p, std::uint64_t seed) { return sample_instance(p, seed); },
           py::arg("seed"))
      .def("expanded_mean", [](const ModelParams& p) { return expand_mean(p); })
      .def("write", [](const ModelParams& p, const fs::path& dir) { write_params(dir, p); })
      .def_static("read", [](const fs::path& dir) { return read_params(dir); });

  py::class_<ImageStack>(m, "Stack")
      .def_readonly("images", &ImageStack::images)
      .def_readonly("sigma2", &ImageStack::sigma2)
      .def_readonly("snr", &ImageStack::snr)
      .def_property_readonly("count", &ImageStack::count)
      .def_property_readonly("side", [](const ImageStack& s) { return s.geometry.side; })
      .def_property_readonly("pixel_size", [](const ImageStack& s) { return s.geometry.pixel_size; })
      .def("write", [](const ImageStack& s, const fs::path& dir) { write_stack(dir, s); })
      .def_static("read", [](const fs::path& dir) { return read_stack(dir); });

  m.def(
      "simulate",
      [](const ModelParams& p, int n, double snr, int side, double pixel, std::uint64_t seed, int workers) {
        return simulate_images(p, n, snr, {side, pixel}, seed, workers);
      },
      py::arg("params"), py::arg("images"), py::arg("snr"), py::arg("side"), py::arg("pixel_size"),
      py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "fit",
      [](const ImageStack& stack, const Model& model, const std::string& mode, int quadrature_count,
         int max_iterations, int homogeneous_max_iterations, double tolerance, int workers) {
        EMConfig cfg;
        cfg.mode = mode_from_string(mode);
        cfg.quadrature_count = quadrature_count;
        cfg.max_iterations = max_iterations;
        cfg.homogeneous_max_iterations = homogeneous_max_iterations;
        cfg.tolerance = tolerance;
        cfg.workers = workers;
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(stack, cfg, init_spherical(stack, model.m));
        }
        return py::make_tuple(r.params, report_dict(r.report));
      },
      py::arg("stack"), py::arg("model"), py::arg("mode") = "sym-statistics", py::arg("quadrature_count") = 300,
      py::arg("max_iterations") = 200, py::arg("homogeneous_max_iterations") = 200, py::arg("tolerance") = 1e-6,
      py::arg("workers") = 1);

  m.def(
      "render_volume",
      [](const ModelParams& p, const std::string& kind, int side, double voxel, const Vec3& x2) {
        const VolumeKind k = kind == "mean"     ? VolumeKind::Mean
                             : kind == "stddev" ? VolumeKind::StdDev
                             : kind == "covariance"
                                 ? VolumeKind::CovarianceSlice
                                 : (raise(ErrorKind::InvalidArgument, "kind must be mean, stddev or covariance"),
                                    VolumeKind::Mean);
        return from_grid(render_volume(p, k, side, voxel, x2));
      },
      py::arg("params"), py::arg("kind"), py::arg("side"), py::arg("voxel_size"), py::arg("x2") = Vec3::Zero());

  m.def(
      "fsc",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b, double voxel, double width) {
        const auto c = fsc(to_grid(a, voxel), to_grid(b, voxel), width);
        return py::dict("k"_a = c.k, "fsc"_a = c.fsc, "energy"_a = c.energy, "voxels"_a = c.voxels);
      },
      py::arg("a"), py::arg("b"), py::arg("voxel_size") = 1.0, py::arg("shell_width") = 1.0);
  m.def(
      "resolution_at_threshold",
      [](std::vector<double> k, std::vector<double> f, double threshold) {
        FSCCurve c;
        c.energy.assign(k.size(), 1.0);
        c.voxels.assign(k.size(), 1);
        c.k = std::move(k);
        c.fsc = std::move(f);
        const auto r = resolution_at_threshold(c, threshold);
        return py::make_tuple(r.k, r.length);
      },
      py::arg("k"), py::arg("fsc"), py::arg("threshold") = 0.5);
  m.def("rel_l1_diff", &rel_l1_diff, py::arg("a"), py::arg("b"));
  m.def("rel_l1_error", &rel_l1_error, py::arg("estimate"), py::arg("truth"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
