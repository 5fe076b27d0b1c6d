#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "symstat/artifacts.hpp"
#include "symstat/errors.hpp"
#include "symstat/estimator.hpp"
#include "symstat/metrics.hpp"

namespace symstat::cli {

namespace {

using nlohmann::json;

std::atomic<bool> g_interrupt{false};

void on_sigint(int) { g_interrupt.store(true); }

[[noreturn]] void config_error(const std::string& what) { raise(ErrorKind::InvalidArgument, "config: " + what); }

// Strict field readers: unknown keys and wrong types are configuration errors.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) config_error("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  const auto& v = obj[key];
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_error(std::string(key) + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) config_error(std::string(key) + " must be an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) config_error(std::string(key) + " must be a number");
  } else {
    if (!v.is_string()) config_error(std::string(key) + " must be a string");
  }
  return v.get<T>();
}

void require_range(bool ok, const std::string& what) {
  if (!ok) config_error(what);
}

struct Phantom {
  std::vector<double> mean;
  double variance_scale = 0.04;
};

struct RunConfig {
  fs::path base;  // directory relative paths resolve against; reports store paths relative to it
  std::string group = "I";
  int l_max = 4;
  int n_q = 3;
  double radius = 254.0;
  EstimationMode mode = EstimationMode::SymStatistics;
  ImageGeometry geometry{32, 16.5};
  int workers = 1;
  int checkpoint_every = 0;
  fs::path out = ".";
  std::optional<fs::path> basis_cache;

  int images = 100;
  double snr = 1.0;
  std::uint64_t sim_seed = 1;
  std::optional<fs::path> sim_params;
  Phantom phantom;

  std::optional<fs::path> stack;
  EMConfig em;

  std::optional<fs::path> eval_a, eval_b, eval_truth;
  int volume_side = 32;
  double voxel_size = 0.0;
  int curve_l_max = 60;
  double threshold = 0.5;

  std::optional<fs::path> export_params;
  std::string export_kind = "mean";
  Vec3 x2 = Vec3::Zero();
};

fs::path resolve(const RunConfig& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : c.base / path;
}

std::optional<fs::path> get_path(const RunConfig& c, const json& obj, const char* key) {
  const auto s = get<std::string>(obj, key, "");
  if (s.empty()) return std::nullopt;
  return resolve(c, s);
}

RunConfig parse_config(const json& doc, const fs::path& base) {
  RunConfig c;
  c.base = base;
  check_keys(doc, "config",
             {"group", "l_max", "n_q", "radius", "mode", "image", "workers", "out", "basis_cache", "simulate",
              "reconstruct", "evaluate", "export"});
  c.group = get<std::string>(doc, "group", c.group);
  c.l_max = get<int>(doc, "l_max", c.l_max);
  c.n_q = get<int>(doc, "n_q", c.n_q);
  c.radius = get<double>(doc, "radius", c.radius);
  c.mode = mode_from_string(get<std::string>(doc, "mode", to_string(c.mode)));
  c.workers = get<int>(doc, "workers", c.workers);
  c.out = resolve(c, get<std::string>(doc, "out", "out"));
  c.basis_cache = get_path(c, doc, "basis_cache");
  require_range(c.l_max >= 0, "l_max must be >= 0");
  require_range(c.n_q >= 1, "n_q must be >= 1");
  require_range(c.radius > 0.0, "radius must be > 0");
  require_range(c.workers >= 1, "workers must be >= 1");

  if (doc.contains("image")) {
    const auto& im = doc["image"];
    check_keys(im, "image", {"side", "pixel_size"});
    c.geometry.side = get<int>(im, "side", c.geometry.side);
    c.geometry.pixel_size = get<double>(im, "pixel_size", c.geometry.pixel_size);
  }
  require_range(c.geometry.side >= 1 && c.geometry.pixel_size > 0.0, "image side and pixel_size must be positive");

  if (doc.contains("simulate")) {
    const auto& s = doc["simulate"];
    check_keys(s, "simulate", {"images", "snr", "seed", "params", "phantom"});
    c.images = get<int>(s, "images", c.images);
    c.snr = get<double>(s, "snr", c.snr);
    c.sim_seed = get<std::uint64_t>(s, "seed", c.sim_seed);
    c.sim_params = get_path(c, s, "params");
    if (s.contains("phantom")) {
      const auto& ph = s["phantom"];
      check_keys(ph, "simulate.phantom", {"mean", "variance_scale"});
      if (ph.contains("mean")) {
        if (!ph["mean"].is_array()) config_error("simulate.phantom.mean must be an array");
        for (const auto& v : ph["mean"]) {
          if (!v.is_number()) config_error("simulate.phantom.mean entries must be numbers");
          c.phantom.mean.push_back(v.get<double>());
        }
      }
      c.phantom.variance_scale = get<double>(ph, "variance_scale", c.phantom.variance_scale);
    }
    require_range(c.images >= 1, "simulate.images must be >= 1");
    require_range(c.snr > 0.0, "simulate.snr must be > 0");
    require_range(c.phantom.variance_scale > 0.0, "simulate.phantom.variance_scale must be > 0");
  }

  c.em.mode = c.mode;
  if (doc.contains("reconstruct")) {
    const auto& r = doc["reconstruct"];
    check_keys(r, "reconstruct",
               {"stack", "quadrature_count", "quadrature_seed", "max_iterations", "homogeneous_max_iterations",
                "homogeneous_stage", "inner_steps", "tolerance", "patience", "v_floor", "checkpoint_every"});
    c.stack = get_path(c, r, "stack");
    c.em.quadrature_count = get<int>(r, "quadrature_count", c.em.quadrature_count);
    c.em.quadrature_seed = get<std::uint64_t>(r, "quadrature_seed", c.em.quadrature_seed);
    c.em.max_iterations = get<int>(r, "max_iterations", c.em.max_iterations);
    c.em.homogeneous_max_iterations = get<int>(r, "homogeneous_max_iterations", c.em.homogeneous_max_iterations);
    c.em.homogeneous_stage = get<bool>(r, "homogeneous_stage", c.em.homogeneous_stage);
    c.em.inner_steps = get<int>(r, "inner_steps", c.em.inner_steps);
    c.em.tolerance = get<double>(r, "tolerance", c.em.tolerance);
    c.em.patience = get<int>(r, "patience", c.em.patience);
    c.em.v_floor = get<double>(r, "v_floor", c.em.v_floor);
    c.checkpoint_every = get<int>(r, "checkpoint_every", c.checkpoint_every);
    require_range(c.em.quadrature_count >= 1, "reconstruct.quadrature_count must be >= 1");
    require_range(c.em.max_iterations >= 0 && c.em.homogeneous_max_iterations >= 0, "iteration caps must be >= 0");
    require_range(c.em.inner_steps >= 1, "reconstruct.inner_steps must be >= 1");
    require_range(c.em.tolerance >= 0.0 && c.em.patience >= 1, "bad convergence settings");
    require_range(c.em.v_floor >= 0.0, "reconstruct.v_floor must be >= 0");
  }

  c.voxel_size = c.geometry.pixel_size;
  if (doc.contains("evaluate")) {
    const auto& e = doc["evaluate"];
    check_keys(e, "evaluate", {"a", "b", "truth", "volume_side", "voxel_size", "curve_l_max", "threshold"});
    c.eval_a = get_path(c, e, "a");
    c.eval_b = get_path(c, e, "b");
    c.eval_truth = get_path(c, e, "truth");
    c.volume_side = get<int>(e, "volume_side", c.volume_side);
    c.voxel_size = get<double>(e, "voxel_size", c.voxel_size);
    c.curve_l_max = get<int>(e, "curve_l_max", c.curve_l_max);
    c.threshold = get<double>(e, "threshold", c.threshold);
    require_range(c.volume_side >= 2 && c.voxel_size > 0.0, "evaluate volume grid must be positive");
    require_range(c.curve_l_max >= 0, "evaluate.curve_l_max must be >= 0");
  }

  if (doc.contains("export")) {
    const auto& x = doc["export"];
    check_keys(x, "export", {"params", "kind", "side", "voxel_size", "x2"});
    c.export_params = get_path(c, x, "params");
    c.export_kind = get<std::string>(x, "kind", c.export_kind);
    c.volume_side = get<int>(x, "side", c.volume_side);
    c.voxel_size = get<double>(x, "voxel_size", c.voxel_size);
    if (x.contains("x2")) {
      const auto& v = x["x2"];
      if (!v.is_array() || v.size() != 3) config_error("export.x2 must be a 3-vector");
      for (int i = 0; i < 3; ++i) c.x2[i] = v[i].get<double>();
    }
    require_range(c.export_kind == "mean" || c.export_kind == "stddev" || c.export_kind == "covariance",
                  "export.kind must be mean, stddev or covariance");
  }
  return c;
}

std::shared_ptr<const PointGroup> make_group(const RunConfig& c) {
  auto g = std::make_shared<const PointGroup>(group_from_name(c.group));
  if (!g->has_real_irreps()) config_error("group " + c.group + " has complex irreps; estimation needs real irreps");
  return g;
}

fs::path basis_dir(const RunConfig& c) { return c.basis_cache ? *c.basis_cache : c.out / "basis"; }

// A cached basis is reused when its manifest and payload agree with the
// requested group and degree.
std::optional<AngularBasisSet> cached_basis(const RunConfig& c, std::shared_ptr<const PointGroup> g) {
  const auto dir = basis_dir(c);
  if (!fs::exists(dir / "basis.json") || !fs::exists(dir / "basis.bin")) return std::nullopt;
  const auto m = read_json(dir / "basis.json");
  if (m.value("group", "") != g->name() || m.value("l_max", -1) < c.l_max) return std::nullopt;
  if (m.value("payload_hash", "") != file_hash(dir / "basis.bin")) return std::nullopt;
  return read_basis(dir, g);
}

std::shared_ptr<const AngularBasisSet> load_or_build_basis(const RunConfig& c, std::shared_ptr<const PointGroup> g) {
  if (auto cached = cached_basis(c, g)) return std::make_shared<const AngularBasisSet>(std::move(*cached));
  return std::make_shared<const AngularBasisSet>(build_angular_basis_set(g, c.l_max, c.workers));
}

std::shared_ptr<const SignalModel> make_config_model(const RunConfig& c) {
  const auto g = make_group(c);
  const auto p = mode_p_set(c.mode, *g);
  const auto model = make_model(load_or_build_basis(c, g), c.radius, c.l_max, c.n_q, p);
  check_mode(c.mode, *model);
  return model;
}

int cmd_basis(const RunConfig& c, std::ostream& out) {
  const auto g = make_group(c);
  const auto p_set = mode_p_set(c.mode, *g);
  const auto dir = basis_dir(c);
  bool hit = false;
  if (fs::exists(dir / "basis.json")) {
    const auto m = read_json(dir / "basis.json");
    std::vector<int> stored;
    for (const auto& v : m.value("p_set", json::array())) stored.push_back(v.get<int>() - 1);
    hit = m.value("group", "") == g->name() && m.value("l_max", -1) == c.l_max && m.value("n_q", -1) == c.n_q &&
          stored == p_set && fs::exists(dir / "basis.bin") && m.value("payload_hash", "") == file_hash(dir / "basis.bin");
  }
  if (!hit) {
    fs::create_directories(dir);
    const auto set = build_angular_basis_set(g, c.l_max, c.workers);
    write_basis(dir, set, c.n_q, p_set);
  }
  const auto m = read_json(dir / "basis.json");
  out << (hit ? "cache hit: " : "wrote: ") << (dir / "basis.json").string() << "\n";
  out << "group " << g->name() << "  dims";
  for (int d : g->dims()) out << ' ' << d;
  out << "\n  l";
  for (int p = 0; p < g->irrep_count(); ++p) out << "  p=" << p + 1;
  out << "\n";
  int l = 0;
  for (const auto& row : m["counts"]) {
    out << std::setw(3) << l++;
    for (const auto& n : row) out << std::setw(5) << n.get<int>();
    out << "\n";
  }
  int scalar = 0;
  for (int ll = 0; ll <= c.l_max; ++ll)
    for (int p : p_set) scalar += m["counts"][ll][p].get<int>() * g->irrep_dim(p);
  out << "vector coefficients " << m["vector_coefficients"].get<int>() << "  scalar coefficients " << scalar * c.n_q
      << "  (N_q = " << c.n_q << ")\n";
  if (g->kind() == GroupKind::Icosahedral) {
    const auto counts = tabulate_counts(*g, 55);
    int a = 0, b = 0;
    for (int ll = 0; ll <= 55; ++ll) a += counts[ll][0];
    for (int ll = 0; ll <= 10; ++ll)
      for (int p = 0; p < g->irrep_count(); ++p) b += counts[ll][p];
    out << "reference p=1, l<=55, N_q=20: " << a * 20 << " vector coefficients (quoted 1060)\n";
    out << "reference all p, l<=10, N_q=20: " << b * 20 << " vector coefficients (quoted 2020)\n";
  }
  out << "manifest hash " << file_hash(dir / "basis.json") << "\n";
  return kOk;
}

ModelParams phantom_params(const RunConfig& c, std::shared_ptr<const SignalModel> model) {
  const auto& idx = model->index;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(idx.mean_count());
  if (static_cast<int>(c.phantom.mean.size()) > idx.mean_count())
    config_error("simulate.phantom.mean has more entries than mean coefficients (" +
                 std::to_string(idx.mean_count()) + ")");
  for (size_t i = 0; i < c.phantom.mean.size(); ++i) mu[i] = c.phantom.mean[i];
  Eigen::VectorXd v(idx.n_vec());
  for (int b = 0; b < idx.n_vec(); ++b) {
    const auto& blk = idx.block(b);
    v[b] = c.phantom.variance_scale / ((1.0 + blk.l) * (1.0 + blk.q));
  }
  return params_from_diagonal(model, mu, v);
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  ModelParams truth = c.sim_params ? read_params(*c.sim_params, "params", c.workers) : phantom_params(c, make_config_model(c));
  const auto stack = simulate_images(truth, c.images, c.snr, c.geometry, c.sim_seed, c.workers);
  const auto stack_dir = c.out / "stack";
  fs::create_directories(stack_dir);
  write_stack(stack_dir, stack);
  fs::create_directories(c.out / "truth");
  write_params(c.out / "truth", truth);
  out << "wrote " << stack.count() << " images to " << stack_dir.string() << "\n";
  out << "sigma2 " << stack.sigma2 << "  snr " << stack.snr << "\n";
  out << "stack hash " << file_hash(stack_dir / "stack.bin") << "\n";
  return kOk;
}

int cmd_reconstruct(const RunConfig& c, std::ostream& out) {
  const auto stack_dir = c.stack ? *c.stack : c.out / "stack";
  const auto stack = read_stack(stack_dir);
  if (stack.count() < 1) raise(ErrorKind::InvalidArgument, "image stack is empty");
  const auto model = make_config_model(c);
  fs::create_directories(c.out);

  std::ofstream log(c.out / "log.jsonl", std::ios::trunc);
  if (!log) raise(ErrorKind::IoError, "cannot open log file in " + c.out.string());
  log << json{{"event", "start"},
              {"mode", to_string(c.mode)},
              {"images", stack.count()},
              {"n_c", model->index.n_c()},
              {"n_vec", model->index.n_vec()},
              {"abscissas", c.em.quadrature_count}}
             .dump()
      << "\n";

  EMConfig em = c.em;
  em.mode = c.mode;
  em.workers = c.workers;
  FitHooks hooks;
  hooks.checkpoint_every = c.checkpoint_every;
  hooks.interrupt = &g_interrupt;
  hooks.on_iteration = [&](const IterationRecord& r) {
    log << json{{"event", "iteration"},
                {"stage", r.stage},
                {"iteration", r.iteration},
                {"loglik", r.loglik},
                {"q_gain", r.q_gain},
                {"seconds", r.seconds}}
               .dump()
        << "\n";
    log.flush();
  };
  hooks.checkpoint = [&](const ModelParams& p, const RunReport& r) {
    const auto dir = c.out / "checkpoint";
    fs::create_directories(dir);
    write_params(dir, p);
    write_json(dir / "report.json", report_json(r));
  };

  const auto init = init_spherical(stack, model);
  const auto result = fit(stack, em, init, hooks);
  write_params(c.out, result.params);
  auto report = report_json(result.report);
  report["mode"] = to_string(c.mode);
  write_json(c.out / "report.json", report);
  log << json{{"event", "end"}, {"converged", result.report.converged}, {"seconds", result.report.seconds}}.dump()
      << "\n";

  const auto& its = result.report.iterations;
  out << "iterations " << its.size() << "  final loglik " << std::setprecision(12)
      << (its.empty() ? 0.0 : its.back().loglik) << "\n";
  out << "converged " << (result.report.converged ? "yes" : "no") << "  monotone "
      << (result.report.monotone ? "yes" : "no") << "\n";
  out << "params hash " << file_hash(c.out / "params.bin") << "\n";
  return result.report.converged ? kOk : kNotConverged;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const auto dir_a = c.eval_a ? *c.eval_a : c.out;
  const auto a = read_params(dir_a, "params", c.workers);
  const auto dir = c.out / "evaluation";
  fs::create_directories(dir);
  json doc;
  doc["a"] = fs::relative(dir_a, c.base).generic_string();

  const auto va = render_volume(a, VolumeKind::Mean, c.volume_side, c.voxel_size, Vec3::Zero(), c.workers);
  if (c.eval_b) {
    const auto b = read_params(*c.eval_b, "params", c.workers);
    const auto vb = render_volume(b, VolumeKind::Mean, c.volume_side, c.voxel_size, Vec3::Zero(), c.workers);
    const auto curve = fsc(va, vb);
    write_file(dir / "fsc.csv", fsc_csv(curve));
    try {
      const auto r = resolution_at_threshold(curve, c.threshold);
      doc["resolution"] = {{"k", r.k}, {"length", r.length}, {"threshold", c.threshold}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoCrossing) throw;
      doc["resolution"] = nullptr;
    }
    if (a.mu.size() == b.mu.size()) doc["mean_rel_l1_diff"] = rel_l1_diff(a.mu, b.mu);
    if (a.model->index.n_vec() == b.model->index.n_vec()) doc["v_rel_l1_diff"] = rel_l1_diff(a.diag_v(), b.diag_v());
    out << "fsc " << curve.size() << " shells written to " << (dir / "fsc.csv").string() << "\n";
  }
  const auto truth_dir = c.eval_truth ? *c.eval_truth : c.out / "truth";
  if (fs::exists(truth_dir / "params.json")) {
    const auto t = read_params(truth_dir, "params", c.workers);
    doc["truth"] = fs::relative(truth_dir, c.base).generic_string();
    if (t.mu.size() == a.mu.size()) doc["mean_rel_l1_error"] = rel_l1_error(a.mu, t.mu);
    if (t.model->index.n_vec() == a.model->index.n_vec()) doc["v_rel_l1_error"] = rel_l1_error(a.diag_v(), t.diag_v());
  }

  std::ostringstream curve;
  curve << "l_max,asymmetric,sym_particles,sym_statistics\n";
  const auto& g = a.model->group();
  const auto trivial = build_trivial();
  for (int l = 0; l <= c.curve_l_max; ++l)
    curve << l << ',' << param_count(EstimationMode::Asymmetric, l, trivial) << ','
          << param_count(EstimationMode::SymParticles, l, g) << ','
          << param_count(EstimationMode::SymStatistics, l, g) << '\n';
  write_file(dir / "param_counts.csv", curve.str());
  write_json(dir / "evaluation.json", doc);
  for (const auto& [k, v] : doc.items())
    if (v.is_number()) out << k << ' ' << v.get<double>() << "\n";
  return kOk;
}

int cmd_export(const RunConfig& c, std::ostream& out) {
  const auto src = c.export_params ? *c.export_params : c.out;
  const auto p = read_params(src, "params", c.workers);
  const VolumeKind kind = c.export_kind == "mean"     ? VolumeKind::Mean
                          : c.export_kind == "stddev" ? VolumeKind::StdDev
                                                      : VolumeKind::CovarianceSlice;
  const auto vol = render_volume(p, kind, c.volume_side, c.voxel_size, c.x2, c.workers);
  const auto dir = c.out / "volumes";
  fs::create_directories(dir);
  write_volume(dir, vol, c.export_kind);
  out << "wrote " << (dir / (c.export_kind + ".json")).string() << "\n";
  return kOk;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::IoError:
    case ErrorKind::NotFound:
    case ErrorKind::LengthMismatch:
    case ErrorKind::GridMismatch:
    case ErrorKind::ConstraintViolation:
      return kUsage;
    case ErrorKind::Interrupted:
      return kNotConverged;
    default:
      return kInternal;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symmetric-statistics reconstruction from reciprocal-space images"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, mode, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers, checkpoint_every;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--mode", mode, "asym | sym-particles | sym-statistics");
  app.add_option("--seed", seed, "seed for simulation or quadrature");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--checkpoint-every", checkpoint_every, "checkpoint every K outer iterations")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");
  auto* basis = app.add_subcommand("basis", "build and cache the symmetry-adapted basis");
  auto* simulate = app.add_subcommand("simulate", "simulate an image stack");
  auto* reconstruct = app.add_subcommand("reconstruct", "estimate mean and variance parameters");
  auto* evaluate = app.add_subcommand("evaluate", "FSC, norm differences and parameter counts");
  auto* exportv = app.add_subcommand("export-volume", "sample a mean, stddev or covariance volume");

  std::vector<std::string> argv_store{"symstat"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const fs::path cfg_file(config_path);
    json doc;
    try {
      doc = read_json(cfg_file);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    RunConfig c = parse_config(doc, fs::absolute(cfg_file).parent_path());
    if (!mode.empty()) c.mode = mode_from_string(mode);
    c.em.mode = c.mode;
    if (workers) c.workers = *workers;
    if (checkpoint_every) c.checkpoint_every = *checkpoint_every;
    if (!out_dir.empty()) c.out = fs::absolute(out_dir);
    if (seed) {
      c.sim_seed = *seed;
      c.em.quadrature_seed = *seed;
    }

    g_interrupt.store(false);
    auto previous = std::signal(SIGINT, on_sigint);
    int code = kOk;
    if (*basis) code = cmd_basis(c, out);
    else if (*simulate) code = cmd_simulate(c, out);
    else if (*reconstruct) code = cmd_reconstruct(c, out);
    else if (*evaluate) code = cmd_evaluate(c, out);
    else if (*exportv) code = cmd_export(c, out);
    std::signal(SIGINT, previous);
    return code;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace symstat::cli
