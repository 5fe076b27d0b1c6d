// Acceptance checks, one PASS/FAIL line per criterion.
//   symstat_acceptance                 all criteria
//   symstat_acceptance --criterion N   only N; exit status 1 on FAIL

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "symstat/artifacts.hpp"
#include "symstat/errors.hpp"

using namespace symstat;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { lines.push_back("info " + what); }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

std::shared_ptr<const PointGroup> ico() {
  static auto g = std::make_shared<const PointGroup>(build_icosahedral());
  return g;
}

std::shared_ptr<const AngularBasisSet> ico_basis(int l_max) {
  static std::map<int, std::shared_ptr<const AngularBasisSet>> cache;
  auto& slot = cache[l_max];
  if (!slot) slot = std::make_shared<const AngularBasisSet>(build_angular_basis_set(ico(), l_max));
  return slot;
}

ModelParams random_params(std::shared_ptr<const SignalModel> m, std::uint64_t seed, double vmax = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1 * vmax, vmax);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd mu(m->index.mean_count());
  for (auto& x : mu) x = n(rng);
  Eigen::VectorXd v(m->index.n_vec());
  for (auto& x : v) x = u(rng);
  return params_from_diagonal(m, mu, v);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

Vec3 random_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  return random_unit(rng) * (radius * u(rng));
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("symstat_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::vector<std::string>& args, std::string* output = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (output) *output = out.str() + err.str();
  return code;
}

// 1 -------------------------------------------------------------------------

Outcome criterion_1() {
  Outcome o;
  const auto& g = *ico();
  o.check(g.size() == 60, "order " + std::to_string(g.size()) + " (want 60)");
  o.check(g.dims() == std::vector<int>{1, 3, 3, 4, 5}, "irrep dimensions (1,3,3,4,5)");
  const auto r = verify_group(g);
  o.check(r.closure < 1e-10 && r.orthogonality < 1e-10 && r.determinant < 1e-10 && r.inverses,
          "closure " + fmt(r.closure) + ", orthogonality " + fmt(r.orthogonality));
  o.check(r.homomorphism < 1e-10, "homomorphism residual " + fmt(r.homomorphism));
  o.check(r.schur < 1e-10 && r.characters < 1e-10, "Schur orthogonality " + fmt(r.schur) + ", characters " +
                                                       fmt(r.characters));
  o.check(r.dimension_sum == 60, "sum of d_p^2 = " + std::to_string(r.dimension_sum));
  o.check(r.passed(), "verify_group");
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome criterion_2() {
  Outcome o;
  const auto& g = *ico();
  const auto set = build_angular_basis_set(ico(), 20);
  std::mt19937_64 rng(2024);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 100; ++i) dirs.push_back(random_unit(rng));
  double ortho = 0.0, trans = 0.0;
  bool sums = true;
  for (int l = 0; l <= 20; ++l) {
    const auto& s = set.slice(l);
    int total = 0;
    for (int p = 0; p < 5; ++p) total += g.irrep_dim(p) * s.multiplicity(p);
    sums = sums && total == 2 * l + 1;
    Eigen::MatrixXd all(total, 2 * l + 1);
    int row = 0;
    for (int p = 0; p < 5; ++p)
      for (int n = 0; n < s.multiplicity(p); ++n) {
        all.middleRows(row, g.irrep_dim(p)) = s.coeff(p, n);
        row += g.irrep_dim(p);
      }
    ortho = std::max(ortho, (all * all.transpose() - Eigen::MatrixXd::Identity(total, total)).cwiseAbs().maxCoeff());
    for (const auto& u : dirs)
      for (int p = 0; p < 5; ++p)
        for (int n = 0; n < s.multiplicity(p); ++n) {
          const Eigen::VectorXd base = evaluate_angular(s, p, n, u);
          for (int e = 0; e < g.size(); ++e) {
            const Eigen::VectorXd lhs = evaluate_angular(s, p, n, Vec3(g.element(e).transpose() * u));
            trans = std::max(trans, (lhs - g.irreps().real(p, e).transpose() * base).cwiseAbs().maxCoeff());
          }
        }
  }
  o.check(ortho < 1e-9, "orthonormality residual " + fmt(ortho) + " (< 1e-9)");
  o.check(trans < 1e-8, "transformation residual " + fmt(trans) + " over 60 elements x 100 directions (< 1e-8)");
  o.check(sums, "sum_p d_p N(p,l) = 2l+1 for l = 0..20");
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome criterion_3() {
  Outcome o;
  const auto basis = ico_basis(55);
  const CoefficientIndex invariant(*basis, 55, 20, {0});
  const auto counts = tabulate_counts(*ico(), 55);
  int from_characters = 0;
  for (int l = 0; l <= 55; ++l) from_characters += counts[l][0] * 20;
  o.check(invariant.n_vec() == 1060 && from_characters == 1060,
          "p=1, l<=55, N_q=20: " + std::to_string(invariant.n_vec()) + " (characters " +
              std::to_string(from_characters) + ", want 1060)");
  const CoefficientIndex all(*basis, 10, 20, {0, 1, 2, 3, 4});
  o.check(all.n_vec() == 2020, "p=1..5, l<=10, N_q=20: " + std::to_string(all.n_vec()) +
                                   " vector coefficients (want 2020); scalar " + std::to_string(all.n_c()));
  const auto trivial = build_trivial();
  bool asym = true;
  for (int l = 1; l <= 60; ++l) asym = asym && param_count(EstimationMode::Asymmetric, l, trivial) == (l + 1) * (l + 1);
  o.check(asym, "asymmetric count (l_max+1)^2 for l_max = 1..60");
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome criterion_4() {
  Outcome o;
  const auto m = make_model(ico_basis(12), 1.0, 12, 3, {0, 1, 2, 3, 4});
  auto params = random_params(m, 5);
  params.v[2](0, 1) = params.v[2](1, 0) = 0.05;
  const auto full = expand_params(params);
  const auto& idx = m->index;
  bool mean_zero = true, replicated = true, block_diag = true;
  for (const auto& b : idx.blocks())
    if (b.p != 0) mean_zero = mean_zero && full.mean.segment(b.offset, b.dim).isZero(0.0);
  for (int i = 0; i < idx.n_vec(); ++i)
    for (int k = 0; k < idx.n_vec(); ++k) {
      const auto& bi = idx.block(i);
      const auto& bk = idx.block(k);
      const Eigen::MatrixXd sub = full.cov.block(bi.offset, bk.offset, bi.dim, bk.dim);
      if (bi.p != bk.p) {
        block_diag = block_diag && sub.isZero(0.0);
      } else {
        const auto& blocks = idx.blocks_of(bi.p);
        const auto pos = [&](int b) { return std::find(blocks.begin(), blocks.end(), b) - blocks.begin(); };
        const int slot = std::find(idx.p_set().begin(), idx.p_set().end(), bi.p) - idx.p_set().begin();
        const double want = params.v[slot](pos(i), pos(k));
        replicated = replicated && (sub - want * Eigen::MatrixXd::Identity(bi.dim, bk.dim)).isZero(0.0);
      }
    }
  o.check(mean_zero, "expanded mean is zero on every p>=2 entry");
  o.check(block_diag && replicated, "expanded covariance is block diagonal in p with d_p-replicated scalars");

  const auto& g = m->group();
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> pick(0, g.size() - 1);
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Vec3 x1 = random_point(rng, 1.0), x2 = random_point(rng, 1.0);
    const Mat3 rinv = g.element(pick(rng)).transpose();
    worst_mean = std::max(worst_mean, std::abs(mean_density(params, rinv * x1) - mean_density(params, x1)));
    worst_cov = std::max(worst_cov, std::abs(covariance_density(params, rinv * x1, rinv * x2) -
                                             covariance_density(params, x1, x2)));
  }
  o.check(worst_mean < 1e-8, "mean invariance at 200 probes: " + fmt(worst_mean));
  o.check(worst_cov < 1e-8, "covariance invariance at 200 probes: " + fmt(worst_cov));

  const Eigen::VectorXd c = sample_instance(params, 1);
  const Vec3 x(0.3, -0.2, 0.5);
  const double base = c.dot(feature_vector(*m, x));
  double spread = 0.0;
  for (int e = 0; e < g.size(); ++e)
    spread = std::max(spread, std::abs(c.dot(feature_vector(*m, g.element(e).transpose() * x)) - base));
  o.check(spread > 1e-3, "a single realization is not symmetric: max_g |rho(R^-1 x) - rho(x)| = " + fmt(spread));
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome criterion_5() {
  Outcome o;
  const auto m = make_model(ico_basis(8), 1.0, 8, 2, {0, 1, 2, 3, 4});
  const auto params = random_params(m, 9);
  std::mt19937_64 rng(55);
  const int pairs = 20, draws = 20000;
  std::vector<Eigen::VectorXd> f1, f2;
  for (int t = 0; t < pairs; ++t) {
    f1.push_back(feature_vector(*m, random_point(rng, 1.0)));
    f2.push_back(feature_vector(*m, random_point(rng, 1.0)));
  }
  Eigen::MatrixXd a(draws, pairs), b(draws, pairs);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd c = sample_instance(params, 10000 + i);
    for (int t = 0; t < pairs; ++t) {
      a(i, t) = c.dot(f1[t]);
      b(i, t) = c.dot(f2[t]);
    }
  }
  const auto full = expand_params(params);
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const double mean = f1[t].dot(full.mean);
    const double cov = f1[t].dot(full.cov * f2[t]);
    const double ma = a.col(t).mean(), mb = b.col(t).mean();
    const Eigen::ArrayXd da = a.col(t).array() - ma, db = b.col(t).array() - mb;
    const double se_mean = std::sqrt(da.square().mean() / draws);
    const Eigen::ArrayXd prod = da * db;
    const double se_cov = std::sqrt((prod - prod.mean()).square().mean() / draws);
    worst_mean = std::max(worst_mean, std::abs(ma - mean) / se_mean);
    worst_cov = std::max(worst_cov, std::abs(prod.sum() / (draws - 1) - cov) / se_cov);
  }
  o.check(worst_mean < 5.0, "mean at 20 probes within " + fmt(worst_mean) + " standard errors (< 5)");
  o.check(worst_cov < 5.0, "covariance at 20 pairs within " + fmt(worst_cov) + " standard errors (< 5)");
  return o;
}

// 6 -------------------------------------------------------------------------

json closed_loop_config(double snr) {
  return {{"group", "I"},
          {"l_max", 4},
          {"n_q", 3},
          {"radius", 254.0},
          {"mode", "sym-statistics"},
          {"image", {{"side", 32}, {"pixel_size", 16.5}}},
          {"out", "out"},
          {"simulate",
           {{"images", 500}, {"snr", snr}, {"seed", 7}, {"phantom", {{"mean", {1.0, -0.6, 0.3}}, {"variance_scale", 0.04}}}}},
          {"reconstruct", {{"quadrature_count", 300}, {"quadrature_seed", 0}}},
          {"evaluate", {{"curve_l_max", 10}}}};
}

struct ClosedLoop {
  int sim = -1, rec = -1, eval = -1;
  double mean_err = NAN, v_err = NAN;
};

ClosedLoop closed_loop(const std::string& name, double snr) {
  const auto dir = scratch(name);
  write_json(dir / "config.json", closed_loop_config(snr));
  const std::string cfg = (dir / "config.json").string();
  ClosedLoop r;
  r.sim = cli({"simulate", "--config", cfg});
  r.rec = cli({"reconstruct", "--config", cfg});
  r.eval = cli({"evaluate", "--config", cfg});
  if (r.eval == 0) {
    const auto report = read_json(dir / "out" / "evaluation" / "evaluation.json");
    r.mean_err = report.value("mean_rel_l1_error", NAN);
    r.v_err = report.value("v_rel_l1_error", NAN);
  }
  return r;
}

Outcome criterion_6() {
  Outcome o;
  const auto m = make_model(ico_basis(6), 1.0, 6, 2, {0, 1, 2, 3, 4});
  const ImageGeometry geom{8, 0.25};

  {  // (a) monotone log-likelihood over 30 iterations
    const auto mm = make_model(ico_basis(4), 1.0, 4, 2, {0, 1, 2, 3, 4});
    const auto truth = random_params(mm, 30, 0.02);
    const auto stack = simulate_images(truth, 60, 2.0, geom, 31);
    EMConfig cfg;
    cfg.quadrature_count = 40;
    cfg.homogeneous_stage = false;
    cfg.max_iterations = 30;
    cfg.tolerance = 0.0;
    const auto res = fit(stack, cfg, init_spherical(stack, mm));
    const auto& its = res.report.iterations;
    double worst = 0.0;
    for (size_t i = 1; i < its.size(); ++i)
      worst = std::max(worst, (its[i - 1].loglik - its[i].loglik) / std::abs(its[i - 1].loglik));
    o.check(its.size() == 30 && worst <= 1e-8,
            "(a) " + std::to_string(its.size()) + " iterations, largest relative decrease " + fmt(worst) +
                " (<= 1e-8)");
  }

  {  // (b) analytic v-gradient against central differences
    std::vector<Eigen::MatrixXd> ops;
    const ProjectionBuilder b(m, {6, 0.3});
    for (int k = 0; k < 4; ++k) ops.push_back(b.real_operator(random_rotation(500 + k)));
    const auto p = random_params(m, 20, 0.5);
    Eigen::MatrixXd y(ops[0].rows(), 6);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 0.3);
    for (int i = 0; i < 6; ++i) y.col(i) = ops[i % 4] * sample_instance(p, 70 + i);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += n(rng);
    const EMProblem prob(m, ops, y, 0.09, std::vector<double>(4, 0.25));
    const auto ws = e_step(prob, p);
    const VarianceObjective q(prob, ws, expand_mean(p));
    const Eigen::VectorXd v = p.diag_v();
    const Eigen::VectorXd grad = q.gradient(v);
    double worst = 0.0;
    for (int k = 0; k < v.size(); ++k) {
      auto central = [&](double h) {
        Eigen::VectorXd vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        return (q.value(vp) - q.value(vm)) / (2.0 * h);
      };
      const double h = 1e-3 * v[k];
      const double fd = (4.0 * central(h) - central(2.0 * h)) / 3.0;
      worst = std::max(worst, std::abs(fd - grad[k]) / std::max(std::abs(grad[k]), 1e-2 * grad.cwiseAbs().maxCoeff()));
    }
    o.check(worst < 1e-5, "(b) gradient vs central differences, worst relative " + fmt(worst) + " (< 1e-5)");
  }

  {  // (c) Woodbury against a dense inverse, 100 pixels
    const ProjectionBuilder b(m, {10, 0.3});
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      const Eigen::MatrixXd op = b.real_operator(random_rotation(900 + t));
      const Eigen::VectorXd full_var = expand_var_diagonal(random_params(m, 910 + t, 0.5));
      const double sigma2 = 0.05;
      const Eigen::MatrixXd sigma = op * full_var.asDiagonal() * op.transpose() +
                                    sigma2 * Eigen::MatrixXd::Identity(op.rows(), op.rows());
      const Eigen::MatrixXd direct = sigma.inverse();
      const Eigen::MatrixXd wood = woodbury_inverse(op, full_var, sigma2);
      worst = std::max(worst, (wood - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff());
    }
    o.check(worst < 1e-8, "(c) Woodbury vs direct inverse at 100 pixels, relative " + fmt(worst) + " (< 1e-8)");
  }

  {  // (d) closed loop
    const auto r = closed_loop("closed_loop", 0.25);
    o.check(r.sim == 0 && r.eval == 0 && (r.rec == 0 || r.rec == 4),
            "(d) pipeline exit codes simulate " + std::to_string(r.sim) + ", reconstruct " +
                std::to_string(r.rec) + ", evaluate " + std::to_string(r.eval));
    o.check(r.mean_err <= 0.10, "(d) SNR 0.25: mean l1 error " + fmt(r.mean_err) + " (<= 0.10)");
    o.check(r.v_err <= 0.25, "(d) SNR 0.25: diagonal-v l1 error " + fmt(r.v_err) + " (<= 0.25)");
    const auto hi = closed_loop("closed_loop_pixel_snr", 256.0);
    o.info("(d) reference run at image SNR 256 (0.25 per pixel over 1024 pixels): mean error " + fmt(hi.mean_err) +
           ", v error " + fmt(hi.v_err) + "; not counted");
  }
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome criterion_7() {
  Outcome o;
  const auto m = make_model(ico_basis(6), 1.0, 6, 2, {0, 1, 2, 3, 4});
  const auto params = random_params(m, 70);
  const auto vol = render_volume(params, VolumeKind::Mean, 16, 0.14);
  const auto self = fsc(vol, vol);
  double self_dev = 0.0;
  double peak = 0.0;
  for (double e : self.energy) peak = std::max(peak, e);
  for (int s = 0; s < self.size(); ++s)
    if (self.energy[s] > 1e-12 * peak) self_dev = std::max(self_dev, std::abs(self.fsc[s] - 1.0));
  o.check(self_dev < 1e-10, "self-FSC deviation from 1 on energetic shells " + fmt(self_dev));

  VolumeGrid noise(16, 0.14);
  std::mt19937_64 rng(71);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& x : noise.data) x = n(rng);
  VolumeGrid mixed = vol;
  for (size_t i = 0; i < mixed.size(); ++i) mixed.data[i] += 0.5 * noise.data[i];
  const auto c = fsc(noise, mixed);
  bool in_range = true;
  double total = 0.0;
  for (int s = 0; s < c.size(); ++s) {
    in_range = in_range && c.fsc[s] >= -1.0 && c.fsc[s] <= 1.0;
    total += c.energy[s] * c.measure(s);
  }
  o.check(in_range, "FSC within [-1, 1]");
  double norm2 = 0.0;
  for (double x : noise.data) norm2 += x * x;
  const double parseval = std::abs(total / norm2 - 1.0);
  o.check(parseval < 0.02, "discrete Parseval relative error " + fmt(parseval) + " (< 0.02)");

  FSCCurve step;
  step.k = {0.08, 0.10, 0.12, 0.14};
  step.fsc = {1.0, 1.0, 0.0, 0.0};
  step.energy.assign(4, 1.0);
  step.voxels.assign(4, 1);
  const auto r = resolution_at_threshold(step, 0.5);
  o.check(std::abs(r.k - 0.11) < 1e-12 && std::abs(r.length - 1.0 / 0.11) < 1e-9,
          "step curve crossing at k = " + fmt(r.k) + " (want 0.11)");
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome criterion_8() {
  Outcome o;
  std::mt19937_64 rng(88);
  std::normal_distribution<double> n(0.0, 1.0);
  bool involution = true, masks = true;
  for (int order = 1; order <= 8; ++order) {
    const auto g = build_cyclic(order);
    const auto cmap = conjugate_irrep_permutation(g);
    const int np = g.irrep_count();
    for (int p = 0; p < np; ++p) {
      involution = involution && cmap.tau[cmap.tau[p]] == p;
      for (int e = 0; e < g.size(); ++e)
        involution = involution && std::abs(std::conj(g.irreps().character(p, e)) - g.irreps().character(cmap.tau[p], e)) < 1e-12;
    }
    const auto mk = complex_constraint_masks(g, cmap);
    // Group-average random candidate blocks onto the solutions of
    //   C conj(G2) = G1 C     (cc)   and   C G2 = G1 C     (cc*);
    // a block is allowed when a nonzero solution survives.
    for (int p1 = 0; p1 < np; ++p1)
      for (int p2 = 0; p2 < np; ++p2) {
        const int d1 = g.irrep_dim(p1), d2 = g.irrep_dim(p2);
        bool allowed_cc = false, allowed_ccs = false;
        for (int trial = 0; trial < 3; ++trial) {
          Eigen::MatrixXcd cand(d1, d2);
          for (Eigen::Index i = 0; i < cand.size(); ++i) cand.data()[i] = cdouble(n(rng), n(rng));
          Eigen::MatrixXcd cc = Eigen::MatrixXcd::Zero(d1, d2), ccs = Eigen::MatrixXcd::Zero(d1, d2);
          for (int e = 0; e < g.size(); ++e) {
            const auto& g1 = g.irreps().complex(p1, e);
            const auto& g2 = g.irreps().complex(p2, e);
            cc += g1.adjoint() * cand * g2.conjugate();
            ccs += g1.adjoint() * cand * g2;
          }
          cc /= g.size();
          ccs /= g.size();
          double res_cc = 0.0, res_ccs = 0.0;
          for (int e = 0; e < g.size(); ++e) {
            const auto& g1 = g.irreps().complex(p1, e);
            const auto& g2 = g.irreps().complex(p2, e);
            res_cc = std::max(res_cc, (cc * g2.conjugate() - g1 * cc).norm());
            res_ccs = std::max(res_ccs, (ccs * g2 - g1 * ccs).norm());
          }
          masks = masks && res_cc < 1e-10 && res_ccs < 1e-10;
          allowed_cc = allowed_cc || cc.norm() > 1e-8;
          allowed_ccs = allowed_ccs || ccs.norm() > 1e-8;
        }
        masks = masks && mk.cc[p1][p2] == allowed_cc && mk.ccstar[p1][p2] == allowed_ccs;
        masks = masks && mk.cc[p1][p2] == (p1 == cmap.tau[p2]) && mk.ccstar[p1][p2] == (p1 == p2);
      }
  }
  o.check(involution, "tau is an involution mapping each irrep to its conjugate, C_1..C_8");
  o.check(masks, "cc mask = {p1 = tau(p2)}, cc* mask = diagonal, both matching brute-force solutions");
  return o;
}

// 9 -------------------------------------------------------------------------

json determinism_config() {
  return {{"group", "I"},
          {"l_max", 3},
          {"n_q", 2},
          {"radius", 60.0},
          {"image", {{"side", 10}, {"pixel_size", 8.0}}},
          {"out", "out"},
          {"simulate", {{"images", 50}, {"snr", 5.0}, {"seed", 11}, {"phantom", {{"mean", {1.0, -0.5}}}}}},
          {"reconstruct", {{"quadrature_count", 60}, {"max_iterations", 6}, {"homogeneous_max_iterations", 4}}},
          {"evaluate", {{"b", "out"}, {"volume_side", 12}, {"curve_l_max", 12}}},
          {"export", {{"kind", "stddev"}, {"side", 12}}}};
}

std::map<std::string, std::string> run_pipeline(const fs::path& dir, Outcome& o) {
  write_json(dir / "config.json", determinism_config());
  const std::string cfg = (dir / "config.json").string();
  for (const char* cmd : {"basis", "simulate", "reconstruct", "evaluate", "export-volume"}) {
    const int code = cli({cmd, "--config", cfg, "--workers", "2"});
    if (code != 0 && !(code == 4 && std::string(cmd) == "reconstruct"))
      o.check(false, std::string(cmd) + " exited " + std::to_string(code));
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir / "out"))
    if (e.is_regular_file() && e.path().filename() != "log.jsonl")
      files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

Outcome criterion_9() {
  Outcome o;
  const auto a = run_pipeline(scratch("determinism_a"), o);
  const auto b = run_pipeline(scratch("determinism_b"), o);
  bool same = a.size() == b.size() && !a.empty();
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      same = false;
      o.info("differs: " + name);
    }
  }
  o.check(same, std::to_string(a.size()) + " artifacts byte-identical across two runs (log.jsonl holds timings and is excluded)");

  // write -> read -> write of the reconstructed parameters.
  const auto again = scratch("roundtrip");
  const auto p = read_params(fs::temp_directory_path() / "symstat_acceptance_determinism_b" / "out");
  write_params(again, p);
  o.check(read_file(again / "params.bin") == b.at("out/params.bin") &&
              read_file(again / "params.json") == b.at("out/params.json"),
          "params write -> read -> write is byte-identical");
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double seconds_limit;  // 0 when the budget is not machine-independent
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "group and irreps", 10, criterion_1},
      {2, "angular basis", 120, criterion_2},
      {3, "enumeration counts", 0, criterion_3},
      {4, "constraints", 60, criterion_4},
      {5, "Monte Carlo statistics", 300, criterion_5},
      {6, "estimator", 1800, criterion_6},
      {7, "metrics", 60, criterion_7},
      {8, "complex-irrep constraints", 60, criterion_8},
      {9, "determinism", 0, criterion_9},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.seconds_limit > 0) o.check(secs < c.seconds_limit, "runtime " + fmt(secs) + " s (< " + fmt(c.seconds_limit) + " s)");
    for (const auto& line : o.lines) std::cout << "    " << line << "\n";
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (o.pass ? "PASS" : "FAIL") << "\n";
    std::cout.flush();
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
