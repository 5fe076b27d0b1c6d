#include "symstat/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "symstat/errors.hpp"
#include "symstat/parallel.hpp"

namespace symstat {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(EstimationMode mode) {
  switch (mode) {
    case EstimationMode::Asymmetric: return "asym";
    case EstimationMode::SymParticles: return "sym-particles";
    case EstimationMode::SymStatistics: return "sym-statistics";
  }
  return "?";
}

EstimationMode mode_from_string(const std::string& text) {
  if (text == "asym" || text == "asymmetric") return EstimationMode::Asymmetric;
  if (text == "sym-particles") return EstimationMode::SymParticles;
  if (text == "sym-statistics") return EstimationMode::SymStatistics;
  raise(ErrorKind::InvalidArgument, "unknown mode '" + text + "'");
}

std::vector<int> mode_p_set(EstimationMode mode, const PointGroup& group) {
  switch (mode) {
    case EstimationMode::Asymmetric:
      require(group.kind() == GroupKind::Trivial, ErrorKind::InvalidArgument, "asym mode needs the trivial group");
      return {0};
    case EstimationMode::SymParticles: return {0};
    case EstimationMode::SymStatistics: {
      std::vector<int> all(group.irrep_count());
      for (int p = 0; p < group.irrep_count(); ++p) all[p] = p;
      return all;
    }
  }
  return {0};
}

void check_mode(EstimationMode mode, const SignalModel& model) {
  require(model.group().has_real_irreps(), ErrorKind::InvalidArgument, "estimation needs a real-irrep group");
  require(model.index.p_set() == mode_p_set(mode, model.group()), ErrorKind::InvalidArgument,
          "p_set does not match mode " + to_string(mode));
}

EMProblem::EMProblem(std::shared_ptr<const SignalModel> model, const ImageStack& stack, SO3Quadrature quadrature,
                     int workers)
    : model_(std::move(model)) {
  require(stack.count() >= 1, ErrorKind::InvalidArgument, "image stack is empty");
  require(stack.sigma2 > 0.0, ErrorKind::InvalidArgument, "noise variance must be > 0");
  require(stack.images.rows() == stack.geometry.pixels(), ErrorKind::InvalidArgument, "stack does not match its geometry");
  const ProjectionBuilder builder(model_, stack.geometry);
  const Eigen::MatrixXd y = to_real_layout(stack.images);
  rows_ = static_cast<int>(y.rows());
  sigma2_ = stack.sigma2;
  yy_ = y.colwise().squaredNorm().transpose();
  const int nk = quadrature.size();
  a_.resize(nk);
  b_.resize(nk);
  log_w_.resize(nk);
  parallel_for(nk, workers, [&](int k) {
    const Eigen::MatrixXd op = builder.real_operator(quadrature.rotations[k]);
    a_[k] = op.transpose() * op;
    b_[k] = op.transpose() * y;
    log_w_[k] = std::log(quadrature.weights[k]);
  });
}

EMProblem::EMProblem(std::shared_ptr<const SignalModel> model, const std::vector<Eigen::MatrixXd>& ops,
                     const Eigen::MatrixXd& y, double sigma2, std::vector<double> weights)
    : model_(std::move(model)), rows_(static_cast<int>(y.rows())), sigma2_(sigma2) {
  require(!ops.empty() && ops.size() == weights.size(), ErrorKind::LengthMismatch, "one weight per operator");
  require(sigma2 > 0.0, ErrorKind::InvalidArgument, "noise variance must be > 0");
  yy_ = y.colwise().squaredNorm().transpose();
  for (size_t k = 0; k < ops.size(); ++k) {
    require(ops[k].rows() == y.rows() && ops[k].cols() == model_->index.n_c(), ErrorKind::LengthMismatch,
            "operator shape");
    a_.push_back(ops[k].transpose() * ops[k]);
    b_.push_back(ops[k].transpose() * y);
    log_w_.push_back(std::log(weights[k]));
  }
}

WoodburyFactor woodbury_factor(const Eigen::MatrixXd& a, const Eigen::VectorXd& var_diag, double sigma2) {
  WoodburyFactor f;
  f.s = var_diag.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd k = f.s.asDiagonal() * a * f.s.asDiagonal();
  k.diagonal().array() += sigma2;
  f.k.compute(k);
  if (f.k.info() != Eigen::Success) raise(ErrorKind::NumericalFailure, "K = sigma^2 I + S A S is not positive definite");
  const auto diag = f.k.matrixLLT().diagonal();
  f.logdet_k = 2.0 * diag.array().log().sum();
  if (!std::isfinite(f.logdet_k)) raise(ErrorKind::NumericalFailure, "non-finite log-determinant");
  return f;
}

Eigen::MatrixXd woodbury_inverse(const Eigen::MatrixXd& op, const Eigen::VectorXd& var_diag, double sigma2) {
  const WoodburyFactor f = woodbury_factor(op.transpose() * op, var_diag, sigma2);
  const Eigen::MatrixXd ls = op * f.s.asDiagonal();
  Eigen::MatrixXd out = -(ls * f.k.solve(ls.transpose()));
  out.diagonal().array() += 1.0;
  return out / sigma2;
}

double woodbury_logdet(const Eigen::MatrixXd& op, const Eigen::VectorXd& var_diag, double sigma2) {
  const WoodburyFactor f = woodbury_factor(op.transpose() * op, var_diag, sigma2);
  return (op.rows() - op.cols()) * std::log(sigma2) + f.logdet_k;
}

EMWorkspace e_step(const EMProblem& problem, const ModelParams& params, int workers) {
  const int nk = problem.abscissas();
  const int nv = problem.images();
  const int nc = problem.n_c();
  const double s2 = problem.sigma2();
  const double n = problem.rows();
  const Eigen::VectorXd cbar = expand_mean(params);
  const Eigen::VectorXd var = expand_var_diagonal(params);

  EMWorkspace ws;
  ws.loglik_terms.resize(nv, nk);
  std::vector<WoodburyFactor> factors(nk);
  parallel_for(nk, workers, [&](int k) {
    factors[k] = woodbury_factor(problem.a(k), var, s2);
    const auto& f = factors[k];
    const Eigen::VectorXd ac = problem.a(k) * cbar;
    const double cac = cbar.dot(ac);
    const Eigen::MatrixXd z = f.s.asDiagonal() * (problem.b(k).colwise() - ac);
    const Eigen::MatrixXd x = f.k.solve(z);
    const Eigen::VectorXd cb = problem.b(k).transpose() * cbar;
    const double constant = n * kLog2Pi + (n - nc) * std::log(s2) + f.logdet_k;
    for (int i = 0; i < nv; ++i) {
      const double quad = (problem.yy()[i] - 2.0 * cb[i] + cac - z.col(i).dot(x.col(i))) / s2;
      ws.loglik_terms(i, k) = -0.5 * (constant + quad);
    }
  });

  ws.posterior.resize(nv, nk);
  ws.loglik = 0.0;
  for (int i = 0; i < nv; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < nk; ++k) top = std::max(top, ws.loglik_terms(i, k) + problem.log_weight(k));
    double acc = 0.0;
    for (int k = 0; k < nk; ++k) {
      const double e = std::exp(ws.loglik_terms(i, k) + problem.log_weight(k) - top);
      ws.posterior(i, k) = e;
      acc += e;
    }
    ws.posterior.row(i) /= acc;
    ws.loglik += top + std::log(acc);
  }
  if (!std::isfinite(ws.loglik)) raise(ErrorKind::NumericalFailure, "non-finite log-likelihood");

  ws.w_sum.resize(nk);
  ws.bw.resize(nk);
  ws.bb.resize(nk);
  ws.yyw.resize(nk);
  std::vector<Eigen::MatrixXd> fk(nk);
  std::vector<Eigen::VectorXd> gk(nk);
  parallel_for(nk, workers, [&](int k) {
    const Eigen::VectorXd w = ws.posterior.col(k);
    const auto& b = problem.b(k);
    const auto& a = problem.a(k);
    const auto& f = factors[k];
    ws.w_sum[k] = w.sum();
    ws.bw[k] = b * w;
    ws.bb[k] = b * w.asDiagonal() * b.transpose();
    ws.yyw[k] = problem.yy().dot(w);
    // P = K^{-1} S A; L^T Sigma^{-1} L = (A - (SA)^T P) / s2; T = (I - P^T S) / s2.
    const Eigen::MatrixXd sa = f.s.asDiagonal() * a;
    const Eigen::MatrixXd p = f.k.solve(sa);
    fk[k] = ws.w_sum[k] * (a - sa.transpose() * p) / s2;
    gk[k] = (ws.bw[k] - p.transpose() * (f.s.asDiagonal() * ws.bw[k])) / s2;
  });
  ws.f = Eigen::MatrixXd::Zero(nc, nc);
  ws.g = Eigen::VectorXd::Zero(nc);
  for (int k = 0; k < nk; ++k) {
    ws.f += fk[k];
    ws.g += gk[k];
  }
  ws.f = 0.5 * (ws.f + ws.f.transpose());
  return ws;
}

Eigen::VectorXd m_step_mean(const EMWorkspace& ws, const SignalModel& model) {
  const auto& idx = model.index;
  const auto& free = idx.blocks_of(0);
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd f(nf, nf);
  Eigen::VectorXd g(nf);
  for (int a = 0; a < nf; ++a) {
    const int oa = idx.block(free[a]).offset;
    g[a] = ws.g[oa];
    for (int b = 0; b < nf; ++b) f(a, b) = ws.f(oa, idx.block(free[b]).offset);
  }
  const double ridge = 1e-10 * ws.f.trace() / idx.n_c();
  f.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(f);
  if (llt.info() != Eigen::Success || !(ridge > 0.0)) raise(ErrorKind::SingularSystem, "F is singular on the mean entries");
  Eigen::VectorXd mu = llt.solve(g);
  if (!mu.allFinite()) raise(ErrorKind::SingularSystem, "mean update is not finite");
  return mu;
}

VarianceObjective::VarianceObjective(const EMProblem& problem, const EMWorkspace& ws, const Eigen::VectorXd& mean,
                                     int workers)
    : problem_(problem), ws_(ws), workers_(workers) {
  const int nk = problem.abscissas();
  for (int k = 0; k < nk; ++k)
    if (ws.w_sum[k] > 0.0) active_.push_back(k);
  m_.resize(nk);
  e_.resize(nk);
  parallel_for(static_cast<int>(active_.size()), workers, [&](int t) {
    const int k = active_[t];
    const Eigen::VectorXd ac = problem.a(k) * mean;
    const double w = ws.w_sum[k];
    m_[k] = ws.bb[k] - ws.bw[k] * ac.transpose() - ac * ws.bw[k].transpose() + w * ac * ac.transpose();
    e_[k] = ws.yyw[k] - 2.0 * mean.dot(ws.bw[k]) + w * mean.dot(ac);
  });
}

Eigen::VectorXd VarianceObjective::expand(const Eigen::VectorXd& v) const {
  const auto& idx = problem_.model().index;
  require(v.size() == idx.n_vec(), ErrorKind::LengthMismatch, "variance vector length");
  Eigen::VectorXd out(idx.n_c());
  for (int b = 0; b < idx.n_vec(); ++b) out.segment(idx.block(b).offset, idx.block(b).dim).setConstant(v[b]);
  return out;
}

double VarianceObjective::value(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd var = expand(v);
  const double s2 = problem_.sigma2();
  const double n = problem_.rows();
  const double nc = problem_.n_c();
  std::vector<double> part(active_.size());
  parallel_for(static_cast<int>(active_.size()), workers_, [&](int t) {
    const int k = active_[t];
    const WoodburyFactor f = woodbury_factor(problem_.a(k), var, s2);
    const Eigen::MatrixXd sms = f.s.asDiagonal() * m_[k] * f.s.asDiagonal();
    const double tr = f.k.solve(sms).trace();
    const double w = ws_.w_sum[k];
    part[t] = -0.5 * (w * (n * kLog2Pi + (n - nc) * std::log(s2) + f.logdet_k) + (e_[k] - tr) / s2);
  });
  double q = 0.0;
  for (double x : part) q += x;
  return q;
}

void VarianceObjective::gradient_and_curvature(const Eigen::VectorXd& v, Eigen::VectorXd& grad,
                                               Eigen::VectorXd& curv) const {
  const auto& idx = problem_.model().index;
  const Eigen::VectorXd var = expand(v);
  const double s2 = problem_.sigma2();
  std::vector<Eigen::VectorXd> dgrad(active_.size());
  std::vector<Eigen::VectorXd> dcurv(active_.size());
  parallel_for(static_cast<int>(active_.size()), workers_, [&](int t) {
    const int k = active_[t];
    const auto& a = problem_.a(k);
    const WoodburyFactor f = woodbury_factor(a, var, s2);
    const Eigen::MatrixXd sa = f.s.asDiagonal() * a;
    const Eigen::MatrixXd p = f.k.solve(sa);
    const Eigen::MatrixXd g = (a - sa.transpose() * p) / s2;
    Eigen::MatrixXd tm = -(p.transpose() * f.s.asDiagonal());
    tm.diagonal().array() += 1.0;
    tm /= s2;
    const Eigen::MatrixXd tmt = tm * m_[k] * tm.transpose();
    const double w = ws_.w_sum[k];
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(idx.n_vec());
    Eigen::VectorXd cb = Eigen::VectorXd::Zero(idx.n_vec());
    for (int b = 0; b < idx.n_vec(); ++b) {
      const auto& blk = idx.block(b);
      for (int j = 0; j < blk.dim; ++j) gb[b] += 0.5 * (tmt(blk.offset + j, blk.offset + j) - w * g(blk.offset + j, blk.offset + j));
      cb[b] = 0.5 * w * g.block(blk.offset, blk.offset, blk.dim, blk.dim).squaredNorm();
    }
    dgrad[t] = std::move(gb);
    dcurv[t] = std::move(cb);
  });
  grad = Eigen::VectorXd::Zero(idx.n_vec());
  curv = Eigen::VectorXd::Zero(idx.n_vec());
  for (size_t t = 0; t < active_.size(); ++t) {
    grad += dgrad[t];
    curv += dcurv[t];
  }
}

Eigen::VectorXd VarianceObjective::gradient(const Eigen::VectorXd& v) const {
  Eigen::VectorXd g, c;
  gradient_and_curvature(v, g, c);
  return g;
}

VarianceStep m_step_var(const EMProblem& problem, const EMWorkspace& ws, const ModelParams& params, int inner_steps,
                        double floor, int workers) {
  const VarianceObjective q(problem, ws, expand_mean(params), workers);
  VarianceStep out;
  out.v = params.diag_v().cwiseMax(floor);
  out.q_before = q.value(out.v);
  double current = out.q_before;
  for (int step = 0; step < inner_steps; ++step) {
    Eigen::VectorXd grad, curv;
    q.gradient_and_curvature(out.v, grad, curv);
    Eigen::VectorXd dir(grad.size());
    for (Eigen::Index b = 0; b < grad.size(); ++b) {
      dir[b] = curv[b] > 0.0 ? grad[b] / curv[b] : 0.0;
      if (out.v[b] <= floor && dir[b] < 0.0) dir[b] = 0.0;
    }
    if (dir.cwiseAbs().maxCoeff() == 0.0) break;
    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const Eigen::VectorXd trial = (out.v + t * dir).cwiseMax(floor);
      double value;
      try {
        value = q.value(trial);
      } catch (const Error&) {
        continue;
      }
      if (value > current) {
        out.v = trial;
        current = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (out.steps == 0) out.ascent_failed = true;
      break;
    }
    ++out.steps;
  }
  out.q_after = current;
  return out;
}

ModelParams init_spherical(const ImageStack& stack, std::shared_ptr<const SignalModel> model) {
  require(stack.count() >= 1, ErrorKind::InvalidArgument, "image stack is empty");
  const auto& idx = model->index;
  std::vector<int> cols, mu_slots;
  const auto& b0 = idx.blocks_of(0);
  for (size_t i = 0; i < b0.size(); ++i) {
    if (idx.block(b0[i]).l == 0) {
      cols.push_back(idx.block(b0[i]).offset);
      mu_slots.push_back(static_cast<int>(i));
    }
  }
  require(!cols.empty(), ErrorKind::InvalidArgument, "model has no l = 0 coefficients");
  const ProjectionBuilder builder(model, stack.geometry);
  const Eigen::MatrixXd op = builder.real_operator(Mat3::Identity());
  Eigen::MatrixXd x(op.rows(), cols.size());
  for (size_t c = 0; c < cols.size(); ++c) x.col(c) = op.col(cols[c]);
  const Eigen::VectorXd ybar = to_real_layout(stack.images).rowwise().mean();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < static_cast<Eigen::Index>(cols.size()))
    raise(ErrorKind::SingularSystem, "more radial functions than resolvable frequency shells");
  const Eigen::VectorXd sol = qr.solve(ybar);

  ModelParams p = make_params(model, 1.0);
  for (size_t c = 0; c < cols.size(); ++c) p.mu[mu_slots[c]] = sol[c];
  double scale = 1e-4 * sol.squaredNorm() / sol.size();
  if (!(scale > 0.0)) scale = 1e-12;
  p.set_diag_v(Eigen::VectorXd::Constant(idx.n_vec(), scale));
  return p;
}

FitResult fit(const EMProblem& problem, const EMConfig& config, const ModelParams& init, const FitHooks& hooks) {
  check_mode(config.mode, problem.model());
  require(init.model.get() == &problem.model() || init.model->index.n_c() == problem.n_c(), ErrorKind::InvalidArgument,
          "initial parameters belong to a different model");
  const auto t_start = std::chrono::steady_clock::now();
  FitResult out;
  out.params = init;
  auto& report = out.report;
  const double floor = config.v_floor > 0.0 ? config.v_floor : 1e-8 * median(init.diag_v());
  require(floor > 0.0, ErrorKind::InvalidArgument, "variance floor must be > 0");
  report.v_floor = floor;
  const int nvec = problem.model().index.n_vec();

  auto finish_iteration = [&](IterationRecord rec, int count) {
    report.iterations.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(rec);
    if (hooks.checkpoint && hooks.checkpoint_every > 0 && count % hooks.checkpoint_every == 0)
      hooks.checkpoint(out.params, report);
    if (hooks.interrupt && hooks.interrupt->load()) {
      if (hooks.checkpoint) hooks.checkpoint(out.params, report);
      raise(ErrorKind::Interrupted, "interrupted after iteration " + std::to_string(rec.iteration));
    }
  };
  auto converged_now = [&](const std::vector<double>& ll, int& streak) {
    if (ll.size() < 2) return false;
    const double a = ll[ll.size() - 1], b = ll[ll.size() - 2];
    const double rel = std::abs(a - b) / std::max(std::abs(a), 1e-300);
    streak = rel < config.tolerance ? streak + 1 : 0;
    return streak >= config.patience;
  };

  int count = 0;
  const Eigen::VectorXd v_start = init.diag_v().cwiseMax(floor);
  if (config.homogeneous_stage) {
    out.params.set_diag_v(Eigen::VectorXd::Constant(nvec, floor));
    std::vector<double> ll;
    int streak = 0;
    for (int it = 1; it <= config.homogeneous_max_iterations; ++it) {
      const auto t0 = std::chrono::steady_clock::now();
      const EMWorkspace ws = e_step(problem, out.params, config.workers);
      ll.push_back(ws.loglik);
      out.params.mu = m_step_mean(ws, problem.model());
      finish_iteration({"homogeneous", it, ws.loglik, seconds_since(t0), 0.0}, ++count);
      if (converged_now(ll, streak)) {
        report.homogeneous_converged = true;
        break;
      }
    }
  }

  out.params.set_diag_v(v_start);
  std::vector<double> ll;
  int streak = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const EMWorkspace ws = e_step(problem, out.params, config.workers);
    if (!ll.empty() && ws.loglik < ll.back() - 1e-8 * std::abs(ll.back())) report.monotone = false;
    ll.push_back(ws.loglik);
    out.params.mu = m_step_mean(ws, problem.model());
    const VarianceStep vs = m_step_var(problem, ws, out.params, config.inner_steps, floor, config.workers);
    out.params.set_diag_v(vs.v);
    finish_iteration({"heterogeneous", it, ws.loglik, seconds_since(t0), vs.q_after - vs.q_before}, ++count);
    if (converged_now(ll, streak)) {
      report.converged = true;
      break;
    }
  }
  report.seconds = seconds_since(t_start);
  return out;
}

FitResult fit(const ImageStack& stack, const EMConfig& config, const ModelParams& init, const FitHooks& hooks) {
  const EMProblem problem(init.model, stack, so3_quadrature(config.quadrature_count, config.quadrature_seed),
                          config.workers);
  return fit(problem, config, init, hooks);
}

}  // namespace symstat
