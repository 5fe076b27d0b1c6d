#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symstat/imaging.hpp"
#include "symstat/model.hpp"

namespace symstat {

enum class EstimationMode { Asymmetric, SymParticles, SymStatistics };

/// "asym", "sym-particles", "sym-statistics".
std::string to_string(EstimationMode mode);
EstimationMode mode_from_string(const std::string& text);
/// Irreps used by a mode: {0} for SymParticles, all for SymStatistics and,
/// on the trivial group, Asymmetric.
std::vector<int> mode_p_set(EstimationMode mode, const PointGroup& group);
/// Throws InvalidArgument if the model's group or p_set disagree with the mode.
void check_mode(EstimationMode mode, const SignalModel& model);

struct EMConfig {
  EstimationMode mode = EstimationMode::SymStatistics;
  int quadrature_count = 300;
  std::uint64_t quadrature_seed = 0;
  int max_iterations = 200;
  int homogeneous_max_iterations = 200;
  bool homogeneous_stage = true;
  int inner_steps = 8;
  double tolerance = 1e-6;
  int patience = 3;
  /// Lower bound on v; 0 picks 1e-8 * median of the starting v.
  double v_floor = 0.0;
  int workers = 1;
};

/// Data and operator products that stay fixed through EM:
///   A_k = L_k^T L_k, B_k = L_k^T Y, yy_i = |y_i|^2, one k per abscissa.
class EMProblem {
 public:
  EMProblem(std::shared_ptr<const SignalModel> model, const ImageStack& stack, SO3Quadrature quadrature,
            int workers = 1);
  /// Explicit operators (tests); ops[k] is 2P x N_c and y is 2P x N_v.
  EMProblem(std::shared_ptr<const SignalModel> model, const std::vector<Eigen::MatrixXd>& ops,
            const Eigen::MatrixXd& y, double sigma2, std::vector<double> weights);

  const SignalModel& model() const { return *model_; }
  std::shared_ptr<const SignalModel> model_ptr() const { return model_; }
  int abscissas() const { return static_cast<int>(a_.size()); }
  int images() const { return static_cast<int>(yy_.size()); }
  int n_c() const { return model_->index.n_c(); }
  /// Real dimension of one image.
  int rows() const { return rows_; }
  double sigma2() const { return sigma2_; }
  double log_weight(int k) const { return log_w_.at(k); }
  const Eigen::MatrixXd& a(int k) const { return a_.at(k); }
  const Eigen::MatrixXd& b(int k) const { return b_.at(k); }
  const Eigen::VectorXd& yy() const { return yy_; }

 private:
  std::shared_ptr<const SignalModel> model_;
  int rows_ = 0;
  double sigma2_ = 0.0;
  std::vector<double> log_w_;
  std::vector<Eigen::MatrixXd> a_;
  std::vector<Eigen::MatrixXd> b_;
  Eigen::VectorXd yy_;
};

/// Per-abscissa Woodbury factors for diagonal V = S^2:
///   K = sigma^2 I + S A S,
///   Sigma^{-1} = sigma^{-2} (I - L S K^{-1} S L^T),
///   logdet Sigma = (n - N_c) log sigma^2 + logdet K.
struct WoodburyFactor {
  Eigen::VectorXd s;
  Eigen::LLT<Eigen::MatrixXd> k;
  double logdet_k = 0.0;
};
WoodburyFactor woodbury_factor(const Eigen::MatrixXd& a, const Eigen::VectorXd& var_diag, double sigma2);
/// Dense Sigma^{-1} through the identity above (tests; small images only).
Eigen::MatrixXd woodbury_inverse(const Eigen::MatrixXd& op, const Eigen::VectorXd& var_diag, double sigma2);
double woodbury_logdet(const Eigen::MatrixXd& op, const Eigen::VectorXd& var_diag, double sigma2);

struct EMWorkspace {
  Eigen::MatrixXd posterior;    // N_v x K, rows sum to 1
  Eigen::MatrixXd loglik_terms; // log N(y_i; L_k c, Sigma_k)
  double loglik = 0.0;          // sum_i log sum_k w_k N(.)
  Eigen::MatrixXd f;            // sum_k W_k L^T Sigma^{-1} L
  Eigen::VectorXd g;            // sum_k L^T Sigma^{-1} Y w_k
  // Sufficient statistics for the variance step.
  std::vector<double> w_sum;            // W_k
  std::vector<Eigen::VectorXd> bw;      // B_k w_k
  std::vector<Eigen::MatrixXd> bb;      // B_k diag(w_k) B_k^T
  std::vector<double> yyw;              // sum_i w_ik yy_i
};

/// Throws NumericalFailure if some K_k is not positive definite.
EMWorkspace e_step(const EMProblem& problem, const ModelParams& params, int workers = 1);

/// Solves F c = g on the p = 0 entries with a Tikhonov floor of
/// 1e-10 tr(F)/N_c. Returns the new mu. Throws SingularSystem.
Eigen::VectorXd m_step_mean(const EMWorkspace& ws, const SignalModel& model);

/// Q(v) for the variance step at fixed posterior and mean:
///   Q = sum_i sum_k w_ik log N(y_i; L_k c, L_k V(v) L_k^T + sigma^2 I).
class VarianceObjective {
 public:
  VarianceObjective(const EMProblem& problem, const EMWorkspace& ws, const Eigen::VectorXd& mean,
                    int workers = 1);

  /// v holds one value per coefficient block (length N_vec).
  double value(const Eigen::VectorXd& v) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const;
  /// Gradient and the diagonal of the expected Fisher information.
  void gradient_and_curvature(const Eigen::VectorXd& v, Eigen::VectorXd& grad, Eigen::VectorXd& curv) const;

 private:
  Eigen::VectorXd expand(const Eigen::VectorXd& v) const;

  const EMProblem& problem_;
  const EMWorkspace& ws_;
  int workers_;
  std::vector<int> active_;             // abscissas with W_k > 0
  std::vector<Eigen::MatrixXd> m_;      // sum_i w_ik (b_ik - A c)(b_ik - A c)^T
  std::vector<double> e_;               // sum_i w_ik |y_i - L_k c|^2
};

struct VarianceStep {
  Eigen::VectorXd v;
  double q_before = 0.0;
  double q_after = 0.0;
  int steps = 0;
  bool ascent_failed = false;
};

/// Projected, Fisher-scaled gradient ascent with backtracking over v >= floor.
/// Never returns a point with lower Q than the start.
VarianceStep m_step_var(const EMProblem& problem, const EMWorkspace& ws, const ModelParams& params,
                        int inner_steps, double floor, int workers = 1);

/// l = 0 least-squares start: the orientation-averaged image against the
/// l = 0 operator columns. v is set to 1e-4 of the mean squared mu.
/// Throws SingularSystem if the l = 0 columns are rank deficient.
ModelParams init_spherical(const ImageStack& stack, std::shared_ptr<const SignalModel> model);

struct IterationRecord {
  std::string stage;  // "homogeneous" or "heterogeneous"
  int iteration = 0;
  double loglik = 0.0;
  double seconds = 0.0;
  double q_gain = 0.0;
};

struct RunReport {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool homogeneous_converged = false;
  bool monotone = true;
  double v_floor = 0.0;
  double seconds = 0.0;
};

struct FitHooks {
  int checkpoint_every = 0;
  std::function<void(const ModelParams&, const RunReport&)> checkpoint;
  std::function<void(const IterationRecord&)> on_iteration;
  const std::atomic<bool>* interrupt = nullptr;
};

struct FitResult {
  ModelParams params;
  RunReport report;
};

/// Homogeneous stage (v pinned at the floor, mean-only updates) followed
/// by the heterogeneous stage. Throws Interrupted after a final checkpoint
/// when the interrupt flag is raised.
FitResult fit(const EMProblem& problem, const EMConfig& config, const ModelParams& init, const FitHooks& hooks = {});

/// Convenience overload building the quadrature and the problem.
FitResult fit(const ImageStack& stack, const EMConfig& config, const ModelParams& init, const FitHooks& hooks = {});

}  // namespace symstat
