#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ivlreg/augmentation.hpp"
#include "ivlreg/dataset.hpp"

namespace ivlreg {

// Linear Gaussian SEM with a possible feedback loop between features and
// outcome:
//
//   x = kappa * tau * y + gamma_mat * z + conf_x * c + sigma * n_x
//   y = f' x + kappa * conf_y' c + sigma * n_y
//
// z are exogenous drivers of x only (instruments when present), c are hidden
// confounders, n_x / n_y unit Gaussian noise. kappa scales both the feedback
// path and the confounding path into y; kappa = 0 gives the unconfounded
// acyclic case. The z block can also be absent (k = 0) with augmentation
// parameters attached later by a DaOperator.
struct SemSpec {
  int m = 1;  // features
  int k = 0;  // z block width
  int q = 1;  // confounder width

  Eigen::VectorXd tau;        // m, feedback loading y -> x
  Eigen::VectorXd f;          // m, causal coefficients x -> y
  Eigen::MatrixXd gamma_mat;  // m x k, z -> x
  Eigen::MatrixXd conf_x;     // m x q, c -> x
  Eigen::VectorXd conf_y;     // q, c -> y
  double sigma = 1.0;
  double kappa = 1.0;

  Eigen::MatrixXd exo_cov_z;  // k x k, empty = identity
  Eigen::MatrixXd exo_cov_c;  // q x q, empty = identity

  // zero-coefficient spec of the given shape
  static SemSpec dims(int m, int k, int q);

  // kappa * f.tau, the gain around the x/y loop
  double loop_gain() const { return kappa * f.dot(tau); }
};

struct ValidationReport {
  bool ok = false;        // shapes and covariances admissible, system solvable
  bool solvable = false;  // loop gain != 1
  bool stable = false;    // |loop gain| < 1, fixed-point iteration converges
  double loop_gain = 0.0;
  std::vector<std::string> errors;
};

ValidationReport validate_spec(const SemSpec& spec);

// Inverse of the structural matrix [[I, -kappa*tau], [-f', 1]], size
// (m+1) x (m+1). Left-multiplying the stacked exogenous contribution
// [gamma_mat*z + conf_x*c + sigma*n_x ; kappa*conf_y'c + sigma*n_y] by it
// yields the simultaneous solution (x, y).
Eigen::MatrixXd reduced_form_matrix(const SemSpec& spec);

// One row's worth of exogenous noise, drawn in the fixed order z, c, n_x,
// n_y so a seed means the same draw regardless of which sampler consumes it.
struct ExogenousDraw {
  Eigen::VectorXd z;
  Eigen::VectorXd c;
  Eigen::VectorXd n_x;
  double n_y = 0.0;
};

ExogenousDraw draw_exogenous(const SemSpec& spec, std::uint64_t seed, std::uint64_t row);
std::vector<ExogenousDraw> draw_exogenous_block(const SemSpec& spec, Eigen::Index n, std::uint64_t seed);

// n rows through the reduced form. Throws if the spec fails validation.
Dataset sample(const SemSpec& spec, Eigen::Index n, std::uint64_t seed);

// Same draws, but (x, y) obtained by sweeping the structural assignments
// (x from the previous y, then y from the fresh x) until successive states
// move less than tol in max norm. Requires a stable spec. The tolerance is
// tightened internally by the known contraction factor so the returned state
// is within tol of the exact fixed point, not merely slow-moving.
struct IterativeSample {
  Dataset data;
  int max_sweeps = 0;  // worst case over rows
};
IterativeSample sample_iterative(const SemSpec& spec, Eigen::Index n, std::uint64_t seed,
                                 double tol = 1e-10, int max_iters = 10000);

// Intervenes on the x mechanism by composing it with the DA action
// (soft intervention): every structural x update gains the constant shift
// strength * gamma_mat * g_i. Exogenous draws are supplied by the caller so
// observational and interventional runs can share them. g_draws is
// n x da.params(). Requires outcome invariance of da w.r.t. spec.f.
Dataset sample_soft_do(const SemSpec& spec, const DaOperator& da,
                       const Eigen::MatrixXd& g_draws,
                       const std::vector<ExogenousDraw>& exo,
                       double tol = 1e-10, int max_iters = 10000);

// Hard intervention do(x = x_values): y_i = f'x_i + kappa*conf_y'c_i +
// sigma*n_y,i with fresh confounder and noise draws. x_values is n x m.
Dataset sample_hard_do(const SemSpec& spec, const Eigen::MatrixXd& x_values, std::uint64_t seed);

// FNV-1a over the serialized coefficient bytes, used for dataset provenance.
std::uint64_t spec_hash(const SemSpec& spec);

}  // namespace ivlreg
