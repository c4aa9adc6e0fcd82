#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>

namespace ivlreg {

enum class FitMethod { null_model, ols, tsls, ivl };

std::string fit_method_name(FitMethod m);

struct FitMeta {
  Eigen::Index n = 0;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
  double cond = 0.0;  // ratio of largest to smallest retained singular value
  bool centered = true;
};

struct LinearEstimate {
  Eigen::VectorXd h;
  double intercept = 0.0;
  FitMethod method = FitMethod::null_model;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  FitMeta meta;
};

// Minimum-norm least squares throughout: singular values below
// max(n, m) * eps relative to the largest are treated as zero, so
// rank-deficient designs get the smallest-norm minimizer instead of noise.

// When center is set, x and y are mean-centered before solving and the
// intercept is reported separately; predictions add it back.
LinearEstimate fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool center = true);

// Orthogonal projection of each column of v onto the column space of z
// (empirical conditional expectation given z). Zero-width z projects to 0.
Eigen::MatrixXd conditional_projection(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v);

// Regression of y on the z-projection of x (two-stage least squares).
LinearEstimate fit_2sls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::MatrixXd& z, bool center = true);

// Interpolated instrumental regression: OLS on the transformed pair
//   x' = a x + b Pz x,  y' = a y + b Pz y,  a = sqrt(alpha),
//   b = sqrt(1 + alpha) - sqrt(alpha),
// which solves (alpha X'X + (PzX)'(PzX)) h = alpha X'y + (PzX)'y. Large
// alpha recovers fit_ols, alpha -> 0 recovers fit_2sls. alpha must be > 0.
LinearEstimate fit_ivl(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& z, double alpha, bool center = true);

// Precomputes the centered blocks and their z-projections once so a whole
// alpha path costs one projection plus a solve per alpha. fit(alpha) is
// bit-identical to fit_ivl on the same inputs.
class IvlSolver {
 public:
  IvlSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
            const Eigen::MatrixXd& z, bool center = true);
  LinearEstimate fit(double alpha) const;
  Eigen::Index n() const { return n_; }

 private:
  Eigen::MatrixXd xc_, pxc_;
  Eigen::VectorXd yc_, pyc_;
  Eigen::RowVectorXd x_mean_;
  double y_mean_ = 0.0;
  Eigen::Index n_ = 0;
  bool centered_ = true;
};

// (y - x h)' Zhat Zhat^+ (y - x h) / n, the projected residual energy.
double gmm_iv_risk(const Eigen::VectorXd& h, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, const Eigen::MatrixXd& z);

// Zero coefficients, intercept = mean(y). The reference point of ncer.
LinearEstimate null_predictor(const Eigen::VectorXd& y, Eigen::Index m);

Eigen::VectorXd predict(const LinearEstimate& est, const Eigen::MatrixXd& x);

// All monomials of total degree 1..degree in graded lexicographic order
// (degree-1 block first; within a degree, exponents descend on the first
// variable). No constant column: m=2, degree=2 gives
// x1, x2, x1^2, x1*x2, x2^2.
Eigen::MatrixXd poly_features(const Eigen::MatrixXd& x, int degree);
Eigen::Index poly_feature_count(Eigen::Index m, int degree);

// Empirical risks of an estimate on a dataset. erm is the mean squared
// residual; iv replaces the fitted values by their z-projection; gmm projects
// the residual itself; ivl = gmm + alpha * erm, the objective fit_ivl
// minimizes up to an h-free term. z-free reports carry NaN in the z fields.
struct RiskReport {
  double erm = std::numeric_limits<double>::quiet_NaN();
  double iv = std::numeric_limits<double>::quiet_NaN();
  double gmm = std::numeric_limits<double>::quiet_NaN();
  double ivl = std::numeric_limits<double>::quiet_NaN();
};

RiskReport risk_report(const LinearEstimate& est, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::MatrixXd& z);

}  // namespace ivlreg
