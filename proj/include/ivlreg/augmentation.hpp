#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "ivlreg/dataset.hpp"

namespace ivlreg {

// Additive group action on the feature vector: g acts as
//   x  ->  x + strength * gamma_mat * g,      g in R^k.
// Outcome invariance w.r.t. a coefficient vector f means
// f' * gamma_mat == 0, i.e. the action moves x only inside the null space
// of f'. g_cov is the sampling covariance of g (empty means identity).
struct DaOperator {
  Eigen::MatrixXd gamma_mat;   // m x k
  double strength = 1.0;
  Eigen::MatrixXd g_cov;       // k x k, empty = identity

  Eigen::Index dim() const { return gamma_mat.rows(); }
  Eigen::Index params() const { return gamma_mat.cols(); }
};

// Orthonormal basis of the null space of f', k = m-1 columns. Column signs
// are canonicalized (first nonzero entry positive) so the basis is a pure
// function of f.
DaOperator nullspace_basis(const Eigen::VectorXd& f);

// Keeps each column independently with probability keep_prob; redraws until
// at least one column survives. Column order is preserved, no recombination.
DaOperator subset_basis(const DaOperator& da, double keep_prob, std::uint64_t seed);

// Draws one g per output row and applies the action. The drawn g values land
// in the z block of the result (original z, if any, is discarded) and the
// meta z role flips to da_params. copies > 1 stacks that many augmented
// copies of the input rows, each with fresh g.
Dataset apply(const DaOperator& da, const Dataset& data, std::uint64_t seed, int copies = 1);

// PSD square root of x_cov * scale as the action matrix, strength 1,
// identity g_cov. Eigenvalues below 1e-12 are clamped to zero.
DaOperator gaussian_noise_da(const Eigen::MatrixXd& x_cov, double scale = 0.1);

// Max over probe rows and one drawn g per row of |f_fn(x~) - f_fn(x)|.
double check_invariance(const std::function<double(const Eigen::VectorXd&)>& f_fn,
                        const DaOperator& da, const Dataset& probe, std::uint64_t seed);

}  // namespace ivlreg
