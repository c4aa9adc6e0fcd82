#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ivlreg {

struct AlphaGrid {
  std::vector<double> values;

  // count points, log-spaced from lo to hi inclusive
  static AlphaGrid log_space(double lo, double hi, int count);
  // the selection default: 32 points on [1e-4, 1]
  static AlphaGrid default_grid();
};

struct SelectionResult {
  double chosen_alpha = 0.0;
  std::vector<double> scores;  // one per grid value, same order
  std::string strategy;
  std::uint64_t seed = 0;
};

// Holdout scoring by prediction MSE on a random split (single split by
// default, n_folds > 1 averages over a deterministic fold partition).
// Ties pick the smaller alpha. Requires n >= 10.
SelectionResult select_alpha_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& z, const AlphaGrid& grid,
                                double holdout_frac, std::uint64_t seed,
                                int n_folds = 1);

// Leave-levels-out: each g column is cut into `bins` uniform-quantile bins,
// rows sharing the joint bin pattern form a level, and a level_frac share of
// levels (at least one, never all) is held out. Requires >= 2 distinct
// levels.
SelectionResult select_alpha_lcv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::MatrixXd& g, const AlphaGrid& grid,
                                 double level_frac, int bins, std::uint64_t seed);

// Coefficient-calibration: fits the whole grid on all rows and picks the
// alpha whose coefficient norm is closest to target_norm.
SelectionResult select_alpha_cc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& z, const AlphaGrid& grid,
                                double target_norm);

}  // namespace ivlreg
