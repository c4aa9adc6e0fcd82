#include "ivlreg/model_selection.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "ivlreg/estimators.hpp"
#include "ivlreg/rng.hpp"

namespace ivlreg {

AlphaGrid AlphaGrid::log_space(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("need 0 < lo <= hi");
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  AlphaGrid g;
  g.values.reserve(size_t(count));
  if (count == 1) {
    g.values.push_back(lo);
    return g;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g.values.push_back(std::exp(llo + (lhi - llo) * double(i) / double(count - 1)));
  return g;
}

AlphaGrid AlphaGrid::default_grid() { return log_space(1e-4, 1.0, 32); }

namespace {

void check_grid(const AlphaGrid& grid) {
  if (grid.values.empty()) throw std::invalid_argument("alpha grid is empty");
  for (double a : grid.values)
    if (!(a > 0.0)) throw std::invalid_argument("alpha grid values must be > 0");
}

// ascending scan with strict improvement keeps the smallest alpha on ties
size_t argmin_tie_low(const AlphaGrid& grid, const std::vector<double>& scores) {
  std::vector<size_t> order(grid.values.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return grid.values[a] < grid.values[b]; });
  size_t best = order[0];
  for (size_t idx : order)
    if (scores[idx] < scores[best]) best = idx;
  return best;
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  for (Eigen::Index i = n - 1; i > 0; --i)
    std::swap(idx[size_t(i)], idx[size_t(rng.below(std::uint64_t(i) + 1))]);
  return idx;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(Eigen::Index(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(Eigen::Index(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) out(Eigen::Index(i)) = v(rows[i]);
  return out;
}

double holdout_mse(const IvlSolver& solver, double alpha,
                   const Eigen::MatrixXd& x_hold, const Eigen::VectorXd& y_hold) {
  const LinearEstimate est = solver.fit(alpha);
  return (y_hold - predict(est, x_hold)).squaredNorm() / double(y_hold.size());
}

// scores rows split into train/holdout by explicit index sets
std::vector<double> split_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::MatrixXd& z, const AlphaGrid& grid,
                                 const std::vector<Eigen::Index>& train,
                                 const std::vector<Eigen::Index>& hold) {
  const IvlSolver solver(take_rows(x, train), take_rows(y, train), take_rows(z, train));
  const Eigen::MatrixXd xh = take_rows(x, hold);
  const Eigen::VectorXd yh = take_rows(y, hold);
  std::vector<double> scores;
  scores.reserve(grid.values.size());
  for (double a : grid.values) scores.push_back(holdout_mse(solver, a, xh, yh));
  return scores;
}

}  // namespace

SelectionResult select_alpha_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& z, const AlphaGrid& grid,
                                double holdout_frac, std::uint64_t seed, int n_folds) {
  check_grid(grid);
  const Eigen::Index n = x.rows();
  if (n < 10) throw std::invalid_argument("cv needs n >= 10");
  if (!(holdout_frac > 0.0) || !(holdout_frac < 1.0))
    throw std::invalid_argument("holdout_frac must be in (0, 1)");
  if (n_folds < 1) throw std::invalid_argument("n_folds must be >= 1");

  Rng rng(seed);
  const auto idx = shuffled_indices(n, rng);
  std::vector<double> scores(grid.values.size(), 0.0);

  if (n_folds == 1) {
    Eigen::Index n_hold = Eigen::Index(std::llround(holdout_frac * double(n)));
    n_hold = std::clamp<Eigen::Index>(n_hold, 1, n - 1);
    const std::vector<Eigen::Index> hold(idx.begin(), idx.begin() + n_hold);
    const std::vector<Eigen::Index> train(idx.begin() + n_hold, idx.end());
    scores = split_scores(x, y, z, grid, train, hold);
  } else {
    for (int f = 0; f < n_folds; ++f) {
      std::vector<Eigen::Index> hold, train;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (int(i % n_folds) == f) hold.push_back(idx[size_t(i)]);
        else train.push_back(idx[size_t(i)]);
      }
      const auto fold = split_scores(x, y, z, grid, train, hold);
      for (size_t j = 0; j < scores.size(); ++j) scores[j] += fold[j] / double(n_folds);
    }
  }

  SelectionResult res;
  res.scores = scores;
  res.chosen_alpha = grid.values[argmin_tie_low(grid, scores)];
  res.strategy = "cv";
  res.seed = seed;
  return res;
}

SelectionResult select_alpha_lcv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::MatrixXd& g, const AlphaGrid& grid,
                                 double level_frac, int bins, std::uint64_t seed) {
  check_grid(grid);
  if (bins < 2) throw std::invalid_argument("bins must be >= 2");
  if (!(level_frac > 0.0) || !(level_frac < 1.0))
    throw std::invalid_argument("level_frac must be in (0, 1)");
  const Eigen::Index n = x.rows();
  if (g.rows() != n) throw std::invalid_argument("g rows must match x rows");
  if (g.cols() < 1) throw std::invalid_argument("g must have at least one column");

  // uniform-quantile bin edges per column
  std::vector<std::vector<double>> edges(size_t(g.cols()));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    std::vector<double> col(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) col[size_t(i)] = g(i, j);
    std::sort(col.begin(), col.end());
    for (int b = 1; b < bins; ++b)
      edges[size_t(j)].push_back(col[size_t((Eigen::Index(b) * n) / bins)]);
  }

  std::vector<std::vector<int>> patterns(size_t(n), std::vector<int>(size_t(g.cols())));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const auto& ed = edges[size_t(j)];
      patterns[size_t(i)][size_t(j)] =
          int(std::upper_bound(ed.begin(), ed.end(), g(i, j)) - ed.begin());
    }

  // level ids in lexicographic pattern order, deterministic
  std::map<std::vector<int>, int> level_of;
  for (const auto& p : patterns) level_of.emplace(p, 0);
  int next_id = 0;
  for (auto& kv : level_of) kv.second = next_id++;
  const int n_levels = next_id;
  if (n_levels < 2) throw std::invalid_argument("lcv needs >= 2 distinct g levels");

  Rng rng(seed);
  std::vector<Eigen::Index> level_order(static_cast<size_t>(n_levels));
  std::iota(level_order.begin(), level_order.end(), Eigen::Index(0));
  for (Eigen::Index i = Eigen::Index(n_levels) - 1; i > 0; --i)
    std::swap(level_order[size_t(i)], level_order[size_t(rng.below(std::uint64_t(i) + 1))]);
  Eigen::Index n_hold_levels = Eigen::Index(std::ceil(level_frac * double(n_levels)));
  n_hold_levels = std::clamp<Eigen::Index>(n_hold_levels, 1, Eigen::Index(n_levels) - 1);
  std::vector<bool> held(size_t(n_levels), false);
  for (Eigen::Index i = 0; i < n_hold_levels; ++i) held[size_t(level_order[size_t(i)])] = true;

  std::vector<Eigen::Index> train, hold;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int lvl = level_of.find(patterns[size_t(i)])->second;
    (held[size_t(lvl)] ? hold : train).push_back(i);
  }

  SelectionResult res;
  res.scores = split_scores(x, y, g, grid, train, hold);
  res.chosen_alpha = grid.values[argmin_tie_low(grid, res.scores)];
  res.strategy = "lcv";
  res.seed = seed;
  return res;
}

SelectionResult select_alpha_cc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& z, const AlphaGrid& grid,
                                double target_norm) {
  check_grid(grid);
  if (!(target_norm >= 0.0)) throw std::invalid_argument("target_norm must be >= 0");
  const IvlSolver solver(x, y, z);
  SelectionResult res;
  res.scores.reserve(grid.values.size());
  for (double a : grid.values)
    res.scores.push_back(std::abs(solver.fit(a).h.norm() - target_norm));
  res.chosen_alpha = grid.values[argmin_tie_low(grid, res.scores)];
  res.strategy = "cc";
  return res;
}

}  // namespace ivlreg
