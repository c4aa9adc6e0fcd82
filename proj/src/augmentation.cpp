#include "ivlreg/augmentation.hpp"

#include <stdexcept>

#include "ivlreg/rng.hpp"

namespace ivlreg {

namespace {

// flip columns so the first nonzero entry is positive; makes the basis a
// pure function of the input instead of SVD internals
void canonicalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double v = basis(i, j);
      if (v != 0.0) {
        if (v < 0.0) basis.col(j) = -basis.col(j);
        break;
      }
    }
  }
}

Eigen::MatrixXd g_factor(const DaOperator& da) {
  if (da.g_cov.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(da.g_cov);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd draw_g(const DaOperator& da, const Eigen::MatrixXd& lg, Rng& rng) {
  Eigen::VectorXd g(da.params());
  for (Eigen::Index j = 0; j < g.size(); ++j) g(j) = rng.normal();
  if (lg.size() > 0) g = lg * g;
  return g;
}

}  // namespace

DaOperator nullspace_basis(const Eigen::VectorXd& f) {
  const Eigen::Index m = f.size();
  if (m < 1) throw std::invalid_argument("f must be non-empty");
  DaOperator da;
  if (f.norm() == 0.0) {
    da.gamma_mat = Eigen::MatrixXd::Identity(m, m);
    return da;
  }
  // full U of the m x 1 SVD: first column spans f, the rest span null(f')
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeFullU);
  da.gamma_mat = svd.matrixU().rightCols(m - 1);
  canonicalize_signs(da.gamma_mat);
  return da;
}

DaOperator subset_basis(const DaOperator& da, double keep_prob, std::uint64_t seed) {
  if (!(keep_prob > 0.0) || keep_prob > 1.0)
    throw std::invalid_argument("keep_prob must be in (0, 1]");
  if (da.params() == 0) throw std::invalid_argument("operator has no columns to subset");
  Rng rng(seed);
  std::vector<Eigen::Index> kept;
  while (kept.empty()) {
    for (Eigen::Index j = 0; j < da.params(); ++j)
      if (rng.uniform() < keep_prob) kept.push_back(j);
  }
  DaOperator out;
  out.strength = da.strength;
  out.gamma_mat.resize(da.dim(), Eigen::Index(kept.size()));
  for (size_t j = 0; j < kept.size(); ++j) out.gamma_mat.col(Eigen::Index(j)) = da.gamma_mat.col(kept[j]);
  if (da.g_cov.size() > 0) {
    out.g_cov.resize(Eigen::Index(kept.size()), Eigen::Index(kept.size()));
    for (size_t a = 0; a < kept.size(); ++a)
      for (size_t b = 0; b < kept.size(); ++b)
        out.g_cov(Eigen::Index(a), Eigen::Index(b)) = da.g_cov(kept[a], kept[b]);
  }
  return out;
}

Dataset apply(const DaOperator& da, const Dataset& data, std::uint64_t seed, int copies) {
  if (da.dim() != data.x.cols())
    throw std::invalid_argument("da operator dimension does not match dataset features");
  if (copies < 1) throw std::invalid_argument("copies must be >= 1");
  const Eigen::Index n = data.rows();
  const Eigen::Index n_out = n * copies;
  const Eigen::MatrixXd lg = g_factor(da);

  Dataset out;
  out.x.resize(n_out, data.x.cols());
  out.y.resize(n_out);
  out.z.resize(n_out, da.params());
  out.c.resize(n_out, data.c.cols());
  out.meta = data.meta;
  out.meta.seed = seed;
  out.meta.z_role = ZRole::da_params;
  for (Eigen::Index r = 0; r < n_out; ++r) {
    const Eigen::Index i = r % n;
    Rng rng(seed_mix(seed, std::uint64_t(r)));
    const Eigen::VectorXd g = draw_g(da, lg, rng);
    out.x.row(r) = data.x.row(i) + (da.strength * (da.gamma_mat * g)).transpose();
    out.y(r) = data.y(i);
    out.z.row(r) = g.transpose();
    if (data.c.cols() > 0) out.c.row(r) = data.c.row(i);
  }
  return out;
}

DaOperator gaussian_noise_da(const Eigen::MatrixXd& x_cov, double scale) {
  if (x_cov.rows() != x_cov.cols()) throw std::invalid_argument("x_cov must be square");
  if (scale < 0.0) throw std::invalid_argument("scale must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scale * x_cov);
  Eigen::VectorXd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) < 1e-12 ? 0.0 : std::sqrt(lam(i));
  DaOperator da;
  da.gamma_mat = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return da;
}

double check_invariance(const std::function<double(const Eigen::VectorXd&)>& f_fn,
                        const DaOperator& da, const Dataset& probe, std::uint64_t seed) {
  if (da.dim() != probe.x.cols())
    throw std::invalid_argument("da operator dimension does not match probe features");
  const Eigen::MatrixXd lg = g_factor(da);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    Rng rng(seed_mix(seed, std::uint64_t(i)));
    const Eigen::VectorXd g = draw_g(da, lg, rng);
    const Eigen::VectorXd x = probe.x.row(i).transpose();
    const Eigen::VectorXd shifted = x + da.strength * (da.gamma_mat * g);
    worst = std::max(worst, std::abs(f_fn(shifted) - f_fn(x)));
  }
  return worst;
}

}  // namespace ivlreg
