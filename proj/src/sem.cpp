#include "ivlreg/sem.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ivlreg/rng.hpp"

namespace ivlreg {

SemSpec SemSpec::dims(int m, int k, int q) {
  SemSpec s;
  s.m = m;
  s.k = k;
  s.q = q;
  s.tau = Eigen::VectorXd::Zero(m);
  s.f = Eigen::VectorXd::Zero(m);
  s.gamma_mat = Eigen::MatrixXd::Zero(m, k);
  s.conf_x = Eigen::MatrixXd::Zero(m, q);
  s.conf_y = Eigen::VectorXd::Zero(q);
  return s;
}

namespace {

bool check_cov(const Eigen::MatrixXd& cov, int want, const char* name,
               std::vector<std::string>& errors) {
  if (cov.size() == 0) return true;  // identity
  if (cov.rows() != want || cov.cols() != want) {
    errors.push_back(std::string(name) + " covariance has wrong shape");
    return false;
  }
  if (!cov.isApprox(cov.transpose(), 1e-12)) {
    errors.push_back(std::string(name) + " covariance is not symmetric");
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    errors.push_back(std::string(name) + " covariance is not positive semidefinite");
    return false;
  }
  return true;
}

// symmetric PSD square root, tiny negative eigenvalues clamped
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

struct ExoFactors {
  Eigen::MatrixXd lz;  // empty = identity
  Eigen::MatrixXd lc;
};

ExoFactors exo_factors(const SemSpec& spec) {
  ExoFactors fac;
  if (spec.exo_cov_z.size() > 0) fac.lz = psd_factor(spec.exo_cov_z);
  if (spec.exo_cov_c.size() > 0) fac.lc = psd_factor(spec.exo_cov_c);
  return fac;
}

// fixed draw order z, c, n_x, n_y; one stream per row
ExogenousDraw draw_row(const SemSpec& spec, const ExoFactors& fac,
                       std::uint64_t seed, std::uint64_t row) {
  Rng rng(seed_mix(seed, row));
  ExogenousDraw d;
  d.z.resize(spec.k);
  for (int j = 0; j < spec.k; ++j) d.z(j) = rng.normal();
  if (fac.lz.size() > 0) d.z = fac.lz * d.z;
  d.c.resize(spec.q);
  for (int j = 0; j < spec.q; ++j) d.c(j) = rng.normal();
  if (fac.lc.size() > 0) d.c = fac.lc * d.c;
  d.n_x.resize(spec.m);
  for (int j = 0; j < spec.m; ++j) d.n_x(j) = rng.normal();
  d.n_y = rng.normal();
  return d;
}

void require_valid(const SemSpec& spec, bool need_stable) {
  const auto rep = validate_spec(spec);
  if (!rep.ok) {
    std::string what = "invalid sem spec";
    for (const auto& e : rep.errors) what += "; " + e;
    throw std::invalid_argument(what);
  }
  if (need_stable && !rep.stable)
    throw std::invalid_argument("sem spec is not stable: |kappa * f.tau| = " +
                                std::to_string(std::abs(rep.loop_gain)));
}

Eigen::VectorXd exo_x_part(const SemSpec& spec, const ExogenousDraw& e) {
  Eigen::VectorXd u = spec.sigma * e.n_x;
  if (spec.k > 0) u += spec.gamma_mat * e.z;
  if (spec.q > 0) u += spec.conf_x * e.c;
  return u;
}

double exo_y_part(const SemSpec& spec, const ExogenousDraw& e) {
  double u = spec.sigma * e.n_y;
  if (spec.q > 0) u += spec.kappa * spec.conf_y.dot(e.c);
  return u;
}

Dataset dataset_shell(const SemSpec& spec, Eigen::Index n, std::uint64_t seed) {
  Dataset d;
  d.x.resize(n, spec.m);
  d.y.resize(n);
  d.z.resize(n, spec.k);
  d.c.resize(n, spec.q);
  d.meta.seed = seed;
  d.meta.spec_hash = spec_hash(spec);
  d.meta.z_role = spec.k > 0 ? ZRole::instrument : ZRole::none;
  return d;
}

}  // namespace

ValidationReport validate_spec(const SemSpec& spec) {
  ValidationReport rep;
  auto& errs = rep.errors;
  if (spec.m < 1) errs.push_back("m must be >= 1");
  if (spec.k < 0) errs.push_back("k must be >= 0");
  if (spec.q < 0) errs.push_back("q must be >= 0");
  if (spec.sigma < 0) errs.push_back("sigma must be >= 0");
  if (spec.kappa < 0) errs.push_back("kappa must be >= 0");
  if (spec.tau.size() != spec.m) errs.push_back("tau must have length m");
  if (spec.f.size() != spec.m) errs.push_back("f must have length m");
  if (spec.gamma_mat.rows() != spec.m || spec.gamma_mat.cols() != spec.k)
    errs.push_back("gamma_mat must be m x k");
  if (spec.conf_x.rows() != spec.m || spec.conf_x.cols() != spec.q)
    errs.push_back("conf_x must be m x q");
  if (spec.conf_y.size() != spec.q) errs.push_back("conf_y must have length q");
  if (!errs.empty()) return rep;

  check_cov(spec.exo_cov_z, spec.k, "z", errs);
  check_cov(spec.exo_cov_c, spec.q, "c", errs);

  rep.loop_gain = spec.loop_gain();
  rep.solvable = rep.loop_gain != 1.0;
  rep.stable = std::abs(rep.loop_gain) < 1.0;
  if (!rep.solvable) errs.push_back("system is not solvable: kappa * f.tau == 1");
  rep.ok = errs.empty();
  return rep;
}

Eigen::MatrixXd reduced_form_matrix(const SemSpec& spec) {
  require_valid(spec, false);
  const int m = spec.m;
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(m + 1, m + 1);
  b.block(0, m, m, 1) = -spec.kappa * spec.tau;
  b.block(m, 0, 1, m) = -spec.f.transpose();
  return b.inverse();
}

ExogenousDraw draw_exogenous(const SemSpec& spec, std::uint64_t seed, std::uint64_t row) {
  return draw_row(spec, exo_factors(spec), seed, row);
}

std::vector<ExogenousDraw> draw_exogenous_block(const SemSpec& spec, Eigen::Index n,
                                                std::uint64_t seed) {
  const auto fac = exo_factors(spec);
  std::vector<ExogenousDraw> out;
  out.reserve(size_t(n));
  for (Eigen::Index i = 0; i < n; ++i)
    out.push_back(draw_row(spec, fac, seed, std::uint64_t(i)));
  return out;
}

Dataset sample(const SemSpec& spec, Eigen::Index n, std::uint64_t seed) {
  require_valid(spec, false);
  const auto fac = exo_factors(spec);
  const Eigen::MatrixXd r = reduced_form_matrix(spec);
  Dataset d = dataset_shell(spec, n, seed);
  Eigen::VectorXd u(spec.m + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ExogenousDraw e = draw_row(spec, fac, seed, std::uint64_t(i));
    u.head(spec.m) = exo_x_part(spec, e);
    u(spec.m) = exo_y_part(spec, e);
    const Eigen::VectorXd w = r * u;
    d.x.row(i) = w.head(spec.m).transpose();
    d.y(i) = w(spec.m);
    d.z.row(i) = e.z.transpose();
    d.c.row(i) = e.c.transpose();
  }
  return d;
}

namespace {

// Sweeps x then y from the current state. The y error contracts by exactly
// rho = |kappa * f.tau| per sweep, so once successive changes drop below
// tol * (1 - rho) / rho the state is within a small multiple of tol of the
// exact simultaneous solution.
struct SweepIteration {
  double eff_tol;
  int max_iters;

  template <typename Shift>
  int run(const SemSpec& spec, const Eigen::VectorXd& ux, double uy,
          const Shift& shift, Eigen::VectorXd& x, double& y) const {
    x.setZero(spec.m);
    y = 0.0;
    Eigen::VectorXd x_new(spec.m);
    for (int it = 1; it <= max_iters; ++it) {
      x_new = ux + shift();
      if (spec.kappa != 0.0) x_new += (spec.kappa * y) * spec.tau;
      const double y_new = spec.f.dot(x_new) + uy;
      const double change = std::max((x_new - x).cwiseAbs().maxCoeff(),
                                     std::abs(y_new - y));
      x = x_new;
      y = y_new;
      if (change < eff_tol) return it;
    }
    throw std::runtime_error("fixed-point iteration did not converge within max_iters");
  }
};

SweepIteration make_sweep(const SemSpec& spec, double tol, int max_iters) {
  const double rho = std::abs(spec.loop_gain());
  double shrink = 1.0;
  if (rho > 0.5) shrink = (1.0 - rho) / rho;
  return SweepIteration{tol * shrink, max_iters};
}

}  // namespace

IterativeSample sample_iterative(const SemSpec& spec, Eigen::Index n, std::uint64_t seed,
                                 double tol, int max_iters) {
  require_valid(spec, true);
  const auto fac = exo_factors(spec);
  const auto sweep = make_sweep(spec, tol, max_iters);
  IterativeSample out;
  out.data = dataset_shell(spec, n, seed);
  Eigen::VectorXd x(spec.m);
  const Eigen::VectorXd no_shift = Eigen::VectorXd::Zero(spec.m);
  double y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const ExogenousDraw e = draw_row(spec, fac, seed, std::uint64_t(i));
    const int used = sweep.run(spec, exo_x_part(spec, e), exo_y_part(spec, e),
                               [&]() -> const Eigen::VectorXd& { return no_shift; }, x, y);
    out.max_sweeps = std::max(out.max_sweeps, used);
    out.data.x.row(i) = x.transpose();
    out.data.y(i) = y;
    out.data.z.row(i) = e.z.transpose();
    out.data.c.row(i) = e.c.transpose();
  }
  return out;
}

Dataset sample_soft_do(const SemSpec& spec, const DaOperator& da,
                       const Eigen::MatrixXd& g_draws,
                       const std::vector<ExogenousDraw>& exo,
                       double tol, int max_iters) {
  require_valid(spec, true);
  if (da.dim() != spec.m)
    throw std::invalid_argument("da operator dimension does not match spec.m");
  if (g_draws.cols() != da.params())
    throw std::invalid_argument("g_draws width does not match da.params()");
  if (g_draws.rows() != Eigen::Index(exo.size()))
    throw std::invalid_argument("g_draws rows must match exo draw count");
  const double leak = (spec.f.transpose() * da.gamma_mat).cwiseAbs().maxCoeff();
  if (leak > 1e-8 * std::max(1.0, spec.f.norm()))
    throw std::invalid_argument("da operator is not outcome-invariant for spec.f");

  const Eigen::Index n = g_draws.rows();
  const auto sweep = make_sweep(spec, tol, max_iters);
  Dataset d = dataset_shell(spec, n, 0);
  d.z.resize(n, da.params());
  d.meta.z_role = ZRole::da_params;
  Eigen::VectorXd x(spec.m), shift(spec.m);
  double y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const ExogenousDraw& e = exo[size_t(i)];
    shift = da.strength * (da.gamma_mat * g_draws.row(i).transpose());
    sweep.run(spec, exo_x_part(spec, e), exo_y_part(spec, e),
              [&]() -> const Eigen::VectorXd& { return shift; }, x, y);
    d.x.row(i) = x.transpose();
    d.y(i) = y;
    d.z.row(i) = g_draws.row(i);
    d.c.row(i) = e.c.transpose();
  }
  return d;
}

Dataset sample_hard_do(const SemSpec& spec, const Eigen::MatrixXd& x_values,
                       std::uint64_t seed) {
  require_valid(spec, false);
  if (x_values.cols() != spec.m)
    throw std::invalid_argument("x_values width must equal spec.m");
  const auto fac = exo_factors(spec);
  const Eigen::Index n = x_values.rows();
  Dataset d = dataset_shell(spec, n, seed);
  d.z.resize(n, 0);
  d.meta.z_role = ZRole::none;
  d.meta.note = "hard_do";
  for (Eigen::Index i = 0; i < n; ++i) {
    const ExogenousDraw e = draw_row(spec, fac, seed, std::uint64_t(i));
    d.x.row(i) = x_values.row(i);
    d.y(i) = spec.f.dot(x_values.row(i)) + exo_y_part(spec, e);
    d.c.row(i) = e.c.transpose();
  }
  return d;
}

std::uint64_t spec_hash(const SemSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto absorb = [&h](const void* p, size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  const int dims[3] = {spec.m, spec.k, spec.q};
  absorb(dims, sizeof(dims));
  auto absorb_mat = [&](const Eigen::MatrixXd& mat) {
    if (mat.size() > 0) absorb(mat.data(), size_t(mat.size()) * sizeof(double));
  };
  absorb_mat(spec.tau);
  absorb_mat(spec.f);
  absorb_mat(spec.gamma_mat);
  absorb_mat(spec.conf_x);
  absorb_mat(spec.conf_y);
  const double scalars[2] = {spec.sigma, spec.kappa};
  absorb(scalars, sizeof(scalars));
  absorb_mat(spec.exo_cov_z);
  absorb_mat(spec.exo_cov_c);
  return h;
}

}  // namespace ivlreg
