#include "ivlreg/estimators.hpp"

#include <stdexcept>

namespace ivlreg {

namespace {

struct SolveResult {
  Eigen::VectorXd h;
  Eigen::Index rank = 0;
  double cond = 0.0;
};

// minimum-norm least squares via SVD with the max(n,m)*eps rank cutoff
SolveResult minnorm_lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(double(std::max(a.rows(), a.cols())) *
                   std::numeric_limits<double>::epsilon());
  SolveResult r;
  r.h = svd.solve(b);
  r.rank = svd.rank();
  const auto& sv = svd.singularValues();
  if (r.rank > 0) r.cond = sv(0) / sv(r.rank - 1);
  return r;
}

void check_xy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("x rows must match y length");
  if (x.rows() < 1) throw std::invalid_argument("need at least one row");
}

LinearEstimate assemble(const SolveResult& s, FitMethod method, Eigen::Index n,
                        Eigen::Index m, bool centered, const Eigen::RowVectorXd& x_mean,
                        double y_mean) {
  LinearEstimate est;
  est.h = s.h;
  est.method = method;
  est.meta.n = n;
  est.meta.rank = s.rank;
  est.meta.rank_deficient = s.rank < m;
  est.meta.cond = s.cond;
  est.meta.centered = centered;
  est.intercept = centered ? y_mean - x_mean.dot(s.h) : 0.0;
  return est;
}

}  // namespace

std::string fit_method_name(FitMethod m) {
  switch (m) {
    case FitMethod::null_model: return "null";
    case FitMethod::ols: return "ols";
    case FitMethod::tsls: return "2sls";
    case FitMethod::ivl: return "ivl";
  }
  return "?";
}

LinearEstimate fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool center) {
  check_xy(x, y);
  const Eigen::Index n = x.rows(), m = x.cols();
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(m);
  double y_mean = 0.0;
  Eigen::MatrixXd xc = x;
  Eigen::VectorXd yc = y;
  if (center) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
    xc.rowwise() -= x_mean;
    yc.array() -= y_mean;
  }
  return assemble(minnorm_lstsq(xc, yc), FitMethod::ols, n, m, center, x_mean, y_mean);
}

Eigen::MatrixXd conditional_projection(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v) {
  if (z.rows() != v.rows()) throw std::invalid_argument("z and v row counts differ");
  if (z.cols() == 0) return Eigen::MatrixXd::Zero(v.rows(), v.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU);
  svd.setThreshold(double(std::max(z.rows(), z.cols())) *
                   std::numeric_limits<double>::epsilon());
  const Eigen::Index r = svd.rank();
  if (r == 0) return Eigen::MatrixXd::Zero(v.rows(), v.cols());
  const auto u = svd.matrixU().leftCols(r);
  return u * (u.transpose() * v);
}

LinearEstimate fit_2sls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::MatrixXd& z, bool center) {
  check_xy(x, y);
  if (z.rows() != x.rows()) throw std::invalid_argument("z rows must match x rows");
  const Eigen::Index n = x.rows(), m = x.cols();
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(m);
  double y_mean = 0.0;
  Eigen::MatrixXd xc = x, zc = z;
  Eigen::VectorXd yc = y;
  if (center) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
    xc.rowwise() -= x_mean;
    yc.array() -= y_mean;
    zc.rowwise() -= z.colwise().mean();
  }
  const Eigen::MatrixXd x_hat = conditional_projection(zc, xc);
  auto est = assemble(minnorm_lstsq(x_hat, yc), FitMethod::tsls, n, m, center, x_mean, y_mean);
  return est;
}

IvlSolver::IvlSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& z, bool center) {
  check_xy(x, y);
  if (z.rows() != x.rows()) throw std::invalid_argument("z rows must match x rows");
  n_ = x.rows();
  centered_ = center;
  x_mean_ = Eigen::RowVectorXd::Zero(x.cols());
  xc_ = x;
  yc_ = y;
  Eigen::MatrixXd zc = z;
  if (center) {
    x_mean_ = x.colwise().mean();
    y_mean_ = y.mean();
    xc_.rowwise() -= x_mean_;
    yc_.array() -= y_mean_;
    zc.rowwise() -= z.colwise().mean();
  }
  pxc_ = conditional_projection(zc, xc_);
  pyc_ = conditional_projection(zc, yc_);
}

LinearEstimate IvlSolver::fit(double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const double a = std::sqrt(alpha);
  const double b = std::sqrt(1.0 + alpha) - a;
  const Eigen::MatrixXd xp = a * xc_ + b * pxc_;
  const Eigen::VectorXd yp = a * yc_ + b * pyc_;
  auto est = assemble(minnorm_lstsq(xp, yp), FitMethod::ivl, n_, xc_.cols(), centered_,
                      x_mean_, y_mean_);
  est.alpha = alpha;
  return est;
}

LinearEstimate fit_ivl(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& z, double alpha, bool center) {
  return IvlSolver(x, y, z, center).fit(alpha);
}

double gmm_iv_risk(const Eigen::VectorXd& h, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
  if (h.size() != x.cols()) throw std::invalid_argument("h length must match x cols");
  check_xy(x, y);
  const Eigen::VectorXd r = y - x * h;
  return conditional_projection(z, r).squaredNorm() / double(x.rows());
}

LinearEstimate null_predictor(const Eigen::VectorXd& y, Eigen::Index m) {
  if (y.size() < 1) throw std::invalid_argument("need at least one row");
  LinearEstimate est;
  est.h = Eigen::VectorXd::Zero(m);
  est.intercept = y.mean();
  est.method = FitMethod::null_model;
  est.meta.n = y.size();
  est.meta.rank = 0;
  est.meta.rank_deficient = m > 0;
  est.meta.centered = true;
  return est;
}

Eigen::VectorXd predict(const LinearEstimate& est, const Eigen::MatrixXd& x) {
  if (x.cols() != est.h.size()) throw std::invalid_argument("x cols must match h length");
  return (x * est.h).array() + est.intercept;
}

Eigen::Index poly_feature_count(Eigen::Index m, int degree) {
  // C(m + degree, degree) - 1 without overflow for sane sizes
  double count = 1.0;
  for (int i = 1; i <= degree; ++i) count = count * double(m + i) / double(i);
  return Eigen::Index(std::llround(count)) - 1;
}

namespace {

void enumerate_exponents(Eigen::Index m, int degree,
                         std::vector<int>& current,
                         std::vector<std::vector<int>>& out, Eigen::Index pos) {
  if (pos == m - 1) {
    current[size_t(pos)] = degree;
    out.push_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[size_t(pos)] = e;
    enumerate_exponents(m, degree - e, current, out, pos + 1);
  }
}

}  // namespace

Eigen::MatrixXd poly_features(const Eigen::MatrixXd& x, int degree) {
  if (degree < 1) throw std::invalid_argument("degree must be >= 1");
  const Eigen::Index n = x.rows(), m = x.cols();
  if (m < 1) throw std::invalid_argument("x must have at least one column");

  std::vector<std::vector<int>> exponents;
  std::vector<int> current(size_t(m), 0);
  for (int d = 1; d <= degree; ++d) enumerate_exponents(m, d, current, exponents, 0);

  Eigen::MatrixXd out(n, Eigen::Index(exponents.size()));
  Eigen::VectorXd col(n);
  for (size_t j = 0; j < exponents.size(); ++j) {
    col.setOnes();
    for (Eigen::Index v = 0; v < m; ++v) {
      for (int e = 0; e < exponents[j][size_t(v)]; ++e)
        col.array() *= x.col(v).array();
    }
    out.col(Eigen::Index(j)) = col;
  }
  return out;
}

RiskReport risk_report(const LinearEstimate& est, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
  RiskReport rep;
  const double n = double(x.rows());
  const Eigen::VectorXd fitted = predict(est, x);
  rep.erm = (y - fitted).squaredNorm() / n;
  if (z.cols() > 0) {
    rep.gmm = conditional_projection(z, Eigen::MatrixXd(y - fitted)).squaredNorm() / n;
    rep.iv = (y - conditional_projection(z, fitted)).squaredNorm() / n;
    if (std::isfinite(est.alpha)) rep.ivl = rep.gmm + est.alpha * rep.erm;
  }
  return rep;
}

}  // namespace ivlreg
