#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ivlreg {

enum class CerNorm { euclidean, weighted };

// Scoring context: the generating coefficients and, for the weighted norm,
// the feature covariance.
struct EvalConfig {
  Eigen::VectorXd truth_f;
  CerNorm norm = CerNorm::euclidean;
  Eigen::MatrixXd sigma_x;  // required for weighted
};

// Causal excess risk of coefficients h: squared distance to the generating
// coefficients, either plain euclidean or sigma_x-weighted.
double cer(const Eigen::VectorXd& h, const EvalConfig& cfg);

// cer(h) / (cer(h) + cer(h0)), in [0, 1]; 0/0 maps to 0. h0 is conventionally
// the zero predictor, making 1/2 the "no better than predicting the mean"
// line.
double ncer(const Eigen::VectorXd& h, const Eigen::VectorXd& h0, const EvalConfig& cfg);

// One method evaluation at one sweep coordinate. alpha is the swept or
// configured coordinate (NaN when the sweep has no alpha axis); per-trial
// selected alphas are harness metadata, not coordinates. NaN cer/ncer marks
// a failed trial.
struct TrialRecord {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string method;
  double cer = std::numeric_limits<double>::quiet_NaN();
  double ncer = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateRecord {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::int64_t n = 0;
  std::string method;
  double mean_ncer = std::numeric_limits<double>::quiet_NaN();
  double stderr_ncer = 0.0;
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::int64_t trials = 0;
};

// Groups by (kappa, gamma, alpha, n, method), ignoring seed, and reports
// mean ncer with a 1.96 * stderr normal CI. Failed trials (NaN ncer) are
// dropped from the group; `trials` counts what remained, and a group whose
// trials all failed is omitted. Output order is sorted by the group key
// (NaN coordinates sort last), independent of input order.
std::vector<AggregateRecord> aggregate(const std::vector<TrialRecord>& records);

// CSV forms. Values use round-trippable formatting, NaN serializes as the
// empty field. parse(emit(rows)) reproduces the rows exactly.
extern const char* kTrialCsvHeader;      // kappa,gamma,alpha,n,seed,method,cer,ncer
extern const char* kAggregateCsvHeader;  // kappa,...,method,mean_ncer,stderr,ci_low,ci_high,trials
void write_trial_csv(const std::string& path, const std::vector<TrialRecord>& rows);
std::vector<TrialRecord> read_trial_csv(const std::string& path);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRecord>& rows);
std::vector<AggregateRecord> read_aggregate_csv(const std::string& path);

}  // namespace ivlreg
