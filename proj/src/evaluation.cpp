#include "ivlreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ivlreg/dataset.hpp"

namespace ivlreg {

double cer(const Eigen::VectorXd& h, const EvalConfig& cfg) {
  if (h.size() != cfg.truth_f.size())
    throw std::invalid_argument("h length must match truth_f length");
  const Eigen::VectorXd d = h - cfg.truth_f;
  if (cfg.norm == CerNorm::euclidean) return d.squaredNorm();
  if (cfg.sigma_x.rows() != h.size() || cfg.sigma_x.cols() != h.size())
    throw std::invalid_argument("weighted cer needs sigma_x of matching shape");
  return d.dot(cfg.sigma_x * d);
}

double ncer(const Eigen::VectorXd& h, const Eigen::VectorXd& h0, const EvalConfig& cfg) {
  const double ch = cer(h, cfg);
  const double c0 = cer(h0, cfg);
  const double denom = ch + c0;
  if (denom == 0.0) return 0.0;
  return ch / denom;
}

namespace {

// total order on doubles with every NaN collapsed to one value sorting last
int cmp_double(double a, double b) {
  const bool na = std::isnan(a), nb = std::isnan(b);
  if (na && nb) return 0;
  if (na) return 1;
  if (nb) return -1;
  if (a < b) return -1;
  if (a > b) return 1;
  return 0;
}

struct GroupKey {
  double kappa, gamma, alpha;
  std::int64_t n;
  std::string method;

  bool operator<(const GroupKey& o) const {
    if (int c = cmp_double(kappa, o.kappa)) return c < 0;
    if (int c = cmp_double(gamma, o.gamma)) return c < 0;
    if (int c = cmp_double(alpha, o.alpha)) return c < 0;
    if (n != o.n) return n < o.n;
    return method < o.method;
  }
};

std::string field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::ifstream open_checked(const std::string& path, const char* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != split_csv(header))
    throw std::runtime_error("unexpected csv header in " + path);
  return in;
}

}  // namespace

std::vector<AggregateRecord> aggregate(const std::vector<TrialRecord>& records) {
  std::map<GroupKey, std::vector<double>> groups;
  for (const auto& r : records) {
    auto& vals = groups[{r.kappa, r.gamma, r.alpha, r.n, r.method}];
    if (std::isfinite(r.ncer)) vals.push_back(r.ncer);
  }

  std::vector<AggregateRecord> out;
  out.reserve(groups.size());
  for (const auto& [key, vals] : groups) {
    if (vals.empty()) continue;  // every trial in the group failed
    AggregateRecord a;
    a.kappa = key.kappa;
    a.gamma = key.gamma;
    a.alpha = key.alpha;
    a.n = key.n;
    a.method = key.method;
    a.trials = std::int64_t(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= double(vals.size());
    double var = 0.0;
    if (vals.size() > 1) {
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= double(vals.size() - 1);
    }
    a.mean_ncer = mean;
    a.stderr_ncer = vals.size() > 1 ? std::sqrt(var / double(vals.size())) : 0.0;
    a.ci_low = mean - 1.96 * a.stderr_ncer;
    a.ci_high = mean + 1.96 * a.stderr_ncer;
    out.push_back(std::move(a));
  }
  return out;
}

const char* kTrialCsvHeader = "kappa,gamma,alpha,n,seed,method,cer,ncer";
const char* kAggregateCsvHeader =
    "kappa,gamma,alpha,n,method,mean_ncer,stderr,ci_low,ci_high,trials";

void write_trial_csv(const std::string& path, const std::vector<TrialRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << kTrialCsvHeader << "\n";
  for (const auto& r : rows) {
    out << field(r.kappa) << "," << field(r.gamma) << "," << field(r.alpha) << ","
        << r.n << "," << r.seed << "," << r.method << "," << field(r.cer) << ","
        << field(r.ncer) << "\n";
  }
}

std::vector<TrialRecord> read_trial_csv(const std::string& path) {
  auto in = open_checked(path, kTrialCsvHeader);
  std::vector<TrialRecord> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw std::runtime_error("bad trial row in " + path);
    TrialRecord r;
    r.kappa = parse_double(f[0]);
    r.gamma = parse_double(f[1]);
    r.alpha = parse_double(f[2]);
    r.n = std::stoll(f[3]);
    r.seed = std::stoull(f[4]);
    r.method = f[5];
    r.cer = parse_double(f[6]);
    r.ncer = parse_double(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << kAggregateCsvHeader << "\n";
  for (const auto& r : rows) {
    out << field(r.kappa) << "," << field(r.gamma) << "," << field(r.alpha) << ","
        << r.n << "," << r.method << "," << field(r.mean_ncer) << ","
        << field(r.stderr_ncer) << "," << field(r.ci_low) << "," << field(r.ci_high)
        << "," << r.trials << "\n";
  }
}

std::vector<AggregateRecord> read_aggregate_csv(const std::string& path) {
  auto in = open_checked(path, kAggregateCsvHeader);
  std::vector<AggregateRecord> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw std::runtime_error("bad aggregate row in " + path);
    AggregateRecord r;
    r.kappa = parse_double(f[0]);
    r.gamma = parse_double(f[1]);
    r.alpha = parse_double(f[2]);
    r.n = std::stoll(f[3]);
    r.method = f[4];
    r.mean_ncer = parse_double(f[5]);
    r.stderr_ncer = parse_double(f[6]);
    r.ci_low = parse_double(f[7]);
    r.ci_high = parse_double(f[8]);
    r.trials = std::stoll(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ivlreg
