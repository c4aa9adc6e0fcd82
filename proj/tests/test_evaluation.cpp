#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ivlreg/evaluation.hpp"

using namespace ivlreg;

namespace {

EvalConfig euclid(std::initializer_list<double> f) {
  EvalConfig cfg;
  cfg.truth_f.resize(Eigen::Index(f.size()));
  Eigen::Index i = 0;
  for (double v : f) cfg.truth_f(i++) = v;
  return cfg;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ivlreg_test_" + std::to_string(std::uintptr_t(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

const double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("euclidean excess risk is the squared coefficient gap") {
  const EvalConfig cfg = euclid({1.0, 0.0});
  Eigen::VectorXd h(2);
  h << 1.0, 0.5;
  CHECK(cer(h, cfg) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(cer(cfg.truth_f, cfg) == 0.0);
}

TEST_CASE("weighted excess risk uses the feature covariance") {
  EvalConfig cfg = euclid({1.0, 0.0});
  cfg.norm = CerNorm::weighted;
  cfg.sigma_x.resize(2, 2);
  cfg.sigma_x << 2.0, 0.0, 0.0, 4.0;
  Eigen::VectorXd h(2);
  h << 0.0, 1.0;
  // (h - f)' Sigma (h - f) = 2 * 1 + 4 * 1
  CHECK(cer(h, cfg) == doctest::Approx(6.0).epsilon(1e-12));
  cfg.sigma_x.resize(0, 0);
  CHECK_THROWS_AS((void)cer(h, cfg), std::invalid_argument);
}

TEST_CASE("normalized excess risk interpolates between perfect and null") {
  const EvalConfig cfg = euclid({1.0, 0.0});
  const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(2);
  CHECK(ncer(cfg.truth_f, h0, cfg) == 0.0);
  CHECK(ncer(h0, h0, cfg) == doctest::Approx(0.5));  // as bad as the null reference
  Eigen::VectorXd h(2);
  h << 1.0, 0.5;
  // 0.25 / (0.25 + 1.0)
  CHECK(ncer(h, h0, cfg) == doctest::Approx(0.2).epsilon(1e-12));
  // degenerate truth = 0 and a perfect fit: both risks vanish
  const EvalConfig zero = euclid({0.0, 0.0});
  CHECK(ncer(h0, h0, zero) == 0.0);
}

TEST_CASE("aggregation pools trials by coordinate and method") {
  std::vector<TrialRecord> rows;
  for (int t = 0; t < 25; ++t) {
    TrialRecord r;
    r.kappa = 1.0;
    r.gamma = 1.0;
    r.n = 100;
    r.seed = std::uint64_t(t);
    r.method = "erm";
    r.ncer = (t < 12) ? 0.0 : 1.0;  // 12 zeros, 13 ones
    r.cer = r.ncer;
    rows.push_back(r);
  }
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].trials == 25);
  CHECK(agg[0].mean_ncer == doctest::Approx(0.52).epsilon(1e-12));
  // sample sd of 12 zeros and 13 ones over sqrt(25)
  CHECK(agg[0].stderr_ncer == doctest::Approx(0.101980390272).epsilon(1e-9));
  CHECK(agg[0].ci_low == doctest::Approx(0.52 - 1.96 * agg[0].stderr_ncer));
  CHECK(agg[0].ci_high == doctest::Approx(0.52 + 1.96 * agg[0].stderr_ncer));
}

TEST_CASE("aggregation drops failed trials and sorts groups") {
  std::vector<TrialRecord> rows;
  TrialRecord a;
  a.kappa = 0.5;
  a.method = "erm";
  a.n = 10;
  a.ncer = 0.4;
  TrialRecord failed = a;
  failed.ncer = kNan;
  TrialRecord b = a;
  b.kappa = 0.0;
  b.ncer = 0.1;
  TrialRecord c = a;
  c.method = "da_erm";
  c.ncer = 0.3;
  rows = {a, failed, b, c};
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].kappa == 0.0);  // sorted by coordinate first
  CHECK(agg[1].kappa == 0.5);
  CHECK(agg[1].method == "da_erm");  // then by method name within a coordinate
  CHECK(agg[2].method == "erm");
  CHECK(agg[2].trials == 1);  // the nan row is gone
  CHECK(agg[2].mean_ncer == doctest::Approx(0.4));
  CHECK(agg[2].stderr_ncer == 0.0);
}

TEST_CASE("aggregation keeps nan coordinates in a stable trailing position") {
  TrialRecord swept;
  swept.kappa = 1.0;
  swept.alpha = 0.5;
  swept.method = "da_ivl";
  swept.ncer = 0.2;
  TrialRecord unswept = swept;
  unswept.alpha = kNan;
  unswept.ncer = 0.3;
  const auto agg = aggregate({unswept, swept});
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].alpha == 0.5);
  CHECK(std::isnan(agg[1].alpha));
}

TEST_CASE("trial csv round trips exactly") {
  TempDir tmp;
  std::vector<TrialRecord> rows(3);
  rows[0].kappa = 0.30000000000000004;
  rows[0].gamma = 1e-300;
  rows[0].alpha = kNan;
  rows[0].n = 2048;
  rows[0].seed = 18446744073709551615ull;
  rows[0].method = "da_ivl_cc";
  rows[0].cer = 1.0 / 3.0;
  rows[0].ncer = 0.1234567890123456789;
  rows[1].kappa = 0.0;
  rows[1].gamma = 1.0;
  rows[1].alpha = 1e4;
  rows[1].n = 1;
  rows[1].seed = 0;
  rows[1].method = "erm";
  rows[1].cer = kNan;
  rows[1].ncer = kNan;
  rows[2] = rows[0];
  rows[2].method = "da_erm";

  const std::string path = tmp.file("trials.csv");
  write_trial_csv(path, rows);
  const auto back = read_trial_csv(path);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(((back[i].kappa == rows[i].kappa) ||
           (std::isnan(back[i].kappa) && std::isnan(rows[i].kappa))));
    CHECK(((back[i].alpha == rows[i].alpha) ||
           (std::isnan(back[i].alpha) && std::isnan(rows[i].alpha))));
    CHECK(((back[i].cer == rows[i].cer) ||
           (std::isnan(back[i].cer) && std::isnan(rows[i].cer))));
    CHECK(((back[i].ncer == rows[i].ncer) ||
           (std::isnan(back[i].ncer) && std::isnan(rows[i].ncer))));
    CHECK(back[i].gamma == rows[i].gamma);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].method == rows[i].method);
  }
}

TEST_CASE("aggregate csv round trips exactly") {
  TempDir tmp;
  std::vector<AggregateRecord> rows(2);
  rows[0].kappa = 1.0;
  rows[0].gamma = 0.1;
  rows[0].alpha = kNan;
  rows[0].n = 2048;
  rows[0].method = "erm";
  rows[0].mean_ncer = 0.5199999999999999;
  rows[0].stderr_ncer = 0.10198039027185569;
  rows[0].ci_low = 0.3201184350671598;
  rows[0].ci_high = 0.71988156493284;
  rows[0].trials = 25;
  rows[1] = rows[0];
  rows[1].method = "da_ivl_cc";
  rows[1].mean_ncer = kNan;
  rows[1].trials = 0;

  const std::string path = tmp.file("agg.csv");
  write_aggregate_csv(path, rows);
  const auto back = read_aggregate_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].mean_ncer == rows[0].mean_ncer);
  CHECK(back[0].stderr_ncer == rows[0].stderr_ncer);
  CHECK(back[0].ci_low == rows[0].ci_low);
  CHECK(back[0].ci_high == rows[0].ci_high);
  CHECK(back[0].trials == 25);
  CHECK(std::isnan(back[1].mean_ncer));
  CHECK(back[1].method == "da_ivl_cc");
}

TEST_CASE("csv readers reject foreign headers") {
  TempDir tmp;
  const std::string path = tmp.file("bad.csv");
  {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    REQUIRE(fp != nullptr);
    std::fputs("a,b,c\n1,2,3\n", fp);
    std::fclose(fp);
  }
  CHECK_THROWS((void)read_trial_csv(path));
  CHECK_THROWS((void)read_aggregate_csv(path));
}

TEST_CASE("length mismatches in scoring are rejected") {
  const EvalConfig cfg = euclid({1.0, 2.0, 3.0});
  Eigen::VectorXd h(2);
  h << 1.0, 2.0;
  CHECK_THROWS_AS((void)cer(h, cfg), std::invalid_argument);
}
