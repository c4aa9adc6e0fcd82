#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ivlreg/config.hpp"
#include "ivlreg/dataset.hpp"
#include "ivlreg/evaluation.hpp"

namespace ivlreg {

// One coordinate of a sweep. alpha is NaN unless the sweep axis is alpha.
struct SweepPoint {
  double kappa = 1.0;
  double gamma = 1.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

// Seed for (master, coordinate, trial), collision-free across any sane grid;
// every trial derives its coefficient / sampling / augmentation / selection
// streams from it.
std::uint64_t trial_seed(std::uint64_t master, const SweepPoint& pt, std::int64_t n,
                         int trial);

struct SelectionRow {
  double kappa, gamma, alpha;
  std::int64_t n;
  std::uint64_t seed;
  std::string method;
  std::string strategy;
  double chosen_alpha;
  double score;
};

struct SweepOutputs {
  std::vector<TrialRecord> trials;
  std::vector<AggregateRecord> aggregates;
  std::vector<SelectionRow> selections;
};

// Runs trials x sweep coordinates x methods. Failed trials become NaN rows
// and a stderr note instead of aborting. Worker threads split whole trials;
// results land in preassigned slots, so output bytes do not depend on the
// worker count.
SweepOutputs run_sweep(const ExperimentConfig& cfg);

// results.csv, aggregate.csv, selection.csv (when non-empty), sweep.svg
// (when cfg.plot and the sweep has an axis), config_echo.json
void write_sweep_outputs(const SweepOutputs& out, const ExperimentConfig& cfg);

// One trial at the config coordinate with per-method risk reports printed in
// human-readable form; rows are also appended to `out` if non-null.
void run_single(const ExperimentConfig& cfg, std::ostream& os, SweepOutputs* out = nullptr);

extern const char* kSelectionCsvHeader;
void write_selection_csv(const std::string& path, const std::vector<SelectionRow>& rows);
std::vector<SelectionRow> read_selection_csv(const std::string& path);

// Ground-truth extraction from an observed table with an explicit confounder
// block: regress y on [poly(x, degree), c] and keep the polynomial block.
// degree 0 picks the degree from {1..5} by holdout MSE (ties to the lower
// degree), a positive degree is used as-is.
struct IngestSpec {
  std::string csv_path;
  int degree = 0;
  double holdout_frac = 0.2;
  std::uint64_t seed = 1;
};

struct IngestResult {
  Dataset data;               // x replaced by the chosen polynomial features
  Eigen::VectorXd truth;      // coefficients of the polynomial block
  int degree = 0;
  std::vector<double> degree_mse;  // holdout MSE per candidate degree (auto mode)
};

IngestResult ingest_and_extract_truth(const IngestSpec& spec);

// Discrete xor SEM demo: fits an observational conditional-mean predictor on
// a draw with colour reliability 1 - e_train and scores it against the
// interventional-mean predictor on a flipped test draw.
struct DiscreteDemoReport {
  double e_train = 0.1;
  double e_test = 0.9;
  std::int64_t n = 100000;
  double obs_accuracy = 0.0;
  double ate_accuracy = 0.0;
  int train_max_sweeps = 0;
  int test_max_sweeps = 0;
};

DiscreteDemoReport demo_discrete(double e_train, double e_test, std::int64_t n,
                                 std::uint64_t seed);

}  // namespace ivlreg
