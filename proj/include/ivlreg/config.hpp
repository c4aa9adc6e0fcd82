#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivlreg/augmentation.hpp"
#include "ivlreg/evaluation.hpp"
#include "ivlreg/model_selection.hpp"
#include "ivlreg/sem.hpp"

namespace ivlreg {

// load/validation failures; the cli maps these to exit code 1
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How the augmentation operator is built each trial.
struct DaDirective {
  enum class Kind { nullspace, subset, gaussian, explicit_op };
  Kind kind = Kind::nullspace;
  double keep_prob = 1.0;  // subset
  double scale = 0.1;      // gaussian, applied to the empirical x covariance
  DaOperator op;           // explicit_op

  static DaDirective parse(const std::string& text);
  std::string str() const;
};

struct MethodSpec {
  enum class Kind { erm, da_erm, da_iv, da_ivl };
  enum class Strategy { fixed, cv, lcv, cc };
  Kind kind = Kind::erm;
  Strategy strategy = Strategy::fixed;
  // fixed alpha; NaN means "take the sweep coordinate" (alpha sweeps only)
  double alpha = std::numeric_limits<double>::quiet_NaN();

  static MethodSpec parse(const std::string& text);
  std::string label() const;  // the csv method column
};

struct SweepSpec {
  std::string axis;  // "kappa", "gamma", "alpha" or "" for a single point
  std::vector<double> values;
};

struct ExperimentConfig {
  SemSpec sem = SemSpec::dims(1, 0, 1);
  bool redraw_sem = true;  // redraw f, conf_x, conf_y per trial
  DaDirective da;
  double gamma = 1.0;  // da strength when not swept
  std::vector<MethodSpec> methods;
  SweepSpec sweep;
  std::int64_t n = 2048;
  int trials = 25;
  std::uint64_t master_seed = 1;
  AlphaGrid selection_grid = AlphaGrid::default_grid();
  CerNorm norm = CerNorm::euclidean;
  std::string out_dir = "out";
  int workers = 1;
  bool plot = true;
};

// m=32 features, sigma=0.1, kappa=1, no feedback, coefficient redraw per
// trial, full null-space augmentation, the three headline methods.
ExperimentConfig default_protocol();

// JSON persistence. Matrices are row-major nested lists; keys mirror the
// field names. Unknown keys are rejected so typos fail loudly.
ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);
std::string experiment_config_json(const ExperimentConfig& cfg);
ExperimentConfig parse_experiment_config(const std::string& json_text);

SemSpec parse_sem_spec(const std::string& json_text);
std::string sem_spec_json(const SemSpec& spec);

}  // namespace ivlreg
