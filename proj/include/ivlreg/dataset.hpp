#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace ivlreg {

// Role of the z block: structural instrument columns, or the drawn
// augmentation parameters. A metadata flag only, the numeric layout is the
// same either way.
enum class ZRole { none, instrument, da_params };

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::uint64_t spec_hash = 0;
  ZRole z_role = ZRole::none;
  bool centered = false;
  std::string note;
};

// Column-major numeric table: features x (n rows, m cols), outcome y,
// optional z block (instruments or augmentation parameters) and optional
// observed-confounder block c. Empty blocks have zero columns.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::MatrixXd z;
  Eigen::MatrixXd c;
  DatasetMeta meta;

  Eigen::Index rows() const { return x.rows(); }
};

// %.17g, enough digits that parse(format(v)) == v exactly. NaN maps to the
// empty string and back.
std::string format_double(double v);
double parse_double(const std::string& s);

// Header layout: x_0..x_{m-1},y[,z_0..][,c_0..]. Values are written with
// format_double so a write/read round trip is bit exact.
void write_dataset_csv(const Dataset& d, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ivlreg
