#include "ivlreg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ivlreg {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::nan("");
  return std::strtod(s.c_str(), nullptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
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

// counts columns named prefix_0, prefix_1, ... starting at position pos
int count_block(const std::vector<std::string>& header, size_t pos, const char* prefix) {
  int count = 0;
  for (size_t i = pos; i < header.size(); ++i) {
    std::string want = std::string(prefix) + "_" + std::to_string(count);
    if (header[i] != want) break;
    ++count;
  }
  return count;
}

}  // namespace

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  const Eigen::Index n = d.rows(), m = d.x.cols(), k = d.z.cols(), q = d.c.cols();
  for (Eigen::Index j = 0; j < m; ++j) out << "x_" << j << ",";
  out << "y";
  for (Eigen::Index j = 0; j < k; ++j) out << ",z_" << j;
  for (Eigen::Index j = 0; j < q; ++j) out << ",c_" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out << format_double(d.x(i, j)) << ",";
    out << format_double(d.y(i));
    for (Eigen::Index j = 0; j < k; ++j) out << "," << format_double(d.z(i, j));
    for (Eigen::Index j = 0; j < q; ++j) out << "," << format_double(d.c(i, j));
    out << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  const auto header = split_line(line);

  const int m = count_block(header, 0, "x");
  if (m == 0 || header.size() <= size_t(m) || header[m] != "y")
    throw std::runtime_error("csv header must be x_0..x_{m-1},y[,z_*][,c_*]: " + path);
  const int k = count_block(header, size_t(m) + 1, "z");
  const int q = count_block(header, size_t(m) + 1 + k, "c");
  if (header.size() != size_t(m) + 1 + k + q)
    throw std::runtime_error("unrecognized csv columns in " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv row width mismatch in " + path);
    std::vector<double> row(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) row[i] = parse_double(cells[i]);
    rows.push_back(std::move(row));
  }

  Dataset d;
  const Eigen::Index n = Eigen::Index(rows.size());
  d.x.resize(n, m);
  d.y.resize(n);
  d.z.resize(n, k);
  d.c.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[size_t(i)];
    for (int j = 0; j < m; ++j) d.x(i, j) = row[size_t(j)];
    d.y(i) = row[size_t(m)];
    for (int j = 0; j < k; ++j) d.z(i, j) = row[size_t(m) + 1 + j];
    for (int j = 0; j < q; ++j) d.c(i, j) = row[size_t(m) + 1 + k + j];
  }
  return d;
}

}  // namespace ivlreg
