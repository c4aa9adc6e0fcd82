#include "ivlreg/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ivlreg {

namespace {

constexpr double kWidth = 860, kHeight = 520;
constexpr double kLeft = 70, kRight = 680, kTop = 44, kBottom = 460;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double coordinate(const AggregateRecord& r, const std::string& axis) {
  if (axis == "kappa") return r.kappa;
  if (axis == "gamma") return r.gamma;
  if (axis == "alpha") return r.alpha;
  throw std::invalid_argument("axis must be kappa, gamma or alpha");
}

}  // namespace

std::string render_plot(const std::vector<AggregateRecord>& records,
                        const std::string& axis, const std::string& title) {
  const bool log_x = axis == "gamma" || axis == "alpha";

  // series keyed by method, points sorted by coordinate
  std::map<std::string, std::map<double, const AggregateRecord*>> series;
  double x_min = 0, x_max = 0, y_max = 0;
  bool any = false;
  for (const auto& r : records) {
    const double c = coordinate(r, axis);
    if (!std::isfinite(c) || !std::isfinite(r.mean_ncer)) continue;
    if (log_x && !(c > 0.0)) continue;
    series[r.method][c] = &r;
    const double cx = log_x ? std::log10(c) : c;
    if (!any) {
      x_min = x_max = cx;
      any = true;
    } else {
      x_min = std::min(x_min, cx);
      x_max = std::max(x_max, cx);
    }
    y_max = std::max(y_max, std::isfinite(r.ci_high) ? r.ci_high : r.mean_ncer);
  }
  if (!any) throw std::invalid_argument("no plottable records for axis " + axis);
  if (x_max == x_min) x_max = x_min + 1.0;
  y_max = std::min(1.0, y_max * 1.12);
  if (y_max <= 0.0) y_max = 1.0;

  auto px = [&](double c) {
    const double cx = log_x ? std::log10(c) : c;
    return kLeft + (cx - x_min) / (x_max - x_min) * (kRight - kLeft);
  };
  auto py = [&](double v) {
    return kBottom - std::clamp(v, 0.0, y_max) / y_max * (kBottom - kTop);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"24\" font-family=\"sans-serif\""
        << " font-size=\"16\" text-anchor=\"middle\">" << title << "</text>\n";

  // axes
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\""
      << fmt(kRight) << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
      << fmt(kLeft) << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\"/>\n";

  // x ticks: decades when log, 6 even steps otherwise
  std::vector<double> xticks;
  if (log_x) {
    for (int d = int(std::floor(x_min)); d <= int(std::ceil(x_max)); ++d)
      if (d >= x_min - 1e-9 && d <= x_max + 1e-9) xticks.push_back(std::pow(10.0, d));
    if (xticks.empty()) xticks = {std::pow(10.0, x_min), std::pow(10.0, x_max)};
  } else {
    for (int i = 0; i <= 5; ++i) xticks.push_back(x_min + (x_max - x_min) * i / 5.0);
  }
  for (double t : xticks) {
    const double X = px(log_x ? t : t);
    svg << "<line x1=\"" << fmt(X) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(X)
        << "\" y2=\"" << fmt(kBottom + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(X) << "\" y=\"" << fmt(kBottom + 20)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << fmt_tick(t) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double Y = py(v);
    svg << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(Y) << "\" x2=\""
        << fmt(kLeft) << "\" y2=\"" << fmt(Y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 9) << "\" y=\"" << fmt(Y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
        << fmt_tick(v) << "</text>\n";
  }
  svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"" << fmt(kHeight - 14)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << axis
      << (log_x ? " (log scale)" : "") << "</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt((kTop + kBottom) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 18 " << fmt((kTop + kBottom) / 2) << ")\">mean ncer</text>\n";

  int color_idx = 0;
  double legend_y = kTop + 10;
  for (const auto& [method, points] : series) {
    const char* color = kPalette[color_idx % 8];
    ++color_idx;

    // CI band: lows left to right, highs back
    std::ostringstream band;
    bool has_band = false;
    for (const auto& [c, r] : points)
      if (std::isfinite(r->ci_low) && std::isfinite(r->ci_high)) has_band = true;
    if (has_band && points.size() > 1) {
      band << "<polygon points=\"";
      for (const auto& [c, r] : points)
        band << fmt(px(c)) << "," << fmt(py(std::isfinite(r->ci_low) ? r->ci_low : r->mean_ncer)) << " ";
      for (auto it = points.rbegin(); it != points.rend(); ++it)
        band << fmt(px(it->first)) << ","
             << fmt(py(std::isfinite(it->second->ci_high) ? it->second->ci_high
                                                          : it->second->mean_ncer))
             << " ";
      band << "\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      svg << band.str();
    }

    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [c, r] : points) svg << fmt(px(c)) << "," << fmt(py(r->mean_ncer)) << " ";
    svg << "\"/>\n";
    for (const auto& [c, r] : points)
      svg << "<circle cx=\"" << fmt(px(c)) << "\" cy=\"" << fmt(py(r->mean_ncer))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";

    svg << "<rect x=\"" << fmt(kRight + 16) << "\" y=\"" << fmt(legend_y - 9)
        << "\" width=\"18\" height=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << fmt(kRight + 40) << "\" y=\"" << fmt(legend_y)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << method << "</text>\n";
    legend_y += 20;
  }

  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<AggregateRecord>& records, const std::string& axis,
               const std::string& out_path, const std::string& title) {
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for write: " + out_path);
  out << render_plot(records, axis, title);
}

void emit_plot_from_csv(const std::string& aggregate_csv, const std::string& axis,
                        const std::string& out_path, const std::string& title) {
  emit_plot(read_aggregate_csv(aggregate_csv), axis, out_path, title);
}

}  // namespace ivlreg
