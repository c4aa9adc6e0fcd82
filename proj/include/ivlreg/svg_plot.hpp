#pragma once

#include <string>
#include <vector>

#include "ivlreg/evaluation.hpp"

namespace ivlreg {

// Renders one series per method: mean ncer against the chosen coordinate
// axis ("kappa", "gamma" or "alpha"; the latter two use a log x scale), with
// a shaded 95% CI band per series. Pure function of its inputs; identical
// records give byte-identical SVG.
std::string render_plot(const std::vector<AggregateRecord>& records,
                        const std::string& axis, const std::string& title = "");

void emit_plot(const std::vector<AggregateRecord>& records, const std::string& axis,
               const std::string& out_path, const std::string& title = "");

// convenience: aggregate csv in, svg out
void emit_plot_from_csv(const std::string& aggregate_csv, const std::string& axis,
                        const std::string& out_path, const std::string& title = "");

}  // namespace ivlreg
