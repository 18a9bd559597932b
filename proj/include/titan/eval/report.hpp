#pragma once

#include <string>

#include "titan/eval/evaluate.hpp"

namespace titan::eval {

std::string render_markdown(const Report& report);

// Past trajectory, ground-truth future, and each model's predicted future for
// one window, drawn over the image frame with the final boxes outlined.
std::string render_trajectory_svg(const FolSample& sample);

// Per-step agent importance weights as signed bars colored by weight.
std::string render_importance_svg(const ImportanceSample& sample);

// report.md plus one SVG per embedded sample, under out_dir (created if
// absent); plot files land in out_dir/plots.
void write_report_artifacts(const Report& report, const std::string& out_dir);

}  // namespace titan::eval
