#include "titan/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace titan::eval {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string num(double v) { return fmt("%.4f", v); }

const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#d62728", "#9467bd", "#ff7f0e",
      "#8c564b", "#17becf", "#e377c2", "#7f7f7f"};
  return colors;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Weight in [-1, 1] to a blue-grey-red ramp.
std::string weight_color(double w) {
  const double t = std::clamp(w, -1.0, 1.0);
  auto channel = [](double lo, double hi, double u) {
    return static_cast<int>(std::lround(lo + (hi - lo) * u));
  };
  int r, g, b;
  if (t < 0) {
    r = channel(31, 205, 1 + t);
    g = channel(119, 205, 1 + t);
    b = channel(180, 205, 1 + t);
  } else {
    r = channel(205, 214, t);
    g = channel(205, 39, t);
    b = channel(205, 40, t);
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_markdown(const Report& report) {
  std::string md;
  md += "# Evaluation report\n\n";
  md += "Test clips (" + std::to_string(report.test_clips.size()) + "): ";
  for (size_t i = 0; i < report.test_clips.size(); ++i) {
    if (i) md += ", ";
    md += report.test_clips[i];
  }
  md += "\n";

  if (!report.fol.empty()) {
    md += "\n## Trajectory forecasting\n\n";
    md += "| model | expected | evaluated | missing | ADE (px) | FDE (px) | FIOU |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const FolRow& row : report.fol) {
      md += "| " + row.name + " | " + std::to_string(row.expected) + " | " +
            std::to_string(row.overall.count) + " | " +
            std::to_string(row.missing.size()) + " | " + num(row.overall.ade_px) +
            " | " + num(row.overall.fde_px) + " | " + num(row.overall.fiou) +
            " |\n";
    }
    for (const FolRow& row : report.fol) {
      if (row.per_class.empty()) continue;
      md += "\n### " + row.name + " by target class\n\n";
      md += "| class | windows | ADE (px) | FDE (px) | FIOU |\n";
      md += "|---|---|---|---|---|\n";
      for (const auto& [label, s] : row.per_class)
        md += "| " + label + " | " + std::to_string(s.count) + " | " +
              num(s.ade_px) + " | " + num(s.fde_px) + " | " + num(s.fiou) + " |\n";
    }
  }

  if (!report.ego.empty()) {
    md += "\n## Ego motion\n\n";
    md += "| model | expected | evaluated | missing | acc RMSE (m/s^2) | yaw RMSE "
          "(rad/s) |\n";
    md += "|---|---|---|---|---|---|\n";
    for (const EgoRow& row : report.ego) {
      md += "| " + row.name + " | " + std::to_string(row.expected) + " | " +
            std::to_string(row.evaluated) + " | " +
            std::to_string(row.missing.size()) + " | " + num(row.rmse_alpha) +
            " | " + num(row.rmse_omega) + " |\n";
    }
  }

  if (report.action) {
    const ActionReport& ar = *report.action;
    md += "\n## Action recognition\n\n";
    md += "Instances: " + std::to_string(ar.evaluated) + " of " +
          std::to_string(ar.expected) + " (" + std::to_string(ar.missing.size()) +
          " missing). Overall mAP: " + num(ar.overall_map) + "\n\n";
    md += "| label set | mAP |\n|---|---|\n";
    for (const ActionHeadReport& head : ar.per_head)
      md += "| " + head.set_name + " | " +
            (head.map < 0 ? std::string("absent") : num(head.map)) + " |\n";
    md += "\n### Per-class average precision\n\n";
    md += "| label set | class | AP |\n|---|---|---|\n";
    for (const ActionHeadReport& head : ar.per_head)
      for (const auto& [label, ap] : head.per_class)
        md += "| " + head.set_name + " | " + label + " | " +
              (ap < 0 ? std::string("absent") : num(ap)) + " |\n";
  }

  const size_t missing_total = [&] {
    size_t n = 0;
    for (const FolRow& row : report.fol) n += row.missing.size();
    for (const EgoRow& row : report.ego) n += row.missing.size();
    if (report.action) n += report.action->missing.size();
    return n;
  }();
  if (missing_total > 0) {
    md += "\n## Missing predictions\n\n";
    md += "| row | clip | t_start | track |\n|---|---|---|---|\n";
    auto emit = [&](const std::string& name, const InstanceKey& k) {
      md += "| " + name + " | " + k.clip_id + " | " + std::to_string(k.t_start) +
            " | " + (k.track_id < 0 ? std::string("-") : std::to_string(k.track_id)) +
            " |\n";
    };
    for (const FolRow& row : report.fol)
      for (const InstanceKey& k : row.missing) emit(row.name, k);
    for (const EgoRow& row : report.ego)
      for (const InstanceKey& k : row.missing) emit(row.name, k);
    if (report.action)
      for (const InstanceKey& k : report.action->missing) emit("action", k);
  }

  return md;
}

std::string render_trajectory_svg(const FolSample& sample) {
  const double W = 960.0;
  const double H = 600.0;
  auto px = [&](double u) { return fmt("%.1f", u * W); };
  auto py = [&](double v) { return fmt("%.1f", v * H); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"640\" "
         "viewBox=\"0 0 960 640\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"600\" fill=\"#f4f4f4\" "
         "stroke=\"#999\"/>\n";

  auto polyline = [&](std::span<const data::BBox> boxes, const std::string& color,
                      const std::string& dash) {
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"";
    if (!dash.empty()) svg += " stroke-dasharray=\"" + dash + "\"";
    svg += " points=\"";
    for (size_t i = 0; i < boxes.size(); ++i) {
      if (i) svg += ' ';
      svg += px(boxes[i].c_u) + "," + py(boxes[i].c_v);
    }
    svg += "\"/>\n";
  };
  auto final_box = [&](const data::BBox& b, const std::string& color) {
    svg += "<rect x=\"" + px(b.c_u - b.l_u / 2) + "\" y=\"" + py(b.c_v - b.l_v / 2) +
           "\" width=\"" + px(b.l_u) + "\" height=\"" + py(b.l_v) +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
  };

  polyline(sample.observed, "#555555", "4,3");
  if (!sample.observed.empty()) final_box(sample.observed.back(), "#555555");
  polyline(sample.truth, "#2ca02c", "");
  if (!sample.truth.empty()) final_box(sample.truth.back(), "#2ca02c");

  int color_index = 0;
  double legend_x = 8.0;
  auto legend = [&](const std::string& label, const std::string& color) {
    svg += "<rect x=\"" + fmt("%.1f", legend_x) +
           "\" y=\"612\" width=\"14\" height=\"14\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", legend_x + 18) +
           "\" y=\"624\" font-family=\"monospace\" font-size=\"13\">" + label +
           "</text>\n";
    legend_x += 18 + 8.5 * static_cast<double>(label.size()) + 16;
  };
  legend("observed", "#555555");
  legend("truth", "#2ca02c");
  for (const auto& [model, boxes] : sample.predictions) {
    const std::string& color = palette()[color_index % palette().size()];
    ++color_index;
    polyline(boxes, color, "");
    if (!boxes.empty()) final_box(boxes.back(), color);
    legend(model, color);
  }

  svg += "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"14\">" +
         sample.key.clip_id + "  t=" + std::to_string(sample.key.t_start) +
         "  track=" + std::to_string(sample.key.track_id) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string render_importance_svg(const ImportanceSample& sample) {
  const int steps = static_cast<int>(sample.steps.size());
  const double W = 960.0;
  const double H = 360.0;
  const double mid = H / 2.0;
  const double col = steps > 0 ? (W - 40.0) / steps : W;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"400\" "
         "viewBox=\"0 0 960 400\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"360\" fill=\"#ffffff\" "
         "stroke=\"#999\"/>\n";
  svg += "<line x1=\"20\" y1=\"" + fmt("%.1f", mid) + "\" x2=\"940\" y2=\"" +
         fmt("%.1f", mid) + "\" stroke=\"#bbbbbb\"/>\n";

  for (int t = 0; t < steps; ++t) {
    const auto& agents = sample.steps[t];
    const int n = static_cast<int>(agents.size());
    if (n == 0) continue;
    const double bar = std::max(1.0, (col - 4.0) / n);
    for (int i = 0; i < n; ++i) {
      const double w = agents[i].second;
      const double x = 20.0 + t * col + 2.0 + i * bar;
      const double h = std::abs(w) * (mid - 20.0);
      const double y = w >= 0 ? mid - h : mid;
      svg += "<rect x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", y) +
             "\" width=\"" + fmt("%.1f", std::max(1.0, bar - 1.0)) +
             "\" height=\"" + fmt("%.1f", h) + "\" fill=\"" + weight_color(w) +
             "\"><title>step " + std::to_string(t) + " track " +
             std::to_string(agents[i].first) + " w=" + num(w) + "</title></rect>\n";
    }
  }

  svg += "<text x=\"8\" y=\"382\" font-family=\"monospace\" font-size=\"14\">" +
         sample.model + "  " + sample.key.clip_id +
         "  t=" + std::to_string(sample.key.t_start) +
         "  bars: agent importance per future step, red positive / blue "
         "negative</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_report_artifacts(const Report& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "plots");
  write_text((fs::path(out_dir) / "report.md").string(), render_markdown(report));
  for (const FolSample& sample : report.fol_samples) {
    const std::string name = "trajectory_" + sample.key.clip_id + "_t" +
                             std::to_string(sample.key.t_start) + "_track" +
                             std::to_string(sample.key.track_id) + ".svg";
    write_text((fs::path(out_dir) / "plots" / name).string(),
               render_trajectory_svg(sample));
  }
  for (const ImportanceSample& sample : report.importance_samples) {
    const std::string name = "importance_" + sample.model + "_" +
                             sample.key.clip_id + "_t" +
                             std::to_string(sample.key.t_start) + ".svg";
    write_text((fs::path(out_dir) / "plots" / name).string(),
               render_importance_svg(sample));
  }
}

}  // namespace titan::eval
