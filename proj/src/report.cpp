#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "config_json.hpp"
#include "simplicity/runner.hpp"

namespace simplicity {
namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 80;
constexpr double kTop = 50;
constexpr double kBottom = 60;

constexpr std::array<const char*, 7> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2"};

const char* colour_for(int index) {
  return kPalette[static_cast<std::size_t>(std::max(0, index - 1)) % kPalette.size()];
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Rounds `v` up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 5.0, 10.0}) {
    if (step * magnitude >= v) return step * magnitude;
  }
  return 10.0 * magnitude;
}

class Svg {
 public:
  explicit Svg(const std::string& title) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
         << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(kHeight) << "\">\n"
         << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
         << "\" style=\"fill:#ffffff\"/>\n";
    text(kWidth / 2, 28, title, "middle", 16, "#000000");
  }

  void line(double x1, double y1, double x2, double y2, const std::string& colour,
            double width = 1.0) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
         << "\" y2=\"" << num(y2) << "\" style=\"stroke:" << colour
         << ";stroke-width:" << num(width) << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& colour) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
         << "\" height=\"" << num(h) << "\" style=\"fill:" << colour << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
    out_ << "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out_ << (i ? " " : "") << num(pts[i].first) << "," << num(pts[i].second);
    }
    out_ << "\" style=\"fill:none;stroke:" << colour << ";stroke-width:2\"/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "start",
            int size = 11, const std::string& colour = "#333333") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" style=\"font-family:sans-serif;"
         << "font-size:" << size << "px;fill:" << colour << ";text-anchor:" << anchor << "\">"
         << escape(s) << "</text>\n";
  }

  void vertical_text(double x, double y, const std::string& s) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" transform=\"rotate(-90 "
         << num(x) << " " << num(y) << ")\" style=\"font-family:sans-serif;font-size:12px;"
         << "fill:#333333;text-anchor:middle\">" << escape(s) << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

struct Plot {
  double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  double y_of(double v, double vmax) const { return y0 - (y0 - y1) * (v / vmax); }
};

void y_axis(Svg& svg, const Plot& p, double vmax, double x, bool right, const std::string& label,
            bool percent = false) {
  svg.line(x, p.y0, x, p.y1, "#000000");
  for (int t = 0; t <= 5; ++t) {
    const double v = vmax * t / 5.0;
    const double y = p.y_of(v, vmax);
    svg.line(right ? x : x - 4, y, right ? x + 4 : x, y, "#000000");
    if (!right) svg.line(p.x0, y, p.x1, y, "#e5e5e5", 0.5);
    char buf[32];
    std::snprintf(buf, sizeof buf, percent ? "%.0f%%" : "%.3g", percent ? v * 100.0 : v);
    svg.text(right ? x + 7 : x - 7, y + 4, buf, right ? "start" : "end");
  }
  svg.vertical_text(right ? x + 62 : x - 52, (p.y0 + p.y1) / 2, label);
}

void legend_entry(Svg& svg, double x, double y, const std::string& colour,
                  const std::string& label) {
  svg.rect(x, y - 9, 12, 10, colour);
  svg.text(x + 16, y, label);
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string metrics_csv(std::span<const MetricsRecord> records) {
  std::string out = "index,epoch,mean_train_loss,test_accuracy\n";
  for (const auto& r : records) {
    out += std::to_string(r.index) + "," + std::to_string(r.epoch) + "," +
           format_real(r.mean_train_loss) + "," + format_real(r.test_accuracy) + "\n";
  }
  return out;
}

std::string results_csv(std::span<const ResultRow> rows) {
  std::string out =
      "index,final_test_accuracy,lz76_phrases,lzss_bytes,sensitivity_mean_l2,wall_seconds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.index) + "," + format_real(r.final_test_accuracy) + "," +
           std::to_string(r.lz76_phrases) + "," + std::to_string(r.lzss_bytes) + "," +
           format_real(r.sensitivity_mean_l2) + "," + format_real(r.wall_seconds) + "\n";
  }
  return out;
}

std::string results_json(std::span<const ExperimentOutcome> outcomes) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json row;
    row["index"] = o.row.index;
    row["config"] = detail::config_to_json(o.config);
    if (o.ok()) {
      row["final_test_accuracy"] = o.row.final_test_accuracy;
      row["lz76_phrases"] = o.row.lz76_phrases;
      row["lzss_bytes"] = o.row.lzss_bytes;
      row["stream_len"] = o.stream.bytes.size();
      row["sensitivity_mean_l2"] = o.row.sensitivity_mean_l2;
      row["sensitivity_epsilon"] = o.sensitivity.epsilon;
      row["sensitivity_samples"] = o.sensitivity.n_samples;
      row["wall_seconds"] = o.row.wall_seconds;
      row["error"] = nullptr;
    } else {
      row["error"] = *o.error;
    }
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string loss_curves_svg(std::span<const MetricsRecord> records) {
  Svg svg("Mean training loss per epoch");
  Plot p;
  std::map<int, std::vector<const MetricsRecord*>> by_index;
  std::size_t max_epoch = 1;
  double max_loss = 0.0;
  for (const auto& r : records) {
    by_index[r.index].push_back(&r);
    max_epoch = std::max(max_epoch, r.epoch);
    if (std::isfinite(r.mean_train_loss)) max_loss = std::max(max_loss, r.mean_train_loss);
  }
  const double vmax = nice_ceiling(max_loss);
  y_axis(svg, p, vmax, p.x0, false, "mean train loss");
  svg.line(p.x0, p.y0, p.x1, p.y0, "#000000");
  auto x_of = [&](std::size_t epoch) {
    return max_epoch == 1 ? (p.x0 + p.x1) / 2
                          : p.x0 + (p.x1 - p.x0) * double(epoch - 1) / double(max_epoch - 1);
  };
  for (std::size_t e = 1; e <= max_epoch; ++e) {
    svg.line(x_of(e), p.y0, x_of(e), p.y0 + 4, "#000000");
    svg.text(x_of(e), p.y0 + 17, std::to_string(e), "middle");
  }
  svg.text((p.x0 + p.x1) / 2, p.y0 + 40, "epoch", "middle", 12);

  double legend_y = p.y1 + 10;
  for (const auto& [index, recs] : by_index) {
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : recs) {
      if (std::isfinite(r->mean_train_loss)) {
        pts.emplace_back(x_of(r->epoch), p.y_of(std::min(r->mean_train_loss, vmax), vmax));
      }
    }
    if (!pts.empty()) svg.polyline(pts, colour_for(index));
    legend_entry(svg, p.x1 + 10, legend_y, colour_for(index), "index " + std::to_string(index));
    legend_y += 18;
  }
  return svg.finish();
}

std::string accuracy_svg(std::span<const ResultRow> rows) {
  Svg svg("Final test accuracy");
  Plot p;
  y_axis(svg, p, 1.0, p.x0, false, "test accuracy", true);
  svg.line(p.x0, p.y0, p.x1, p.y0, "#000000");
  const double slot = (p.x1 - p.x0) / double(std::max<std::size_t>(rows.size(), 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double acc = std::clamp(r.final_test_accuracy, 0.0, 1.0);
    const double x = p.x0 + slot * i + slot * 0.2;
    const double top = p.y_of(acc, 1.0);
    svg.rect(x, top, slot * 0.6, p.y0 - top, colour_for(r.index));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", acc * 100.0);
    svg.text(x + slot * 0.3, top - 5, buf, "middle", 10);
    svg.text(x + slot * 0.3, p.y0 + 17, std::to_string(r.index), "middle");
  }
  svg.text((p.x0 + p.x1) / 2, p.y0 + 40, "experiment index", "middle", 12);
  return svg.finish();
}

std::string complexity_sensitivity_svg(std::span<const ResultRow> rows) {
  Svg svg("Output complexity and perturbation sensitivity");
  Plot p;
  double max_count = 0.0, max_sens = 0.0;
  for (const auto& r : rows) {
    max_count = std::max({max_count, double(r.lz76_phrases), double(r.lzss_bytes)});
    if (std::isfinite(r.sensitivity_mean_l2)) max_sens = std::max(max_sens, r.sensitivity_mean_l2);
  }
  const double count_max = nice_ceiling(max_count);
  const double sens_max = nice_ceiling(max_sens);
  y_axis(svg, p, count_max, p.x0, false, "LZ76 phrases / LZSS bytes");
  y_axis(svg, p, sens_max, p.x1, true, "sensitivity (mean L2)");
  svg.line(p.x0, p.y0, p.x1, p.y0, "#000000");

  const std::array<const char*, 3> colours = {"#4c72b0", "#dd8452", "#55a868"};
  const double slot = (p.x1 - p.x0) / double(std::max<std::size_t>(rows.size(), 1));
  const double bar = slot * 0.8 / 3.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double base = p.x0 + slot * i + slot * 0.1;
    const std::array<double, 3> heights = {
        p.y0 - p.y_of(double(r.lz76_phrases), count_max),
        p.y0 - p.y_of(double(r.lzss_bytes), count_max),
        std::isfinite(r.sensitivity_mean_l2)
            ? p.y0 - p.y_of(std::min(r.sensitivity_mean_l2, sens_max), sens_max)
            : 0.0};
    for (std::size_t k = 0; k < 3; ++k) {
      svg.rect(base + bar * k, p.y0 - heights[k], bar, heights[k], colours[k]);
    }
    svg.text(base + slot * 0.4, p.y0 + 17, std::to_string(r.index), "middle");
  }
  svg.text((p.x0 + p.x1) / 2, p.y0 + 40, "experiment index", "middle", 12);
  legend_entry(svg, p.x0 + 10, p.y1 - 8, colours[0], "LZ76 phrases");
  legend_entry(svg, p.x0 + 130, p.y1 - 8, colours[1], "LZSS bytes");
  legend_entry(svg, p.x0 + 240, p.y1 - 8, colours[2], "sensitivity (right axis)");
  return svg.finish();
}

void write_reports(std::span<const ExperimentOutcome> outcomes,
                   const std::filesystem::path& out_dir) {
  std::vector<ResultRow> rows;
  std::vector<MetricsRecord> records;
  for (const auto& o : outcomes) {
    if (o.ok()) rows.push_back(o.row);
    records.insert(records.end(), o.metrics.begin(), o.metrics.end());
  }
  if (rows.empty()) throw std::runtime_error("no successful experiments to report");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  auto emit = [&](const char* name, const std::string& body) {
    const auto path = out_dir / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write " + path.string());
  };
  emit("metrics.csv", metrics_csv(records));
  emit("results.csv", results_csv(rows));
  emit("results.json", results_json(outcomes));
  emit("loss_curves.svg", loss_curves_svg(records));
  emit("accuracy.svg", accuracy_svg(rows));
  emit("complexity_sensitivity.svg", complexity_sensitivity_svg(rows));
}

}  // namespace simplicity
