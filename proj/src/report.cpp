#include "lesionkit/report.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

namespace lesion::report {
namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> type_names() {
  std::vector<std::string> n;
  for (int t = 0; t < kSourceCount; ++t) n.emplace_back(source_name(source_at(t)));
  return n;
}

}  // namespace

std::string segmentation_json(const ensemble::SegmentationReport& r) {
  json j;
  j["types"] = type_names();
  j["per_type"] = std::vector<double>(r.per_type.begin(), r.per_type.end());
  j["ensemble"] = r.ensemble;
  j["max_per_image"] = r.max_per_image;
  j["dominating_counts"] = std::vector<int>(r.dominating_counts.begin(), r.dominating_counts.end());
  j["images"] = r.images;
  j["human_selected"] = r.human_selected ? json(*r.human_selected) : json(nullptr);
  j["human_selected_count"] = r.human_selected_count;
  json rows = json::array();
  for (const auto& s : r.per_image) {
    json row;
    row["id"] = s.id;
    if (s.error) {
      row["error"] = *s.error;
    } else {
      row["per_type"] = std::vector<double>(s.per_type.begin(), s.per_type.end());
      row["ensemble"] = s.ensemble;
      row["max_per_image"] = s.max_per_image;
      row["dominating"] = std::string(source_name(source_at(s.dominating)));
    }
    rows.push_back(row);
  }
  j["per_image"] = rows;
  return j.dump(2) + "\n";
}

std::string segmentation_text(const ensemble::SegmentationReport& r) {
  std::string out = "images scored: " + std::to_string(r.images) + "\n\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %9s %10s\n", "type", "accuracy", "dominates");
  out += line;
  for (int t = 0; t < kSourceCount; ++t) {
    std::snprintf(line, sizeof line, "%-14s %9.4f %10d\n", std::string(source_name(source_at(t))).c_str(),
                  r.per_type[static_cast<std::size_t>(t)], r.dominating_counts[static_cast<std::size_t>(t)]);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-14s %9.4f\n%-14s %9.4f\n", "ensemble", r.ensemble, "max-per-image", r.max_per_image);
  out += line;
  if (r.human_selected) {
    std::snprintf(line, sizeof line, "%-14s %9.4f (%zu images)\n", "human-selected", *r.human_selected,
                  r.human_selected_count);
    out += line;
  }
  std::size_t failed = 0;
  for (const auto& s : r.per_image) failed += s.error ? 1 : 0;
  if (failed) out += "\nfailed images: " + std::to_string(failed) + "\n";
  return out;
}

std::string segmentation_svg(const ensemble::SegmentationReport& r) {
  std::vector<std::pair<std::string, double>> bars;
  for (int t = 0; t < kSourceCount; ++t)
    bars.emplace_back(std::string(source_name(source_at(t))), r.per_type[static_cast<std::size_t>(t)]);
  bars.emplace_back("ensemble", r.ensemble);
  bars.emplace_back("max", r.max_per_image);
  const int bw = 56, gap = 14, left = 50, top = 30, plot_h = 240;
  const int width = left + static_cast<int>(bars.size()) * (bw + gap) + 20, height = top + plot_h + 80;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"18\" font-size=\"13\">Segmentation accuracy (sensitivity x specificity), " +
       std::to_string(r.images) + " images</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const int y = top + plot_h - i * plot_h / 4;
    s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" + std::to_string(width - 10) +
         "\" y2=\"" + std::to_string(y) + "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(y + 4) + "\" text-anchor=\"end\">" +
         fmt("%.2f", i / 4.0) + "</text>\n";
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int x = left + gap / 2 + static_cast<int>(i) * (bw + gap);
    const double v = std::clamp(bars[i].second, 0.0, 1.0);
    const int h = static_cast<int>(v * plot_h + 0.5);
    const char* color = i < static_cast<std::size_t>(kSourceCount) ? "#7a9cc6" : (i == bars.size() - 2 ? "#c65f4b" : "#5a8f5a");
    s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(top + plot_h - h) + "\" width=\"" +
         std::to_string(bw) + "\" height=\"" + std::to_string(h) + "\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + std::to_string(x + bw / 2) + "\" y=\"" + std::to_string(top + plot_h - h - 4) +
         "\" text-anchor=\"middle\">" + fmt("%.3f", bars[i].second) + "</text>\n";
    s += "<text x=\"" + std::to_string(x + bw / 2) + "\" y=\"" + std::to_string(top + plot_h + 16) +
         "\" text-anchor=\"middle\">" + escape(bars[i].first) + "</text>\n";
    if (i < static_cast<std::size_t>(kSourceCount))
      s += "<text x=\"" + std::to_string(x + bw / 2) + "\" y=\"" + std::to_string(top + plot_h + 32) +
           "\" text-anchor=\"middle\" fill=\"#555\">n=" + std::to_string(r.dominating_counts[i]) + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top + plot_h + 56) +
       "\" fill=\"#555\">n = images on which the type is the dominating (most accurate) one</text>\n";
  s += "</svg>\n";
  return s;
}

std::string confusion_csv(const classify::Confusion& c, const std::vector<std::string>& labels, bool zero_diagonal) {
  std::string out = "truth\\predicted";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += i < labels.size() ? labels[i] : std::to_string(i);
    for (std::size_t j = 0; j < c[i].size(); ++j) out += "," + std::to_string(zero_diagonal && i == j ? 0 : c[i][j]);
    out += "\n";
  }
  return out;
}

std::string confusion_svg(const classify::Confusion& c, const std::vector<std::string>& labels, bool zero_diagonal) {
  const int n = static_cast<int>(c.size()), cell = 48, left = 100, top = 60;
  long long peak = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(zero_diagonal && i == j)) peak = std::max(peak, c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  const int width = left + n * cell + 20, height = top + n * cell + 40;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += std::string("<text x=\"10\" y=\"18\" font-size=\"13\">Confusion matrix") +
       (zero_diagonal ? " (diagonal set to zero)" : "") + "</text>\n";
  for (int j = 0; j < n; ++j)
    s += "<text x=\"" + std::to_string(left + j * cell + cell / 2) + "\" y=\"" + std::to_string(top - 8) +
         "\" text-anchor=\"middle\">" + escape(j < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(j)] : std::to_string(j)) + "</text>\n";
  for (int i = 0; i < n; ++i) {
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(top + i * cell + cell / 2 + 4) +
         "\" text-anchor=\"end\">" + escape(i < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(i)] : std::to_string(i)) + "</text>\n";
    for (int j = 0; j < n; ++j) {
      const long long v = zero_diagonal && i == j ? 0 : c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const double t = peak > 0 ? static_cast<double>(v) / static_cast<double>(peak) : 0.0;
      const int shade = static_cast<int>(255.0 - 200.0 * t);
      s += "<rect x=\"" + std::to_string(left + j * cell) + "\" y=\"" + std::to_string(top + i * cell) + "\" width=\"" +
           std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"rgb(" + std::to_string(shade) + "," +
           std::to_string(shade) + ",255)\" stroke=\"#fff\"/>\n";
      s += "<text x=\"" + std::to_string(left + j * cell + cell / 2) + "\" y=\"" + std::to_string(top + i * cell + cell / 2 + 4) +
           "\" text-anchor=\"middle\">" + std::to_string(v) + "</text>\n";
    }
  }
  s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(height - 12) +
       "\" fill=\"#555\">rows: true class, columns: predicted class</text>\n</svg>\n";
  return s;
}

std::string cv_json(const classify::CvResult& r, const std::vector<std::string>& labels,
                    const std::vector<std::string>& ids, const std::vector<classify::TypeAccuracy>& per_type) {
  json j;
  j["accuracy"] = r.accuracy;
  j["labels"] = labels;
  j["confusion"] = r.confusion;
  j["folds"] = r.fold_models.size();
  j["components"] = json::array();
  for (const auto& m : r.fold_models) j["components"].push_back(m.model.components());
  json preds = json::array();
  for (std::size_t i = 0; i < r.predictions.size(); ++i)
    preds.push_back({{"id", i < ids.size() ? ids[i] : std::to_string(i)},
                     {"fold", r.fold_of[i]},
                     {"predicted", r.predictions[i] >= 0 ? json(labels[static_cast<std::size_t>(r.predictions[i])]) : json(nullptr)}});
  j["predictions"] = preds;
  if (!per_type.empty()) {
    json pt = json::object();
    for (const auto& t : per_type) pt[t.type] = t.accuracy;
    j["per_type_accuracy"] = pt;
  }
  return j.dump(2) + "\n";
}

}  // namespace lesion::report
