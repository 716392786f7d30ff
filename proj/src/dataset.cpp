#include "lesionkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "lesionkit/errors.hpp"

namespace fs = std::filesystem;

namespace lesion {
namespace {

constexpr std::string_view kMaskSuffix = "_segmentation";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (const char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv(line));
  }
  return rows;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_image_ext(const fs::path& p) {
  const std::string e = lower(p.extension().string());
  return e == ".jpg" || e == ".jpeg" || e == ".png";
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("bad number '" + s + "' in " + where);
  return v;
}

DatasetManifest ingest_isic(const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  std::map<std::string, fs::path> images, masks;
  std::vector<fs::path> csvs;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const fs::path& p = e.path();
    const std::string stem = p.stem().string();
    if (lower(p.extension().string()) == ".csv") {
      csvs.push_back(p);
    } else if (is_image_ext(p)) {
      if (ends_with(stem, kMaskSuffix)) {
        masks[stem.substr(0, stem.size() - kMaskSuffix.size())] = p;
      } else if (!ends_with(stem, "_superpixels")) {
        if (images.count(stem)) m.warnings.push_back(stem + ": duplicate image file " + p.string() + " ignored");
        else images[stem] = p;
      }
    }
  }
  std::sort(csvs.begin(), csvs.end());
  std::map<std::string, int> labels;
  for (const auto& csv : csvs) {
    const auto rows = read_csv(csv);
    if (rows.empty() || rows[0].size() < 3 || lower(rows[0][0]) != "image") continue;
    m.classes.assign(rows[0].begin() + 1, rows[0].end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size())
        throw DataError(csv.string() + ": row " + std::to_string(r + 1) + " has the wrong number of columns");
      std::vector<double> hot;
      for (std::size_t c = 1; c < rows[r].size(); ++c)
        hot.push_back(parse_double(rows[r][c], csv.string()));
      labels[rows[r][0]] = one_hot_label(hot);
    }
    break;
  }
  for (const auto& [id, path] : images) {
    DatasetEntry e{id, path, std::nullopt, std::nullopt};
    if (const auto it = masks.find(id); it != masks.end()) e.truth = it->second;
    else m.warnings.push_back(id + ": no truth mask");
    if (const auto it = labels.find(id); it != labels.end()) e.label = it->second;
    else if (!m.classes.empty()) m.warnings.push_back(id + ": no class label");
    m.entries.push_back(std::move(e));
  }
  for (const auto& [id, path] : masks)
    if (!images.count(id)) m.warnings.push_back(id + ": truth mask without image");
  return m;
}

DatasetManifest ingest_flat(const fs::path& root) {
  const fs::path csv = fs::is_directory(root) ? root / "manifest.csv" : root;
  const fs::path base = csv.parent_path();
  const auto rows = read_csv(csv);
  if (rows.empty()) throw DataError(csv.string() + " is empty");
  const auto& head = rows[0];
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (lower(head[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int ci = column("image"), cm = column("mask"), cl = column("label");
  if (ci < 0) throw DataError(csv.string() + " lacks an 'image' column");
  DatasetManifest m;
  m.root = base;
  std::vector<std::string> raw_labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](int c) { return c >= 0 && c < static_cast<int>(row.size()) ? row[static_cast<std::size_t>(c)] : std::string(); };
    if (cell(ci).empty()) throw DataError(csv.string() + ": row " + std::to_string(r + 1) + " has no image");
    DatasetEntry e;
    e.image = base / cell(ci);
    e.id = e.image.stem().string();
    if (!fs::exists(e.image)) {
      m.warnings.push_back(e.id + ": image file " + e.image.string() + " missing");
      continue;
    }
    if (!cell(cm).empty()) {
      const fs::path mask = base / cell(cm);
      if (fs::exists(mask)) e.truth = mask;
      else m.warnings.push_back(e.id + ": truth mask " + mask.string() + " missing");
    }
    raw_labels.push_back(cell(cl));
    m.entries.push_back(std::move(e));
  }
  for (const auto& l : raw_labels)
    if (!l.empty() && std::find(m.classes.begin(), m.classes.end(), l) == m.classes.end()) m.classes.push_back(l);
  std::sort(m.classes.begin(), m.classes.end());
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (!raw_labels[i].empty())
      m.entries[i].label = static_cast<int>(std::find(m.classes.begin(), m.classes.end(), raw_labels[i]) - m.classes.begin());
  std::sort(m.entries.begin(), m.entries.end(), [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
  return m;
}

}  // namespace

Layout layout_from_name(const std::string& name) {
  if (name == "isic") return Layout::Isic;
  if (name == "flat-csv") return Layout::FlatCsv;
  throw DataError("unknown dataset layout '" + name + "' (expected isic or flat-csv)");
}

const DatasetEntry* DatasetManifest::find(const std::string& id) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), id,
                                   [](const DatasetEntry& e, const std::string& key) { return e.id < key; });
  return it != entries.end() && it->id == id ? &*it : nullptr;
}

bool DatasetManifest::labelled() const {
  return !classes.empty() && std::all_of(entries.begin(), entries.end(), [](const DatasetEntry& e) { return e.label.has_value(); });
}

int one_hot_label(const std::vector<double>& row) {
  int hot = -1;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == 0.0) continue;
    if (row[i] != 1.0 || hot >= 0) throw DataError("label row is not one-hot");
    hot = static_cast<int>(i);
  }
  if (hot < 0) throw DataError("label row has no class set");
  return hot;
}

DatasetManifest ingest(const fs::path& root, Layout layout) {
  std::error_code ec;
  if (!fs::exists(root, ec)) throw DataError("dataset root " + root.string() + " does not exist");
  if (layout == Layout::Isic && !fs::is_directory(root, ec)) throw DataError(root.string() + " is not a directory");
  DatasetManifest m;
  try {
    m = layout == Layout::Isic ? ingest_isic(root) : ingest_flat(root);
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string("cannot read dataset: ") + e.what());
  }
  if (m.entries.empty()) throw DataError("dataset at " + root.string() + " holds no images");
  return m;
}

}  // namespace lesion
