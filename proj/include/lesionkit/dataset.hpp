#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lesion {

enum class Layout { Isic, FlatCsv };
Layout layout_from_name(const std::string& name);  // "isic" or "flat-csv"

struct DatasetEntry {
  std::string id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> truth;
  std::optional<int> label;  // index into DatasetManifest::classes
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<DatasetEntry> entries;  // sorted by id
  std::vector<std::string> classes;
  /// Per-entry problems found while pairing files (missing mask or label).
  std::vector<std::string> warnings;

  const DatasetEntry* find(const std::string& id) const;
  bool labelled() const;
};

/// isic: every *.jpg/*.jpeg/*.png below `root` that is not a mask is an
/// image; "<id>_segmentation.png" anywhere below `root` is its truth mask;
/// labels come from the first CSV whose header starts with "image" and
/// holds one-hot class columns.
/// flat-csv: `root` is a CSV file (or a directory holding manifest.csv) with
/// columns image,mask,label; paths are relative to the CSV's directory.
/// Throws DataError for unreadable roots and empty datasets.
DatasetManifest ingest(const std::filesystem::path& root, Layout layout);

/// Column index of the hot entry in a one-hot row; throws DataError when
/// the row is not one-hot.
int one_hot_label(const std::vector<double>& row);

}  // namespace lesion
