#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lesionkit/cluster.hpp"
#include "lesionkit/image.hpp"
#include "lesionkit/topo.hpp"

namespace lesion::desc {

inline constexpr std::string_view kSchemaVersion = "lesionkit-descriptors/1";

struct DescriptorType {
  std::string_view name;
  int arity = 0;
};

/// Fixed type order used by the CSV files, feature vectors and models.
const std::vector<DescriptorType>& schema();
/// Sum of arities (280).
int attribute_count();
/// Offset of a type's first attribute within the concatenated attribute list.
int attribute_offset(std::size_t type_index);
/// Throws SchemaError for unknown names.
std::size_t type_index(std::string_view name);
int max_arity();

using Row = std::vector<double>;

/// One list of rows per schema type.
struct DescriptorBundle {
  std::vector<std::vector<Row>> lists = std::vector<std::vector<Row>>(schema().size());

  /// Throws SchemaError when the row length differs from the type's arity.
  void add(std::size_t type, Row row);
  void add(std::string_view type, Row row) { add(type_index(type), std::move(row)); }
  std::size_t row_count() const;
  friend bool operator==(const DescriptorBundle&, const DescriptorBundle&) = default;
};

struct ExtractOptions {
  cluster::ClusterConfig cluster;
  topo::ContourOptions contours;
  shape::SymAxisOptions axis;
};

/// Full descriptor set of one image, reusing an existing cluster analysis.
DescriptorBundle extract_descriptors(const RasterImage& img, const cluster::ClusterAnalysis& ca,
                                     const ExtractOptions& opts = {});
DescriptorBundle extract_descriptors(const RasterImage& img, std::uint64_t seed, const ExtractOptions& opts = {});

/// First line: "# <version> types=24 attributes=280"; then the column header
/// descriptor_type,row_index,attr_0..attr_{max_arity-1}; short rows leave
/// trailing cells empty. Numbers are written with 17 significant digits.
std::string to_csv(const DescriptorBundle& bundle);
/// Throws SchemaError on a version mismatch or malformed rows.
DescriptorBundle from_csv(const std::string& text);

}  // namespace lesion::desc
