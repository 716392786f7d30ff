#include "lesionkit/descriptors.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "lesionkit/shape.hpp"

namespace lesion::desc {
namespace {

const std::vector<DescriptorType> kSchema = {
    {"kmeans.boundary", 8},      {"kmeans.distribution", 8},  {"kmeans.appearance", 14},
    {"kmeans.axis_short", 6},    {"kmeans.axis_long", 6},     {"kmeans.axis_fork", 4},
    {"kmeans.axis_peak", 3},     {"ridge.s1", 15},            {"river.s1", 15},
    {"edge.s1", 15},             {"ridge.s2", 15},            {"river.s2", 15},
    {"edge.s2", 15},             {"clot.s1", 19},             {"bundle_tight.s1", 19},
    {"bundle_loose.s1", 19},     {"clot.s2", 19},             {"bundle_tight.s2", 19},
    {"bundle_loose.s2", 19},     {"dog.distribution", 8},     {"dog.axis_short", 6},
    {"dog.axis_long", 6},        {"dog.axis_fork", 4},        {"dog.axis_peak", 3},
};

template <std::size_t N>
Row to_row(const std::array<double, N>& a) {
  return Row(a.begin(), a.end());
}

void add_axis(DescriptorBundle& b, std::string_view prefix, const shape::SymAxisDescriptorSet& s) {
  const std::string p(prefix);
  for (const auto& r : s.short_rows) b.add(p + ".axis_short", to_row(r));
  for (const auto& r : s.long_rows) b.add(p + ".axis_long", to_row(r));
  for (const auto& r : s.forks) b.add(p + ".axis_fork", to_row(r));
  for (const auto& r : s.peaks) b.add(p + ".axis_peak", to_row(r));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no negative zero
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

const std::vector<DescriptorType>& schema() { return kSchema; }

int attribute_count() {
  int n = 0;
  for (const auto& t : kSchema) n += t.arity;
  return n;
}

int attribute_offset(std::size_t type_index) {
  int n = 0;
  for (std::size_t i = 0; i < type_index; ++i) n += kSchema[i].arity;
  return n;
}

std::size_t type_index(std::string_view name) {
  for (std::size_t i = 0; i < kSchema.size(); ++i)
    if (kSchema[i].name == name) return i;
  throw SchemaError("unknown descriptor type '" + std::string(name) + "'");
}

int max_arity() {
  int m = 0;
  for (const auto& t : kSchema) m = std::max(m, t.arity);
  return m;
}

void DescriptorBundle::add(std::size_t type, Row row) {
  if (type >= lists.size()) throw SchemaError("descriptor type index out of range");
  if (static_cast<int>(row.size()) != kSchema[type].arity)
    throw SchemaError("row of " + std::to_string(row.size()) + " values for '" + std::string(kSchema[type].name) +
                      "' (arity " + std::to_string(kSchema[type].arity) + ")");
  lists[type].push_back(std::move(row));
}

std::size_t DescriptorBundle::row_count() const {
  std::size_t n = 0;
  for (const auto& l : lists) n += l.size();
  return n;
}

DescriptorBundle extract_descriptors(const RasterImage& img, const cluster::ClusterAnalysis& ca,
                                     const ExtractOptions& opts) {
  DescriptorBundle b;
  const PlaneMap gray = gray_plane(img);
  for (const auto& rp : ca.regions) {
    const Region& rg = *rp;
    try {
      b.add("kmeans.boundary", to_row(shape::boundary_descriptor(shape::radial_signature(rg)).values()));
    } catch (const DegenerateRegionError&) {
      // thin or tiny regions have no usable signature
    }
    b.add("kmeans.distribution", to_row(shape::distribution_descriptor(rg, img.width(), img.height()).values()));
    b.add("kmeans.appearance", to_row(shape::appearance_descriptor(rg, img)));
    add_axis(b, "kmeans", shape::sym_axis_descriptors(rg, &gray, opts.axis));
  }

  const topo::ScalePair sp = topo::scale_pair(gray);
  const std::vector<topo::RawContour> raw = topo::extract_contours(sp, opts.contours);
  std::vector<topo::ContourSegment> per_scale[2];
  for (const auto& c : raw) {
    const std::string type = std::string(topo::kind_name(c.kind)) + ".s" + std::to_string(c.scale);
    for (auto& seg : topo::partition_and_describe(c, img, gray)) {
      b.add(type, to_row(seg.attributes));
      per_scale[c.scale - 1].push_back(std::move(seg));
    }
  }
  for (int s = 0; s < 2; ++s) {
    const std::string suffix = ".s" + std::to_string(s + 1);
    for (const auto& g : topo::find_clots(per_scale[s])) b.add("clot" + suffix, to_row(g.attributes));
    for (const auto& g : topo::find_bundles(per_scale[s]))
      b.add((g.kind == topo::GroupKind::BundleTight ? "bundle_tight" : "bundle_loose") + suffix, to_row(g.attributes));
  }

  const BinaryMask e1 = topo::contour_mask(raw, topo::ContourKind::Edge, 1, img.width(), img.height());
  const BinaryMask e2 = topo::contour_mask(raw, topo::ContourKind::Edge, 2, img.width(), img.height());
  for (const auto& dr : topo::dog_regions(sp, e1, e2, default_min_area(img.width(), img.height()))) {
    b.add("dog.distribution", to_row(dr.distribution.values()));
    add_axis(b, "dog", dr.axis);
  }
  return b;
}

DescriptorBundle extract_descriptors(const RasterImage& img, std::uint64_t seed, const ExtractOptions& opts) {
  return extract_descriptors(img, cluster::analyze_clusters(img, opts.cluster, seed), opts);
}

std::string to_csv(const DescriptorBundle& bundle) {
  std::string out = "# " + std::string(kSchemaVersion) + " types=" + std::to_string(kSchema.size()) +
                    " attributes=" + std::to_string(attribute_count()) + "\n";
  out += "descriptor_type,row_index";
  const int width = max_arity();
  for (int i = 0; i < width; ++i) out += ",attr_" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < kSchema.size(); ++t)
    for (std::size_t r = 0; r < bundle.lists[t].size(); ++r) {
      out += std::string(kSchema[t].name) + "," + std::to_string(r);
      const Row& row = bundle.lists[t][r];
      for (int i = 0; i < width; ++i) {
        out += ",";
        if (i < static_cast<int>(row.size())) out += format_number(row[static_cast<std::size_t>(i)]);
      }
      out += "\n";
    }
  return out;
}

DescriptorBundle from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw SchemaError("descriptor CSV lacks the schema line");
  const std::string version = split(line.substr(2), ' ').front();
  if (version != kSchemaVersion) throw SchemaError("descriptor schema '" + version + "' is not supported");
  if (!std::getline(in, line) || line.rfind("descriptor_type,row_index", 0) != 0)
    throw SchemaError("descriptor CSV lacks the column header");
  DescriptorBundle b;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() < 2) throw SchemaError("malformed descriptor row at line " + std::to_string(lineno));
    const std::size_t t = type_index(cells[0]);
    Row row;
    for (std::size_t i = 2; i < cells.size(); ++i) {
      if (cells[i].empty()) continue;
      double v = 0.0;
      const char* first = cells[i].data();
      const auto res = std::from_chars(first, first + cells[i].size(), v);
      if (res.ec != std::errc() || res.ptr != first + cells[i].size())
        throw SchemaError("bad number '" + cells[i] + "' at line " + std::to_string(lineno));
      row.push_back(v);
    }
    b.add(t, std::move(row));
  }
  return b;
}

}  // namespace lesion::desc
