#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lesionkit/image.hpp"

namespace lesion {

struct BBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  std::size_t area() const noexcept { return static_cast<std::size_t>(width()) * height(); }
};

/// An 8-connected pixel set with its cached geometry. Build with
/// `make_region`; the fields are consistent only as produced there.
struct Region {
  std::vector<Point> pixels;  // row-major order
  std::size_t area = 0;
  PointF centroid;
  BBox bbox;
  /// Outer boundary as a closed 8-connected chain (first pixel is the
  /// topmost-leftmost, traversal counter-clockwise on screen).
  std::vector<Point> boundary;
  bool touches_border = false;
  /// Fraction of boundary chain pixels that lie on the image frame.
  double border_fraction = 0.0;
  /// Fraction of the image frame pixels that belong to the region.
  double frame_coverage = 0.0;
  int holes = 0;
  std::size_t hole_area = 0;
  /// Perimeter of the outer boundary and of the hole boundaries (chain-code length).
  double outer_perimeter = 0.0;
  double hole_perimeter = 0.0;
  /// Convex hull vertices, counter-clockwise, no collinear vertices.
  std::vector<Point> hull;
  /// Pixel count of the rasterized hull.
  std::size_t hull_area = 0;
  double solidity = 1.0;
  int image_width = 0;
  int image_height = 0;
};

Region make_region(std::vector<Point> pixels, int image_width, int image_height);

/// Region pixels as a full-image mask.
BinaryMask region_mask(const Region& rg);
BinaryMask union_mask(const std::vector<const Region*>& regions, int width, int height);

/// Per-pixel component ids (-1 for unset) under 8-connectivity.
struct ComponentLabels {
  Grid<int> ids;
  int count = 0;
};
ComponentLabels label_components(const BinaryMask& mask);
/// Components of equal-label pixels; `labels` values < 0 are ignored.
ComponentLabels label_components(const Grid<int>& labels);

/// Maximal 8-connected components with area >= min_area, in order of their
/// first pixel in raster order.
std::vector<Region> connected_regions(const BinaryMask& mask, std::size_t min_area = 1);

/// 0.05% of the image area, at least one pixel.
std::size_t default_min_area(int width, int height);

struct RegionStats {
  double centrality = 0.0;       // c
  double normalized_area = 0.0;  // a / (w*h)
  double solidity = 0.0;
  double compactness = 0.0;      // 4*pi*a / perimeter^2, clipped to [0,1]
  double coverage = 0.0;         // a / bounding-box area
};

double centrality(PointF centroid, int width, int height);
RegionStats region_stats(const Region& rg, int width, int height);

// ---- convex hull ----------------------------------------------------------

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> points);

/// Row spans [x_min, x_max] of the pixel centers inside or on a convex
/// polygon (also handles single points and segments).
struct HullSpans {
  int y0 = 0;
  std::vector<std::pair<int, int>> rows;  // x_min > x_max marks an empty row
  std::size_t count() const;
};
HullSpans rasterize_hull(const std::vector<Point>& hull);

/// Rasterized convex hull of the union of all region pixels.
BinaryMask convex_hull_mask(const std::vector<Region>& regions, int width, int height);
BinaryMask convex_hull_mask(const BinaryMask& mask);

// ---- distance transform ---------------------------------------------------

/// Exact Euclidean distance from each set pixel to the nearest unset pixel,
/// with everything outside the image counted as unset. Unset pixels hold 0.
PlaneMap distance_transform(const BinaryMask& mask);
/// Squared distances as exact integers, same convention.
Grid<std::int64_t> squared_distance_transform(const BinaryMask& mask);

// ---- small morphology helpers used by several modules ----------------------

BinaryMask dilate(const BinaryMask& mask, int radius);
/// Pixels outside the image count as set, so the frame does not erode.
BinaryMask erode(const BinaryMask& mask, int radius);
/// Dilation followed by erosion with the same disk.
BinaryMask close(const BinaryMask& mask, int radius);
/// Fills background components that do not reach the image frame.
BinaryMask fill_holes(const BinaryMask& mask);

/// Chain length with unit axial steps and sqrt(2) diagonal steps.
double chain_length(const std::vector<Point>& chain, bool closed);

}  // namespace lesion
