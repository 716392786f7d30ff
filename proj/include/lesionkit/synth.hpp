#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lesionkit/image.hpp"

namespace lesion::synth {

enum class LesionShape { Disk = 0, Blob = 1, Annulus = 2 };
inline constexpr int kShapeCount = 3;
std::string_view shape_name(LesionShape s);

struct SynthOptions {
  int width = 128;
  int height = 128;
  int max_hairs = 4;
  double noise = 4.0;  // per-channel Gaussian noise, intensity units
};

struct SynthSample {
  std::string id;
  LesionShape shape = LesionShape::Disk;
  RasterImage image;
  /// Filled lesion outline; an annulus counts with its lighter center.
  BinaryMask truth;
};

/// Skin-toned background with shading and noise, one lesion near the center
/// (disk, lobed blob or annulus, chosen by index % 3) with a shape-specific
/// color family, and up to `max_hairs` dark curves drawn over everything.
/// Depends only on (seed, index).
SynthSample generate(std::uint64_t seed, int index, const SynthOptions& opts = {});

/// Writes <id>.png, <id>_segmentation.png and labels.csv (image + one-hot
/// columns disk, blob, annulus) into `dir`. Returns the ids.
std::vector<std::string> write_dataset(const std::filesystem::path& dir, int count, std::uint64_t seed,
                                       const SynthOptions& opts = {});

}  // namespace lesion::synth
