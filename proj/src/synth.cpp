#include "lesionkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "lesionkit/codec.hpp"
#include "lesionkit/random.hpp"

namespace lesion::synth {
namespace {

using Color = std::array<double, 3>;

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

Color mix(const Color& a, const Color& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

Color jitter(Rng& rng, Color c, double amount) {
  for (double& v : c) v += rng.uniform(-amount, amount);
  return c;
}

}  // namespace

std::string_view shape_name(LesionShape s) {
  switch (s) {
    case LesionShape::Disk: return "disk";
    case LesionShape::Blob: return "blob";
    case LesionShape::Annulus: return "annulus";
  }
  return "?";
}

SynthSample generate(std::uint64_t seed, int index, const SynthOptions& opts) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  const int w = opts.width, h = opts.height;
  SynthSample s;
  char id[32];
  std::snprintf(id, sizeof id, "synth_%04d", index);
  s.id = id;
  s.shape = static_cast<LesionShape>(index % kShapeCount);
  s.image = RasterImage(w, h);
  s.truth = BinaryMask(w, h);

  const Color skin = jitter(rng, {222.0, 178.0, 150.0}, 14.0);
  static constexpr Color kFamilies[kShapeCount] = {{92.0, 58.0, 42.0}, {150.0, 74.0, 72.0}, {100.0, 92.0, 124.0}};
  const Color lesion = jitter(rng, kFamilies[static_cast<int>(s.shape)], 16.0);
  const double shade_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double shade = rng.uniform(2.0, 6.0);

  const double side = std::min(w, h);
  const double cx = 0.5 * (w - 1) + rng.uniform(-0.08, 0.08) * side;
  const double cy = 0.5 * (h - 1) + rng.uniform(-0.08, 0.08) * side;
  const double radius = rng.uniform(0.2, 0.3) * side;
  std::array<double, 3> amp{}, phase{};
  if (s.shape == LesionShape::Blob)
    for (int k = 0; k < 3; ++k) {
      amp[static_cast<std::size_t>(k)] = rng.uniform(0.04, 0.13);
      phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
  const double inner = rng.uniform(0.42, 0.58) * radius;
  const Color center_tone = mix(lesion, skin, rng.uniform(0.45, 0.6));
  const double mottle_phase = rng.uniform(0.0, 10.0);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double r = std::hypot(dx, dy), th = std::atan2(dy, dx);
      double outline = radius;
      for (int k = 0; k < 3; ++k)
        outline *= 1.0 + amp[static_cast<std::size_t>(k)] * std::cos((k + 2) * th + phase[static_cast<std::size_t>(k)]);
      const double sd = r - outline;  // signed distance proxy, negative inside
      if (sd <= 0.0) s.truth(x, y) = 1;

      const double ramp = ((x - 0.5 * w) * std::cos(shade_angle) + (y - 0.5 * h) * std::sin(shade_angle)) / side;
      Color c = {skin[0] + shade * ramp, skin[1] + shade * ramp, skin[2] + shade * ramp};
      const double vignette = 4.0 * std::pow(std::hypot(x - 0.5 * w, y - 0.5 * h) / (0.7 * side), 2.0);
      for (double& v : c) v -= vignette;

      Color body = lesion;
      const double mottle = 3.0 * std::sin(0.35 * x + mottle_phase) * std::cos(0.29 * y - mottle_phase);
      for (double& v : body) v += mottle + 4.0 * (r / std::max(outline, 1.0));
      if (s.shape == LesionShape::Annulus) body = mix(body, center_tone, 1.0 - smoothstep(inner - 1.5, inner + 1.5, r));
      c = mix(c, body, 1.0 - smoothstep(-1.2, 1.2, sd));

      for (double& v : c) v += opts.noise * rng.normal();
      s.image.set(x, y,
                  {static_cast<std::uint8_t>(std::clamp(std::lround(c[0]), 0L, 255L)),
                   static_cast<std::uint8_t>(std::clamp(std::lround(c[1]), 0L, 255L)),
                   static_cast<std::uint8_t>(std::clamp(std::lround(c[2]), 0L, 255L))});
    }

  // Hairs: quadratic curves from one frame side to another.
  const int hairs = static_cast<int>(rng.index(static_cast<std::uint64_t>(opts.max_hairs) + 1));
  for (int hh = 0; hh < hairs; ++hh) {
    auto frame_point = [&] {
      const double t = rng.uniform();
      switch (rng.index(4)) {
        case 0: return std::array<double, 2>{t * (w - 1), 0.0};
        case 1: return std::array<double, 2>{t * (w - 1), h - 1.0};
        case 2: return std::array<double, 2>{0.0, t * (h - 1)};
        default: return std::array<double, 2>{w - 1.0, t * (h - 1)};
      }
    };
    const auto a = frame_point(), b = frame_point();
    const std::array<double, 2> ctrl = {rng.uniform(0.2, 0.8) * w, rng.uniform(0.2, 0.8) * h};
    const double thick = rng.uniform(0.5, 1.1);
    const Color tone = jitter(rng, {48.0, 36.0, 30.0}, 10.0);
    for (int step = 0; step <= 600; ++step) {
      const double t = step / 600.0, u = 1.0 - t;
      const double px = u * u * a[0] + 2 * u * t * ctrl[0] + t * t * b[0];
      const double py = u * u * a[1] + 2 * u * t * ctrl[1] + t * t * b[1];
      for (int yy = static_cast<int>(std::floor(py - thick)); yy <= static_cast<int>(std::ceil(py + thick)); ++yy)
        for (int xx = static_cast<int>(std::floor(px - thick)); xx <= static_cast<int>(std::ceil(px + thick)); ++xx) {
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          if (std::hypot(xx - px, yy - py) > thick) continue;
          s.image.set(xx, yy,
                      {static_cast<std::uint8_t>(tone[0]), static_cast<std::uint8_t>(tone[1]),
                       static_cast<std::uint8_t>(tone[2])});
        }
    }
  }
  return s;
}

std::vector<std::string> write_dataset(const std::filesystem::path& dir, int count, std::uint64_t seed,
                                       const SynthOptions& opts) {
  std::filesystem::create_directories(dir);
  std::string csv = "image,disk,blob,annulus\n";
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    const SynthSample s = generate(seed, i, opts);
    write_file(dir / (s.id + ".png"), encode_png(s.image));
    write_file(dir / (s.id + "_segmentation.png"), encode_png(s.truth));
    csv += s.id;
    for (int k = 0; k < kShapeCount; ++k) csv += k == static_cast<int>(s.shape) ? ",1.0" : ",0.0";
    csv += "\n";
    ids.push_back(s.id);
  }
  write_text(dir / "labels.csv", csv);
  return ids;
}

}  // namespace lesion::synth
