#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "lesionkit/cluster.hpp"
#include "lesionkit/codec.hpp"
#include "lesionkit/config.hpp"
#include "lesionkit/descriptors.hpp"
#include "lesionkit/ensemble.hpp"
#include "lesionkit/pipeline.hpp"
#include "lesionkit/region.hpp"
#include "lesionkit/synth.hpp"

namespace py = pybind11;
using namespace lesion;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage image_from(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionMismatchError("image must have shape (height, width, 3)");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  if (w == 0 || h == 0) throw EmptyInputError("image is empty");
  return RasterImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

py::array_t<std::uint8_t> image_to(const RasterImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
  std::memcpy(out.mutable_data(), img.bytes().data(), img.bytes().size());
  return out;
}

BinaryMask mask_from(const U8Array& a) {
  if (a.ndim() != 2) throw DimensionMismatchError("mask must be two-dimensional");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> v(a.data(), a.data() + a.size());
  for (auto& b : v) b = b ? 1 : 0;
  return BinaryMask(w, h, std::move(v));
}

py::array_t<bool> mask_to(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  bool* p = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = m[i] != 0;
  return out;
}

template <class T>
py::array_t<T> grid_to(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::memcpy(out.mutable_data(), g.values().data(), g.size() * sizeof(T));
  return out;
}

PipelineConfig config_from(const std::optional<std::string>& toml) {
  return toml ? parse_config(*toml) : PipelineConfig{};
}

py::dict segment(const U8Array& image, const std::optional<std::string>& config,
                 const std::optional<std::string>& prototypes, std::uint64_t seed) {
  const RasterImage img = image_from(image);
  const PipelineConfig cfg = config_from(config);
  std::optional<cluster::PrototypeStore> store;
  if (prototypes) store = cluster::PrototypeStore::from_json(*prototypes);
  pipeline::Segmentation seg;
  {
    py::gil_scoped_release release;
    seg = pipeline::segment(img, cfg, store ? &*store : nullptr, seed);
  }
  py::dict maps, conf;
  for (const auto& m : seg.maps) {
    const std::string name(source_name(m.source));
    maps[name.c_str()] = mask_to(m.mask);
    conf[name.c_str()] = m.confidence;
  }
  py::dict out;
  out["final_mask"] = mask_to(seg.final_mask);
  out["type_maps"] = maps;
  out["type_confidence"] = conf;
  out["votes"] = grid_to(seg.confidence.votes);
  out["candidate_count"] = seg.candidates.size();
  return out;
}

py::dict kmeans(const U8Array& image, int k, std::uint64_t seed) {
  const RasterImage img = image_from(image);
  const cluster::ClusterLabeling cl = cluster::kmeans_rgb(img, k, seed);
  py::array_t<double> centers({static_cast<py::ssize_t>(cl.centers.size()), py::ssize_t{3}});
  for (std::size_t i = 0; i < cl.centers.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) centers.mutable_at(i, c) = cl.centers[i][c];
  py::dict out;
  out["labels"] = grid_to(cl.labels);
  out["centers"] = centers;
  out["empty"] = cl.empty;
  out["wcss_history"] = cl.wcss_history;
  out["iterations"] = cl.iterations;
  return out;
}

py::dict descriptors(const U8Array& image, std::uint64_t seed) {
  const RasterImage img = image_from(image);
  desc::DescriptorBundle b;
  {
    py::gil_scoped_release release;
    b = desc::extract_descriptors(img, seed);
  }
  py::dict out;
  const auto& sch = desc::schema();
  for (std::size_t t = 0; t < sch.size(); ++t) {
    const auto& rows = b.lists[t];
    py::array_t<double> a({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(sch[t].arity)});
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c) a.mutable_at(r, c) = rows[r][c];
    out[std::string(sch[t].name).c_str()] = a;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Skin lesion segmentation and description core";

  static py::exception<Error> base(m, "LesionError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("decode_image", [](py::bytes data) {
    const std::string s = data;
    return image_to(decode_image({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}));
  }, py::arg("data"), "Decode PNG or JPEG bytes to an (h, w, 3) uint8 array.");
  m.def("load_image", [](const std::string& path) { return image_to(load_image(path)); }, py::arg("path"));
  m.def("load_mask", [](const std::string& path) { return mask_to(load_mask(path)); }, py::arg("path"));
  m.def("encode_png", [](const U8Array& image) {
    const auto bytes = encode_png(image_from(image));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }, py::arg("image"));

  m.def("default_config", [] { return dump_config(PipelineConfig{}); }, "Default configuration as TOML.");
  m.def("segment", &segment, py::arg("image"), py::arg("config") = std::nullopt,
        py::arg("prototypes") = std::nullopt, py::arg("seed") = 0,
        "Per-type maps, vote map and final mask. `config` is TOML text, `prototypes` the store JSON.");
  m.def("evaluate_mask", [](const U8Array& pred, const U8Array& truth) {
    return ensemble::evaluate_mask(mask_from(pred), mask_from(truth));
  }, py::arg("pred"), py::arg("truth"), "Sensitivity times specificity.");

  m.def("kmeans", &kmeans, py::arg("image"), py::arg("k"), py::arg("seed") = 0);
  m.def("connected_components", [](const U8Array& mask) {
    const ComponentLabels cl = label_components(mask_from(mask));
    return py::make_tuple(grid_to(cl.ids), cl.count);
  }, py::arg("mask"), "8-connected component ids (-1 for unset) and their count.");
  m.def("convex_hull_mask", [](const U8Array& mask) { return mask_to(convex_hull_mask(mask_from(mask))); },
        py::arg("mask"));
  m.def("distance_transform", [](const U8Array& mask) { return grid_to(distance_transform(mask_from(mask))); },
        py::arg("mask"));

  m.def("schema", [] {
    py::list out;
    for (const auto& t : desc::schema()) out.append(py::make_tuple(std::string(t.name), t.arity));
    return out;
  }, "Descriptor types in feature order as (name, arity).");
  m.def("descriptors", &descriptors, py::arg("image"), py::arg("seed") = 0,
        "Descriptor rows per type as float64 arrays.");
  m.def("descriptors_csv", [](const U8Array& image, std::uint64_t seed) {
    const RasterImage img = image_from(image);
    return desc::to_csv(desc::extract_descriptors(img, seed));
  }, py::arg("image"), py::arg("seed") = 0);

  m.def("synth", [](std::uint64_t seed, int index, int size) {
    synth::SynthOptions o;
    o.width = o.height = size;
    const synth::SynthSample s = synth::generate(seed, index, o);
    return py::make_tuple(image_to(s.image), mask_to(s.truth), std::string(synth::shape_name(s.shape)));
  }, py::arg("seed"), py::arg("index"), py::arg("size") = 128, "Synthetic (image, truth, shape name).");
}
