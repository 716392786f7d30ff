#include "lesionkit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>

#include "CLI11.hpp"
#include "lesionkit/classify.hpp"
#include "lesionkit/codec.hpp"
#include "lesionkit/config.hpp"
#include "lesionkit/dataset.hpp"
#include "lesionkit/descriptors.hpp"
#include "lesionkit/pipeline.hpp"
#include "lesionkit/report.hpp"
#include "lesionkit/server.hpp"
#include "lesionkit/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace lesion::cli {
namespace {

std::mutex log_mu;

void log(const std::string& msg) {
  std::lock_guard lock(log_mu);
  std::cerr << "lesionkit: " << msg << "\n";
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> max_dim;
  std::string out_dir = "out";
  bool print_config = false;
};

struct DataArgs {
  std::string root;
  std::string layout = "isic";
  std::string prototypes;
};

PipelineConfig resolve_config(const Globals& g) {
  PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  if (g.seed) cfg.run.seed = *g.seed;
  if (g.jobs) cfg.run.jobs = *g.jobs;
  if (g.max_dim) cfg.run.max_dim = *g.max_dim;
  cfg.cluster.border = cfg.threshold.border;
  cfg.validate();
  return cfg;
}

DatasetManifest load_manifest(const DataArgs& d) {
  DatasetManifest m = ingest(d.root, layout_from_name(d.layout));
  for (const auto& w : m.warnings) log("warning: " + w);
  log("dataset: " + std::to_string(m.entries.size()) + " images, " + std::to_string(m.classes.size()) + " classes");
  return m;
}

std::optional<cluster::PrototypeStore> load_store(const std::string& path) {
  if (path.empty()) return std::nullopt;
  const auto bytes = read_file(path);
  return cluster::PrototypeStore::from_json(std::string(bytes.begin(), bytes.end()));
}

void add_data_args(CLI::App* sub, DataArgs& d, bool prototypes) {
  sub->add_option("root", d.root, "Dataset directory (isic) or manifest CSV (flat-csv)")->required();
  sub->add_option("--layout", d.layout, "Dataset layout: isic or flat-csv")->check(CLI::IsMember({"isic", "flat-csv"}));
  if (prototypes) sub->add_option("--prototypes", d.prototypes, "Prototype store from learn-prototypes");
}

// Per-image failures are logged; only a run where nothing worked fails.
bool all_failed(const std::vector<std::string>& errors) {
  return std::all_of(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); });
}

// Descriptor bundles of the labelled entries, read from CSVs when a
// directory is given and extracted otherwise.
struct LabelledBundles {
  std::vector<std::string> ids;
  std::vector<desc::DescriptorBundle> bundles;
  std::vector<int> labels;
};

LabelledBundles labelled_bundles(const DatasetManifest& m, const PipelineConfig& cfg, const std::string& desc_dir) {
  std::vector<const DatasetEntry*> entries;
  for (const auto& e : m.entries) {
    if (e.label) entries.push_back(&e);
    else log("warning: " + e.id + " has no label and is skipped");
  }
  std::vector<std::optional<desc::DescriptorBundle>> found(entries.size());
  pipeline::parallel_for(entries.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = *entries[i];
    try {
      if (!desc_dir.empty()) {
        const auto bytes = read_file(fs::path(desc_dir) / (e.id + ".csv"));
        found[i] = desc::from_csv(std::string(bytes.begin(), bytes.end()));
      } else {
        const RasterImage img = pipeline::load_entry(e, cfg.run.max_dim).image;
        desc::ExtractOptions opts;
        opts.cluster = cfg.cluster;
        found[i] = desc::extract_descriptors(img, pipeline::image_seed(cfg.run.seed, e.id), opts);
      }
    } catch (const Error& err) {
      log("error: " + e.id + ": " + err.what());
    }
  });
  LabelledBundles out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (found[i]) {
      out.ids.push_back(entries[i]->id);
      out.bundles.push_back(std::move(*found[i]));
      out.labels.push_back(*entries[i]->label);
    }
  if (out.bundles.empty()) throw DataError("no labelled image could be described");
  return out;
}

std::vector<const desc::DescriptorBundle*> pointers(const std::vector<desc::DescriptorBundle>& b) {
  std::vector<const desc::DescriptorBundle*> p;
  for (const auto& x : b) p.push_back(&x);
  return p;
}

int cmd_segment(const Globals& g, const DataArgs& d) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const auto store = load_store(d.prototypes);
  if (!store) log("note: no prototype store given; kmeans-cra and kmeans-hull maps stay empty");
  const fs::path out(g.out_dir);
  std::vector<std::string> errors(m.entries.size());
  std::vector<nlohmann::json> rows(m.entries.size());
  pipeline::parallel_for(m.entries.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = m.entries[i];
    try {
      const RasterImage img = pipeline::load_entry(e, cfg.run.max_dim).image;
      const auto s = pipeline::segment(img, cfg, store ? &*store : nullptr, pipeline::image_seed(cfg.run.seed, e.id));
      write_file(out / (e.id + "_segmentation.png"), encode_png(s.final_mask));
      nlohmann::json row = {{"id", e.id}, {"width", img.width()}, {"height", img.height()}};
      for (const auto& tm : s.maps) {
        const std::string name(source_name(tm.source));
        write_file(out / "types" / (e.id + "_" + name + ".png"), encode_png(tm.mask));
        row["types"][name] = {{"confidence", tm.confidence}, {"selected", tm.selected}, {"area", count_set(tm.mask)}};
      }
      row["final_area"] = count_set(s.final_mask);
      rows[i] = row;
    } catch (const Error& err) {
      errors[i] = err.what();
      rows[i] = {{"id", e.id}, {"error", err.what()}};
      log("error: " + e.id + ": " + err.what());
    }
  });
  write_text(out / "segment_summary.json", nlohmann::json(rows).dump(2) + "\n");
  log("wrote masks for " + std::to_string(m.entries.size()) + " images to " + out.string());
  return all_failed(errors) ? kDataError : kOk;
}

int cmd_learn(const Globals& g, const DataArgs& d) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const cluster::PrototypeStore store = pipeline::learn_prototypes(m, cfg);
  const fs::path path = fs::path(g.out_dir) / "prototypes.json";
  write_text(path, store.to_json() + "\n");
  log("learned " + std::to_string(store.prototypes.size()) + " prototypes -> " + path.string());
  return kOk;
}

int cmd_extract(const Globals& g, const DataArgs& d) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const fs::path dir = fs::path(g.out_dir) / "descriptors";
  std::vector<std::string> errors(m.entries.size());
  pipeline::parallel_for(m.entries.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = m.entries[i];
    try {
      const RasterImage img = pipeline::load_entry(e, cfg.run.max_dim).image;
      desc::ExtractOptions opts;
      opts.cluster = cfg.cluster;
      write_text(dir / (e.id + ".csv"), desc::to_csv(desc::extract_descriptors(img, pipeline::image_seed(cfg.run.seed, e.id), opts)));
    } catch (const Error& err) {
      errors[i] = err.what();
      log("error: " + e.id + ": " + err.what());
    }
  });
  log("descriptor CSVs in " + dir.string());
  return all_failed(errors) ? kDataError : kOk;
}

classify::FitOptions fit_options(const PipelineConfig& cfg, int components) {
  classify::FitOptions f;
  f.components = components >= 0 ? components : cfg.classify.components;
  f.equal_priors = cfg.classify.equal_priors;
  return f;
}

int cmd_train(const Globals& g, const DataArgs& d, const std::string& desc_dir, int components) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const LabelledBundles lb = labelled_bundles(m, cfg, desc_dir);
  const classify::TrainedModel model = classify::fit(pointers(lb.bundles), lb.labels, m.classes, fit_options(cfg, components));
  const fs::path path = fs::path(g.out_dir) / "model.json";
  write_text(path, model.to_json() + "\n");
  log("model with " + std::to_string(model.model.components()) + " components -> " + path.string());
  return kOk;
}

int cmd_cv(const Globals& g, const DataArgs& d, const std::string& desc_dir, int components, int folds, bool per_type) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const LabelledBundles lb = labelled_bundles(m, cfg, desc_dir);
  classify::CvOptions opts;
  opts.folds = folds > 0 ? folds : cfg.classify.folds;
  opts.seed = cfg.run.seed;
  opts.fit = fit_options(cfg, components);
  const auto ptrs = pointers(lb.bundles);
  const classify::CvResult r = classify::cross_validate(ptrs, lb.labels, m.classes, opts);
  std::vector<classify::TypeAccuracy> pt;
  if (per_type) pt = classify::per_type_accuracy(ptrs, lb.labels, m.classes, opts);
  const fs::path out(g.out_dir);
  write_text(out / "cv.json", report::cv_json(r, m.classes, lb.ids, pt));
  write_text(out / "confusion.csv", report::confusion_csv(r.confusion, m.classes));
  write_text(out / "confusion_zero_diagonal.csv", report::confusion_csv(r.confusion, m.classes, true));
  write_text(out / "confusion.svg", report::confusion_svg(r.confusion, m.classes));
  write_text(out / "confusion_zero_diagonal.svg", report::confusion_svg(r.confusion, m.classes, true));
  char line[96];
  std::snprintf(line, sizeof line, "%d-fold accuracy: %.4f (%zu images)\n", opts.folds, r.accuracy, lb.bundles.size());
  std::cout << line;
  for (const auto& t : pt) {
    std::snprintf(line, sizeof line, "  %-20s %.4f\n", t.type.c_str(), t.accuracy);
    std::cout << line;
  }
  return kOk;
}

int cmd_predict(const Globals& g, const DataArgs& d, const std::string& model_path, const std::string& desc_dir) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const auto bytes = read_file(model_path);
  const classify::TrainedModel model = classify::TrainedModel::from_json(std::string(bytes.begin(), bytes.end()));
  std::vector<std::string> rows(m.entries.size());
  pipeline::parallel_for(m.entries.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = m.entries[i];
    try {
      desc::DescriptorBundle b;
      if (!desc_dir.empty()) {
        const auto csv = read_file(fs::path(desc_dir) / (e.id + ".csv"));
        b = desc::from_csv(std::string(csv.begin(), csv.end()));
      } else {
        desc::ExtractOptions opts;
        opts.cluster = cfg.cluster;
        b = desc::extract_descriptors(pipeline::load_entry(e, cfg.run.max_dim).image, pipeline::image_seed(cfg.run.seed, e.id), opts);
      }
      rows[i] = e.id + "," + model.labels[static_cast<std::size_t>(classify::predict(model, b).label)];
    } catch (const Error& err) {
      rows[i] = e.id + ",";
      log("error: " + e.id + ": " + err.what());
    }
  });
  std::string csv = "image,predicted\n";
  for (const auto& r : rows) csv += r + "\n";
  write_text(fs::path(g.out_dir) / "predictions.csv", csv);
  return kOk;
}

int cmd_evaluate(const Globals& g, const DataArgs& d) {
  const PipelineConfig cfg = resolve_config(g);
  const DatasetManifest m = load_manifest(d);
  const auto store = load_store(d.prototypes);
  if (!store) log("note: no prototype store given; kmeans-cra and kmeans-hull maps stay empty");
  const ensemble::SegmentationReport r = pipeline::evaluate_segmentation(m, cfg, store ? &*store : nullptr);
  for (const auto& s : r.per_image)
    if (s.error) log("error: " + s.id + ": " + *s.error);
  if (r.images == 0) throw DataError("no image with a truth mask could be scored");
  const fs::path out(g.out_dir);
  write_text(out / "segmentation_report.json", report::segmentation_json(r));
  write_text(out / "segmentation_report.txt", report::segmentation_text(r));
  write_text(out / "segmentation_report.svg", report::segmentation_svg(r));
  std::cout << report::segmentation_text(r);
  return kOk;
}

int cmd_serve(const Globals& g, const DataArgs& d, const std::string& host, int port) {
  const PipelineConfig cfg = resolve_config(g);
  DatasetManifest m = load_manifest(d);
  fs::create_directories(g.out_dir);
  serve::ReviewService svc(std::move(m), cfg, load_store(d.prototypes), fs::path(g.out_dir) / "selections.json");
  log("serving on http://" + host + ":" + std::to_string(port) + " (selections: " + svc.selections_path().string() + ")");
  serve::run_http(svc, host, port);
  return kOk;
}

int cmd_synth(const Globals& g, const std::string& dir, int count, int size) {
  const PipelineConfig cfg = resolve_config(g);
  synth::SynthOptions opts;
  opts.width = opts.height = size;
  const auto ids = synth::write_dataset(dir, count, cfg.run.seed, opts);
  log("wrote " + std::to_string(ids.size()) + " synthetic images to " + dir);
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Skin lesion segmentation and classification toolkit", "lesionkit"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "TOML configuration file");
  app.add_option("--seed", g.seed, "Root seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--max-dim", g.max_dim, "Downsample images larger than this, 0 keeps full size")->check(CLI::NonNegativeNumber);
  app.add_flag("--print-config", g.print_config, "Print the effective configuration as TOML and exit");

  DataArgs d;
  auto* segment = app.add_subcommand("segment", "Final and per-type lesion masks");
  add_data_args(segment, d, true);
  auto* learn = app.add_subcommand("learn-prototypes", "Learn lesion color prototypes from truth masks");
  add_data_args(learn, d, false);
  auto* extract = app.add_subcommand("extract", "Write one descriptor CSV per image");
  add_data_args(extract, d, false);

  std::string desc_dir, model_path, host = "127.0.0.1", synth_dir;
  int components = -1, folds = 0, port = 8080, count = 200, size = 128;
  bool per_type = false;
  auto* train = app.add_subcommand("train", "Fit the histogram + PCA + LDA classifier");
  add_data_args(train, d, false);
  train->add_option("--descriptors", desc_dir, "Reuse descriptor CSVs from this directory");
  train->add_option("--components", components, "PCA components (default from config)");
  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_data_args(cv, d, false);
  cv->add_option("--descriptors", desc_dir, "Reuse descriptor CSVs from this directory");
  cv->add_option("--components", components, "PCA components (default from config)");
  cv->add_option("--folds", folds, "Fold count (default from config)")->check(CLI::Range(2, 1000));
  cv->add_flag("--per-type", per_type, "Also cross-validate each descriptor type alone");
  auto* predict = app.add_subcommand("predict", "Classify images with a trained model");
  add_data_args(predict, d, false);
  predict->add_option("--model", model_path, "Model file from train")->required();
  predict->add_option("--descriptors", desc_dir, "Reuse descriptor CSVs from this directory");
  auto* evaluate = app.add_subcommand("evaluate-seg", "Segmentation accuracy per type, ensemble and max-per-image");
  add_data_args(evaluate, d, true);
  auto* serve = app.add_subcommand("serve", "HTTP API for reviewing candidate masks");
  add_data_args(serve, d, true);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
  auto* synth = app.add_subcommand("synth", "Generate a synthetic lesion dataset");
  synth->add_option("dir", synth_dir, "Output directory")->required();
  synth->add_option("--count", count, "Number of images")->check(CLI::Range(1, 100000));
  synth->add_option("--size", size, "Image side length")->check(CLI::Range(32, 2048));

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (g.print_config) {
      std::cout << dump_config(resolve_config(g));
      return kOk;
    }
    if (*segment) return cmd_segment(g, d);
    if (*learn) return cmd_learn(g, d);
    if (*extract) return cmd_extract(g, d);
    if (*train) return cmd_train(g, d, desc_dir, components);
    if (*cv) return cmd_cv(g, d, desc_dir, components, folds, per_type);
    if (*predict) return cmd_predict(g, d, model_path, desc_dir);
    if (*evaluate) return cmd_evaluate(g, d);
    if (*serve) return cmd_serve(g, d, host, port);
    if (*synth) return cmd_synth(g, synth_dir, count, size);
    std::cerr << app.help();
    return kUsage;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return kDataError;
  } catch (const std::exception& e) {
    log(std::string("internal error: ") + e.what());
    return kInternal;
  }
}

}  // namespace lesion::cli
