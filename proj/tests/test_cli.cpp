#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lesionkit/cli.hpp"
#include "lesionkit/codec.hpp"
#include "lesionkit/descriptors.hpp"
#include "lesionkit/random.hpp"
#include "tempdir.hpp"

using namespace lesion;
using nlohmann::json;
using testutil::slurp;
using testutil::TempDir;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "lesionkit");
  return cli::run_command(args);
}

}  // namespace

TEST_CASE("cli: usage and data errors") {
  CHECK(run({}) == cli::kUsage);
  CHECK(run({"frobnicate"}) == cli::kUsage);
  CHECK(run({"segment"}) == cli::kUsage);
  CHECK(run({"segment", "x", "--layout", "tar"}) == cli::kUsage);
  CHECK(run({"--help"}) == cli::kOk);
  TempDir out("cli_err");
  CHECK(run({"--out-dir", out.path().string(), "segment", "/nonexistent/data"}) == cli::kDataError);
  testutil::spit(out / "bad.toml", "[nope]\n");
  CHECK(run({"--config", (out / "bad.toml").string(), "--print-config"}) == cli::kDataError);
  CHECK(run({"--print-config"}) == cli::kOk);
}

TEST_CASE("cli: segment, evaluate and determinism") {
  TempDir data("cli_data"), a("cli_a"), b("cli_b");
  REQUIRE(run({"--seed", "3", "synth", data.path().string(), "--count", "4", "--size", "64"}) == cli::kOk);
  CHECK(std::filesystem::exists(data / "labels.csv"));

  REQUIRE(run({"--out-dir", a.path().string(), "learn-prototypes", data.path().string()}) == cli::kOk);
  const std::string protos = (a / "prototypes.json").string();
  CHECK(std::filesystem::exists(protos));

  for (const TempDir* out : {&a, &b})
    REQUIRE(run({"--out-dir", out->path().string(), "--seed", "9", "segment", data.path().string(), "--prototypes", protos}) ==
            cli::kOk);
  const json summary = json::parse(slurp(a / "segment_summary.json"));
  REQUIRE(summary.size() == 4);
  const std::string id = summary[0]["id"];
  CHECK(summary[0]["types"].size() == 7);
  const RasterImage mask = load_image((a / (id + "_segmentation.png")).string());
  CHECK(mask.width() == 64);
  CHECK(std::filesystem::exists(a / "types" / (id + "_kmeans-cra.png")));
  CHECK(slurp(a / "segment_summary.json") == slurp(b / "segment_summary.json"));
  CHECK(slurp(a / (id + "_segmentation.png")) == slurp(b / (id + "_segmentation.png")));

  REQUIRE(run({"--out-dir", a.path().string(), "evaluate-seg", data.path().string(), "--prototypes", protos}) == cli::kOk);
  const json rep = json::parse(slurp(a / "segmentation_report.json"));
  for (const char* key : {"per_type", "ensemble", "max_per_image", "dominating_counts", "images", "per_image"})
    CHECK(rep.contains(key));
  CHECK(rep["per_type"].size() == 7);
  CHECK(rep["images"] == 4);
  CHECK(rep["max_per_image"].get<double>() >= rep["ensemble"].get<double>());
  CHECK(std::filesystem::exists(a / "segmentation_report.svg"));

  REQUIRE(run({"--out-dir", a.path().string(), "extract", data.path().string()}) == cli::kOk);
  REQUIRE(run({"--out-dir", b.path().string(), "extract", data.path().string()}) == cli::kOk);
  CHECK(slurp(a / "descriptors" / (id + ".csv")) == slurp(b / "descriptors" / (id + ".csv")));
  CHECK(desc::from_csv(slurp(a / "descriptors" / (id + ".csv"))).row_count() > 0);
}

TEST_CASE("cli: cv, train and predict on a separable descriptor set") {
  TempDir data("cli_cv");
  Rng rng(71);
  std::string manifest = "image,mask,label\n";
  for (int i = 0; i < 30; ++i) {
    const std::string id = "s" + std::to_string(i);
    const int label = i % 3;
    write_file(data / ("img/" + id + ".png"), encode_png(RasterImage(4, 4)));
    manifest += "img/" + id + ".png,,class" + std::to_string(label) + "\n";
    desc::DescriptorBundle bundle;
    for (std::size_t t = 0; t < desc::schema().size(); ++t)
      for (int r = 0; r < 4; ++r) {
        desc::Row row;
        for (int j = 0; j < desc::schema()[t].arity; ++j) row.push_back(rng.normal() + 10.0 * label);
        bundle.add(t, row);
      }
    testutil::spit(data / ("desc/" + id + ".csv"), desc::to_csv(bundle));
  }
  testutil::spit(data / "manifest.csv", manifest);
  const std::string root = (data / "manifest.csv").string(), descs = (data / "desc").string();
  TempDir out("cli_cv_out");
  const std::string od = out.path().string();

  REQUIRE(run({"--out-dir", od, "cv", root, "--layout", "flat-csv", "--descriptors", descs, "--folds", "5"}) == cli::kOk);
  const json cv = json::parse(slurp(out / "cv.json"));
  CHECK(cv["accuracy"] == 1.0);
  CHECK(cv["folds"] == 5);
  CHECK(cv["confusion"].size() == 3);
  CHECK(std::filesystem::exists(out / "confusion.svg"));
  CHECK(slurp(out / "confusion_zero_diagonal.csv").find("0,0,0") != std::string::npos);

  REQUIRE(run({"--out-dir", od, "train", root, "--layout", "flat-csv", "--descriptors", descs}) == cli::kOk);
  REQUIRE(run({"--out-dir", od, "predict", root, "--layout", "flat-csv", "--descriptors", descs, "--model",
               (out / "model.json").string()}) == cli::kOk);
  const std::string preds = slurp(out / "predictions.csv");
  CHECK(preds.find("s0,class0\n") != std::string::npos);
  CHECK(preds.find("s4,class1\n") != std::string::npos);
  CHECK(preds.find("s29,class2\n") != std::string::npos);

  CHECK(run({"--out-dir", od, "cv", root, "--layout", "flat-csv", "--descriptors", descs, "--folds", "20"}) ==
        cli::kDataError);
}
