#include <doctest.h>

#include <filesystem>
#include <string>

#include "detfuse/ensemble.hpp"
#include "detfuse/eval.hpp"
#include "detfuse/io.hpp"
#include "detfuse/synth.hpp"
#include "support/oracles.hpp"
#include "support/subprocess.hpp"

using namespace detfuse;
using detfuse::testutil::RunResult;
using detfuse::testutil::run_cli;
using detfuse::testutil::TempDir;

namespace {

std::filesystem::path write_fixture_manifest(const TempDir& tmp,
                                             std::uint64_t seed = 1,
                                             std::size_t n_images = 5) {
  const DatasetManifest m = oracle::synthetic_manifest(n_images, 4, 3, seed);
  const auto path = tmp.path() / "manifest.json";
  save_manifest(m, path);
  return path;
}

}  // namespace

TEST_CASE("cli reports its version and help") {
  TempDir tmp;
  CHECK(run_cli("--version", tmp.path()).exit_code == 0);
  const RunResult help = run_cli("--help", tmp.path());
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("fuse") != std::string::npos);
  CHECK(help.out.find("benchmark") != std::string::npos);
}

TEST_CASE("unknown subcommands and flags exit 1 with usage text") {
  TempDir tmp;
  const RunResult bad_cmd = run_cli("frobnicate", tmp.path());
  CHECK(bad_cmd.exit_code == 1);
  CHECK(bad_cmd.err.find("Usage") != std::string::npos);

  const RunResult bad_flag =
      run_cli("stats --manifest x.json --bogus", tmp.path());
  CHECK(bad_flag.exit_code == 1);
}

TEST_CASE("missing input files exit 2") {
  TempDir tmp;
  const RunResult r =
      run_cli("stats --manifest /nonexistent/m.json", tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("invalid input data exits 1") {
  TempDir tmp;
  testutil::spit(tmp.path() / "bad.json", "{ not json");
  const RunResult r = run_cli(
      "stats --manifest " + (tmp.path() / "bad.json").string(), tmp.path());
  CHECK(r.exit_code == 1);
}

TEST_CASE("eval of a perfect detection file prints 100.00 everywhere") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp);
  const DatasetManifest m = load_manifest(manifest_path);
  save_detections(oracle::perfect_detections(m, "perfect"), m.registry(),
                  tmp.path() / "perfect.json");

  const RunResult r = run_cli("eval --manifest " + manifest_path.string() +
                                  " --detections " +
                                  (tmp.path() / "perfect.json").string(),
                              tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("0.25,mAP,") != std::string::npos);
  CHECK(r.out.find("0.5,mAP,") != std::string::npos);
  CHECK(r.out.find("0.75,mAP,") != std::string::npos);
  CHECK(r.out.find("100.00") != std::string::npos);
}

TEST_CASE("single-model affirmative fuse without nms returns the input set") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 2);
  const DatasetManifest m = load_manifest(manifest_path);
  PerturbConfig cfg;
  cfg.seed = 3;
  cfg.jitter = 0.1;
  const DetectionFile input = generate(m, cfg, "solo");
  save_detections(input, m.registry(), tmp.path() / "solo.json");

  const RunResult r = run_cli(
      "fuse --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "solo.json").string() +
          " --strategy affirmative --no-nms --out " +
          (tmp.path() / "fused.json").string(),
      tmp.path());
  REQUIRE(r.exit_code == 0);

  const DetectionFile fused =
      load_detections(tmp.path() / "fused.json", m);
  CHECK(fused.model_id == "ensemble");
  REQUIRE(fused.detections.size() == input.detections.size());
  for (const auto& d : input.detections) {
    const bool found = std::any_of(
        fused.detections.begin(), fused.detections.end(),
        [&](const Detection& o) {
          return o.image_id == d.image_id && o.class_id == d.class_id &&
                 o.box == d.box && o.score == d.score;
        });
    CHECK(found);
  }
}

TEST_CASE("fuse then eval through the cli equals the library composition") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 4);
  const DatasetManifest m = load_manifest(manifest_path);
  for (int i = 0; i < 2; ++i) {
    PerturbConfig cfg;
    cfg.seed = 10 + static_cast<std::uint64_t>(i);
    cfg.jitter = 0.15;
    cfg.drop_rate = 0.1;
    const std::string id = i == 0 ? "synthA" : "synthB";
    save_detections(generate(m, cfg, id), m.registry(),
                    tmp.path() / (id + ".json"));
  }

  const RunResult fuse_run = run_cli(
      "fuse --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "synthA.json").string() + " " +
          (tmp.path() / "synthB.json").string() +
          " --strategy consensus --group-iou 0.5 --out " +
          (tmp.path() / "fused.json").string(),
      tmp.path());
  REQUIRE(fuse_run.exit_code == 0);
  const RunResult eval_run = run_cli(
      "eval --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "fused.json").string() + " --out " +
          (tmp.path() / "report.json").string(),
      tmp.path());
  REQUIRE(eval_run.exit_code == 0);

  // Library-side composition of the same pipeline.
  const DetectionFile a = load_detections(tmp.path() / "synthA.json", m);
  const DetectionFile b = load_detections(tmp.path() / "synthB.json", m);
  EnsembleConfig ecfg;
  ecfg.strategy = VotingStrategy::consensus;
  const EvalReport expected = evaluate(run_ensemble({a, b}, m, ecfg), m);

  const ReportSummary got = load_report_summary(tmp.path() / "report.json");
  REQUIRE(got.maps.size() == expected.thresholds.size());
  for (std::size_t t = 0; t < got.maps.size(); ++t) {
    CHECK(got.maps[t] == doctest::Approx(expected.thresholds[t].map)
                             .epsilon(1e-12));
  }
}

TEST_CASE("gen is byte-deterministic through the cli") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 6);
  const std::string gen_args =
      "gen --manifest " + manifest_path.string() +
      " --seed 7 --jitter 0.1 --drop 0.1 --fp 0.5 --model-id synthA --out ";
  REQUIRE(run_cli(gen_args + (tmp.path() / "a.json").string(), tmp.path())
              .exit_code == 0);
  REQUIRE(run_cli(gen_args + (tmp.path() / "b.json").string(), tmp.path())
              .exit_code == 0);
  CHECK(testutil::slurp(tmp.path() / "a.json") ==
        testutil::slurp(tmp.path() / "b.json"));
}

TEST_CASE("split writes a clean image-level partition") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 8, 10);
  const RunResult r = run_cli(
      "split --manifest " + manifest_path.string() +
          " --test-fraction 0.2 --seed 7 --out-train " +
          (tmp.path() / "train.json").string() + " --out-test " +
          (tmp.path() / "test.json").string(),
      tmp.path());
  REQUIRE(r.exit_code == 0);
  const DatasetManifest train = load_manifest(tmp.path() / "train.json");
  const DatasetManifest test = load_manifest(tmp.path() / "test.json");
  CHECK(train.images().size() == 8);
  CHECK(test.images().size() == 2);
  for (const auto& img : test.images()) {
    CHECK(train.find_image(img.id) == nullptr);
  }
}

TEST_CASE("stats emits the class distribution with a total row") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 3, 4);
  const DatasetManifest m = load_manifest(manifest_path);
  const RunResult r =
      run_cli("stats --manifest " + manifest_path.string(), tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("class,count\n") == 0);
  CHECK(r.out.find("total," + std::to_string(m.annotations().size())) !=
        std::string::npos);
}

TEST_CASE("benchmark over report jsons reproduces the golden table") {
  TempDir tmp;
  const char* yolact = R"({"detections_id": "YOLACT", "thresholds": [
    {"iou": 0.25, "map": 0.9188}, {"iou": 0.5, "map": 0.8195},
    {"iou": 0.75, "map": 0.598}]})";
  const char* yolov4 = R"({"detections_id": "YOLOv4", "thresholds": [
    {"iou": 0.25, "map": 0.6583}, {"iou": 0.5, "map": 0.5122},
    {"iou": 0.75, "map": 0.3155}]})";
  const char* cem = R"({"detections_id": "CEM", "thresholds": [
    {"iou": 0.25, "map": 0.8544}, {"iou": 0.5, "map": 0.755},
    {"iou": 0.75, "map": 0.6047}]})";
  testutil::spit(tmp.path() / "yolact.json", yolact);
  testutil::spit(tmp.path() / "yolov4.json", yolov4);
  testutil::spit(tmp.path() / "cem.json", cem);

  const RunResult r = run_cli(
      "benchmark --inputs " + (tmp.path() / "yolact.json").string() + " " +
          (tmp.path() / "yolov4.json").string() + " " +
          (tmp.path() / "cem.json").string() + " --out " +
          (tmp.path() / "table.csv").string(),
      tmp.path());
  REQUIRE(r.exit_code == 0);

  const std::string golden = testutil::slurp(
      std::filesystem::path(DETFUSE_TEST_DATA_DIR) / "benchmark_golden.csv");
  CHECK(testutil::slurp(tmp.path() / "table.csv") == golden);
}

TEST_CASE("benchmark rejects detection inputs without a manifest") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 3);
  const DatasetManifest m = load_manifest(manifest_path);
  save_detections(oracle::perfect_detections(m, "perfect"), m.registry(),
                  tmp.path() / "dets.json");
  const RunResult r = run_cli(
      "benchmark --inputs " + (tmp.path() / "dets.json").string(),
      tmp.path());
  CHECK(r.exit_code == 1);

  const RunResult ok = run_cli(
      "benchmark --inputs " + (tmp.path() / "dets.json").string() +
          " --manifest " + manifest_path.string(),
      tmp.path());
  REQUIRE(ok.exit_code == 0);
  CHECK(ok.out.find("perfect,100.00,100.00,100.00\n") != std::string::npos);
}

TEST_CASE("eval honors custom thresholds and stdout json") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 12);
  const DatasetManifest m = load_manifest(manifest_path);
  save_detections(oracle::perfect_detections(m, "perfect"), m.registry(),
                  tmp.path() / "perfect.json");

  const RunResult csv = run_cli(
      "eval --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "perfect.json").string() + " --iou 0.5",
      tmp.path());
  REQUIRE(csv.exit_code == 0);
  CHECK(csv.out.find("0.5,mAP,") != std::string::npos);
  CHECK(csv.out.find("0.25,") == std::string::npos);

  const RunResult json = run_cli(
      "eval --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "perfect.json").string() + " --format json",
      tmp.path());
  REQUIRE(json.exit_code == 0);
  CHECK(json.out.find("\"map\": 1.0") != std::string::npos);
  CHECK(json.out.find("\"detections_id\": \"perfect\"") != std::string::npos);
}

TEST_CASE("eval writes svg when asked") {
  TempDir tmp;
  const auto manifest_path = write_fixture_manifest(tmp, 9);
  const DatasetManifest m = load_manifest(manifest_path);
  save_detections(oracle::perfect_detections(m, "perfect"), m.registry(),
                  tmp.path() / "perfect.json");
  const RunResult r = run_cli(
      "eval --manifest " + manifest_path.string() + " --detections " +
          (tmp.path() / "perfect.json").string() + " --out " +
          (tmp.path() / "curves.svg").string(),
      tmp.path());
  REQUIRE(r.exit_code == 0);
  const std::string svg = testutil::slurp(tmp.path() / "curves.svg");
  CHECK(svg.find("<svg") == 0);
}
