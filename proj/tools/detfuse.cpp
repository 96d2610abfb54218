#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detfuse/ensemble.hpp"
#include "detfuse/errors.hpp"
#include "detfuse/eval.hpp"
#include "detfuse/io.hpp"
#include "detfuse/model.hpp"
#include "detfuse/nms.hpp"
#include "detfuse/synth.hpp"
#include "detfuse/version.hpp"

namespace {

using namespace detfuse;

const std::map<std::string, VotingStrategy> kStrategies{
    {"affirmative", VotingStrategy::affirmative},
    {"consensus", VotingStrategy::consensus},
    {"unanimous", VotingStrategy::unanimous}};

const std::map<std::string, NmsMode> kNmsModes{
    {"aware", NmsMode::class_aware}, {"agnostic", NmsMode::class_agnostic}};

const std::map<std::string, BoxFormat> kBoxFormats{
    {"xywh", BoxFormat::xywh}, {"xyxy", BoxFormat::xyxy}};

const std::map<std::string, ReportFormat> kReportFormats{
    {"json", ReportFormat::json},
    {"csv", ReportFormat::csv},
    {"svg", ReportFormat::svg}};

struct FuseOptions {
  std::string manifest;
  std::vector<std::string> detections;
  VotingStrategy strategy = VotingStrategy::consensus;
  double group_iou = 0.5;
  double nms_iou = 0.5;
  NmsMode nms_mode = NmsMode::class_aware;
  double score_floor = 0.0;
  bool no_nms = false;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out;
};

struct EvalOptions {
  std::string manifest;
  std::string detections;
  std::vector<double> ious{0.25, 0.50, 0.75};
  bool coco_101 = false;
  double nms_iou = 0.5;
  NmsMode nms_mode = NmsMode::class_aware;
  double score_floor = 0.0;
  bool no_nms = false;
  bool nms_requested = false;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out;
  std::optional<ReportFormat> format;
};

struct BenchmarkOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  std::string manifest;
  std::vector<double> ious{0.25, 0.50, 0.75};
  bool coco_101 = false;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out;
  std::optional<ReportFormat> format;
};

struct StatsOptions {
  std::string manifest;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out;
};

struct SplitOptions {
  std::string manifest;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out_train;
  std::string out_test;
};

struct GenOptions {
  std::string manifest;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  double drop = 0.0;
  double fp = 0.0;
  double score_base = 0.95;
  double score_decay = 1.0;
  std::string model_id;
  BoxFormat bbox_format = BoxFormat::xywh;
  std::string out;
};

ReportFormat resolve_format(const std::optional<ReportFormat>& flag,
                            const std::string& out_path) {
  if (flag) return *flag;
  if (!out_path.empty()) return format_from_extension(out_path);
  return ReportFormat::csv;  // stdout default
}

void run_fuse(const FuseOptions& o) {
  const DatasetManifest manifest = load_manifest(o.manifest, o.bbox_format);
  std::vector<DetectionFile> files;
  files.reserve(o.detections.size());
  for (const auto& path : o.detections) {
    files.push_back(load_detections(path, manifest, o.bbox_format));
  }

  EnsembleConfig cfg;
  cfg.strategy = o.strategy;
  cfg.group_iou = o.group_iou;
  if (o.no_nms) {
    cfg.nms.reset();
  } else {
    cfg.nms = NmsConfig{o.nms_iou, o.nms_mode, o.score_floor};
  }

  const DetectionFile fused = run_ensemble(files, manifest, cfg);
  save_detections(fused, manifest.registry(), o.out);
}

void run_eval(const EvalOptions& o) {
  const DatasetManifest manifest = load_manifest(o.manifest, o.bbox_format);
  DetectionFile dets = load_detections(o.detections, manifest, o.bbox_format);
  if (o.nms_requested && !o.no_nms) {
    dets = nms_per_image(dets, NmsConfig{o.nms_iou, o.nms_mode, o.score_floor});
  }

  EvalConfig cfg;
  cfg.thresholds = o.ious;
  cfg.interpolation =
      o.coco_101 ? Interpolation::coco_101 : Interpolation::all_point;
  const EvalReport report = evaluate(dets, manifest, cfg);

  const ReportFormat fmt = resolve_format(o.format, o.out);
  if (o.out.empty()) {
    switch (fmt) {
      case ReportFormat::json:
        std::cout << report_to_json(report);
        break;
      case ReportFormat::csv:
        std::cout << report_to_csv(report);
        break;
      case ReportFormat::svg:
        std::cout << report_to_svg(report);
        break;
    }
  } else {
    write_report(report, o.out, fmt);
  }
}

void run_benchmark(const BenchmarkOptions& o) {
  if (!o.labels.empty() && o.labels.size() != o.inputs.size()) {
    throw ConfigError("--labels must name every input exactly once");
  }

  std::optional<DatasetManifest> manifest;
  if (!o.manifest.empty()) {
    manifest = load_manifest(o.manifest, o.bbox_format);
  }

  EvalConfig cfg;
  cfg.thresholds = o.ious;
  cfg.interpolation =
      o.coco_101 ? Interpolation::coco_101 : Interpolation::all_point;

  BenchmarkTable table;
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    std::string label = o.labels.empty() ? std::string{} : o.labels[i];
    std::vector<double> thresholds;
    std::vector<double> maps;
    if (is_report_file(o.inputs[i])) {
      const ReportSummary summary = load_report_summary(o.inputs[i]);
      if (label.empty()) label = summary.detections_id;
      thresholds = summary.thresholds;
      maps = summary.maps;
    } else {
      if (!manifest) {
        throw ConfigError(
            "benchmark needs --manifest to evaluate detection file: " +
            o.inputs[i]);
      }
      const DetectionFile file =
          load_detections(o.inputs[i], *manifest, o.bbox_format);
      if (label.empty()) label = file.model_id;
      const EvalReport report = evaluate(file, *manifest, cfg);
      for (const auto& te : report.thresholds) {
        thresholds.push_back(te.iou);
        maps.push_back(te.map);
      }
    }
    if (table.rows.empty()) {
      table.thresholds = thresholds;
    } else if (table.thresholds != thresholds) {
      throw ConfigError("benchmark inputs disagree on iou thresholds (" +
                        o.inputs[i] + ")");
    }
    table.rows.push_back(BenchmarkRow{std::move(label), std::move(maps)});
  }
  if (table.rows.empty()) table.thresholds = o.ious;

  const ReportFormat fmt = resolve_format(o.format, o.out);
  if (o.out.empty()) {
    switch (fmt) {
      case ReportFormat::json:
        std::cout << benchmark_to_json(table);
        break;
      case ReportFormat::csv:
        std::cout << benchmark_to_csv(table);
        break;
      case ReportFormat::svg:
        std::cout << benchmark_to_svg(table);
        break;
    }
  } else {
    write_benchmark(table, o.out, fmt);
  }
}

void run_stats(const StatsOptions& o) {
  const DatasetManifest manifest = load_manifest(o.manifest, o.bbox_format);
  const std::string csv =
      distribution_to_csv(manifest.registry(), class_distribution(manifest));
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
  }
}

void run_split(const SplitOptions& o) {
  const DatasetManifest manifest = load_manifest(o.manifest, o.bbox_format);
  const auto [train, test] = split_manifest(manifest, o.test_fraction, o.seed);
  save_manifest(train, o.out_train);
  save_manifest(test, o.out_test);
}

void run_gen(const GenOptions& o) {
  const DatasetManifest manifest = load_manifest(o.manifest, o.bbox_format);
  PerturbConfig cfg;
  cfg.seed = o.seed;
  cfg.jitter = o.jitter;
  cfg.drop_rate = o.drop;
  cfg.fp_rate = o.fp;
  cfg.score_model = ScoreModel{o.score_base, o.score_decay};
  const DetectionFile file = generate(manifest, cfg, o.model_id);
  save_detections(file, manifest.registry(), o.out);
}

void add_bbox_format_flag(CLI::App* cmd, BoxFormat& target) {
  cmd->add_option("--bbox-format", target,
                  "box encoding in input files: xywh or xyxy corner pairs")
      ->transform(CLI::CheckedTransformer(kBoxFormats, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection ensemble fusion and evaluation toolkit"};
  app.name("detfuse");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  FuseOptions fuse_opts;
  auto* fuse_cmd = app.add_subcommand(
      "fuse", "combine detection files with a voting strategy");
  fuse_cmd->add_option("--manifest", fuse_opts.manifest, "manifest JSON")
      ->required();
  fuse_cmd
      ->add_option("--detections", fuse_opts.detections,
                   "detection JSON files, one per model")
      ->required()
      ->expected(-1);
  fuse_cmd
      ->add_option("--strategy", fuse_opts.strategy,
                   "affirmative, consensus or unanimous")
      ->required()
      ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));
  fuse_cmd->add_option("--group-iou", fuse_opts.group_iou,
                       "IoU at which cross-model boxes count as one object");
  fuse_cmd->add_option("--nms-iou", fuse_opts.nms_iou,
                       "per-model NMS threshold");
  fuse_cmd->add_option("--nms-mode", fuse_opts.nms_mode, "aware or agnostic")
      ->transform(CLI::CheckedTransformer(kNmsModes, CLI::ignore_case));
  fuse_cmd->add_option("--score-floor", fuse_opts.score_floor,
                       "drop detections below this score before NMS");
  fuse_cmd->add_flag("--no-nms", fuse_opts.no_nms,
                     "skip the per-model NMS stage");
  add_bbox_format_flag(fuse_cmd, fuse_opts.bbox_format);
  fuse_cmd->add_option("--out", fuse_opts.out, "output detection JSON")
      ->required();

  EvalOptions eval_opts;
  auto* eval_cmd =
      app.add_subcommand("eval", "score a detection file against a manifest");
  eval_cmd->add_option("--manifest", eval_opts.manifest, "manifest JSON")
      ->required();
  eval_cmd->add_option("--detections", eval_opts.detections,
                       "detection JSON file")
      ->required();
  eval_cmd
      ->add_option("--iou", eval_opts.ious,
                   "comma-separated IoU thresholds (default 0.25,0.5,0.75)")
      ->delimiter(',');
  eval_cmd->add_flag("--coco-101", eval_opts.coco_101,
                     "101-point AP interpolation instead of all-point");
  auto* eval_nms_iou = eval_cmd->add_option(
      "--nms-iou", eval_opts.nms_iou, "apply NMS at this threshold first");
  auto* eval_nms_mode =
      eval_cmd->add_option("--nms-mode", eval_opts.nms_mode,
                           "aware or agnostic (implies NMS)");
  eval_nms_mode->transform(CLI::CheckedTransformer(kNmsModes, CLI::ignore_case));
  auto* eval_floor = eval_cmd->add_option(
      "--score-floor", eval_opts.score_floor, "drop low scores first (implies NMS)");
  eval_cmd->add_flag("--no-nms", eval_opts.no_nms,
                     "never apply NMS before scoring (the default)");
  add_bbox_format_flag(eval_cmd, eval_opts.bbox_format);
  eval_cmd->add_option("--out", eval_opts.out,
                       "report path (.json, .csv or .svg); stdout if omitted");
  eval_cmd->add_option("--format", eval_opts.format, "json, csv or svg")
      ->transform(CLI::CheckedTransformer(kReportFormats, CLI::ignore_case));

  BenchmarkOptions bench_opts;
  auto* bench_cmd = app.add_subcommand(
      "benchmark", "tabulate mAP for several reports or detection files");
  bench_cmd
      ->add_option("--inputs", bench_opts.inputs,
                   "report JSONs or detection JSONs")
      ->required()
      ->expected(-1);
  bench_cmd->add_option("--labels", bench_opts.labels,
                        "row labels, one per input");
  bench_cmd->add_option("--manifest", bench_opts.manifest,
                        "manifest JSON, needed for detection inputs");
  bench_cmd
      ->add_option("--iou", bench_opts.ious,
                   "thresholds used when evaluating detection inputs")
      ->delimiter(',');
  bench_cmd->add_flag("--coco-101", bench_opts.coco_101,
                      "101-point AP interpolation instead of all-point");
  add_bbox_format_flag(bench_cmd, bench_opts.bbox_format);
  bench_cmd->add_option("--out", bench_opts.out,
                        "table path (.json, .csv or .svg); stdout if omitted");
  bench_cmd->add_option("--format", bench_opts.format, "json, csv or svg")
      ->transform(CLI::CheckedTransformer(kReportFormats, CLI::ignore_case));

  StatsOptions stats_opts;
  auto* stats_cmd =
      app.add_subcommand("stats", "per-class annotation counts of a manifest");
  stats_cmd->add_option("--manifest", stats_opts.manifest, "manifest JSON")
      ->required();
  add_bbox_format_flag(stats_cmd, stats_opts.bbox_format);
  stats_cmd->add_option("--out", stats_opts.out,
                        "CSV path; stdout if omitted");

  SplitOptions split_opts;
  auto* split_cmd = app.add_subcommand(
      "split", "split a manifest into train and test by image");
  split_cmd->add_option("--manifest", split_opts.manifest, "manifest JSON")
      ->required();
  split_cmd->add_option("--test-fraction", split_opts.test_fraction,
                        "fraction of images for the test side");
  split_cmd->add_option("--seed", split_opts.seed, "shuffle seed");
  add_bbox_format_flag(split_cmd, split_opts.bbox_format);
  split_cmd->add_option("--out-train", split_opts.out_train,
                        "train manifest path")
      ->required();
  split_cmd->add_option("--out-test", split_opts.out_test,
                        "test manifest path")
      ->required();

  GenOptions gen_opts;
  auto* gen_cmd = app.add_subcommand(
      "gen", "generate a synthetic detection file from ground truth");
  gen_cmd->add_option("--manifest", gen_opts.manifest, "manifest JSON")
      ->required();
  gen_cmd->add_option("--seed", gen_opts.seed, "generator seed");
  gen_cmd->add_option("--jitter", gen_opts.jitter,
                      "box noise amplitude as a fraction of box size");
  gen_cmd->add_option("--drop", gen_opts.drop,
                      "probability of dropping a ground-truth box");
  gen_cmd->add_option("--fp", gen_opts.fp,
                      "expected false positives per image");
  gen_cmd->add_option("--score-base", gen_opts.score_base,
                      "confidence at zero displacement");
  gen_cmd->add_option("--score-decay", gen_opts.score_decay,
                      "confidence lost per unit of relative displacement");
  gen_cmd->add_option("--model-id", gen_opts.model_id,
                      "model id written into the file")
      ->required();
  add_bbox_format_flag(gen_cmd, gen_opts.bbox_format);
  gen_cmd->add_option("--out", gen_opts.out, "output detection JSON")
      ->required();

  try {
    app.parse(argc, argv);
    eval_opts.nms_requested =
        eval_nms_iou->count() > 0 || eval_nms_mode->count() > 0 ||
        eval_floor->count() > 0;

    if (*fuse_cmd) run_fuse(fuse_opts);
    if (*eval_cmd) run_eval(eval_opts);
    if (*bench_cmd) run_benchmark(bench_opts);
    if (*stats_cmd) run_stats(stats_opts);
    if (*split_cmd) run_split(split_opts);
    if (*gen_cmd) run_gen(gen_opts);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
