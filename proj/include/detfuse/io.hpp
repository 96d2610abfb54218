#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "detfuse/eval.hpp"
#include "detfuse/model.hpp"

namespace detfuse {

// Box encoding in input files. Everything is normalized to (x, y, w, h) at
// parse time; xyxy accepts corner pairs [x1, y1, x2, y2].
enum class BoxFormat { xywh, xyxy };

enum class ReportFormat { json, csv, svg };

// Picks the format from the file extension; throws ConfigError for anything
// but .json / .csv / .svg.
ReportFormat format_from_extension(const std::filesystem::path& path);

// Manifest schema:
//   {"images":[{"id","width","height"}],
//    "classes":["specularity",...],
//    "annotations":[{"image_id","class","bbox":[x,y,w,h]}]}
// Boxes reaching at most 2 px beyond their image are clamped with a warning
// on stderr; larger overruns are validation errors (they indicate unit bugs,
// not annotation jitter).
DatasetManifest load_manifest(const std::filesystem::path& path,
                              BoxFormat fmt = BoxFormat::xywh);
DatasetManifest parse_manifest(const std::string& text,
                               BoxFormat fmt = BoxFormat::xywh);
std::string manifest_to_json(const DatasetManifest& m);
void save_manifest(const DatasetManifest& m,
                   const std::filesystem::path& path);

// Detection schema:
//   {"model_id":"yolact",
//    "detections":[{"image_id","class","bbox":[x,y,w,h],"score"}]}
// Scores outside [0, 1] are errors, never clamped.
DetectionFile load_detections(const std::filesystem::path& path,
                              const DatasetManifest& manifest,
                              BoxFormat fmt = BoxFormat::xywh);
DetectionFile parse_detections(const std::string& text,
                               const DatasetManifest& manifest,
                               BoxFormat fmt = BoxFormat::xywh);
std::string detections_to_json(const DetectionFile& f,
                               const ClassRegistry& registry);
void save_detections(const DetectionFile& f, const ClassRegistry& registry,
                     const std::filesystem::path& path);

// Report renderings. JSON keeps full-precision fractions; CSV and SVG render
// percent values with exactly two decimals so golden files are byte-stable.
std::string report_to_json(const EvalReport& r);
std::string report_to_csv(const EvalReport& r);
std::string report_to_svg(const EvalReport& r);
void write_report(const EvalReport& r, const std::filesystem::path& path,
                  ReportFormat fmt);

// A benchmark table compares several methods at the same thresholds. Row
// labels may carry an optional run suffix ("method@run"); the SVG rendering
// then plots one x slot per run with one marker shape per method.
struct BenchmarkRow {
  std::string label;
  std::vector<double> maps;  // fractions, one per table threshold
};

struct BenchmarkTable {
  std::vector<double> thresholds;
  std::vector<BenchmarkRow> rows;
};

std::string benchmark_to_csv(const BenchmarkTable& t);
std::string benchmark_to_json(const BenchmarkTable& t);
std::string benchmark_to_svg(const BenchmarkTable& t);
void write_benchmark(const BenchmarkTable& t,
                     const std::filesystem::path& path, ReportFormat fmt);

// Just enough of a stored report to build a benchmark row from it.
struct ReportSummary {
  std::string detections_id;
  std::vector<double> thresholds;
  std::vector<double> maps;  // fractions
};

ReportSummary load_report_summary(const std::filesystem::path& path);

// True when the JSON file looks like an evaluation report rather than a
// detection file (used by the benchmark command to accept both).
bool is_report_file(const std::filesystem::path& path);

std::string distribution_to_csv(const ClassRegistry& registry,
                                const ClassDistribution& dist);

// Whole-file read/write with IoError on failure. Writes are binary-exact:
// UTF-8, "\n" endings, no BOM.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace detfuse
