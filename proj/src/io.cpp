#include "detfuse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "detfuse/errors.hpp"

namespace detfuse {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Boxes may overrun their image by at most this many pixels before loading
// fails; smaller overruns are clamped. Real annotation files contain
// off-by-one overruns, anything bigger points at a unit mismatch.
constexpr double kClampTolerance = 2.0;

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

const json& expect(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) {
    throw ParseError(ctx + ": expected an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(ctx + ": missing field '" + key + "'");
  }
  return *it;
}

std::string expect_string(const json& obj, const char* key,
                          const std::string& ctx) {
  const json& v = expect(obj, key, ctx);
  if (!v.is_string()) {
    throw ParseError(ctx + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

double expect_number(const json& obj, const char* key,
                     const std::string& ctx) {
  const json& v = expect(obj, key, ctx);
  if (!v.is_number()) {
    throw ParseError(ctx + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

const json& expect_array(const json& obj, const char* key,
                         const std::string& ctx) {
  const json& v = expect(obj, key, ctx);
  if (!v.is_array()) {
    throw ParseError(ctx + ": field '" + key + "' must be an array");
  }
  return v;
}

struct RawBox {
  double x, y, w, h;
};

RawBox parse_box(const json& obj, BoxFormat fmt, const std::string& ctx) {
  const json& arr = expect_array(obj, "bbox", ctx);
  if (arr.size() != 4) {
    throw ParseError(ctx + ": bbox must hold exactly 4 numbers");
  }
  double v[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!arr[i].is_number()) {
      throw ParseError(ctx + ": bbox must hold exactly 4 numbers");
    }
    v[i] = arr[i].get<double>();
  }
  if (fmt == BoxFormat::xyxy) {
    return RawBox{v[0], v[1], v[2] - v[0], v[3] - v[1]};
  }
  return RawBox{v[0], v[1], v[2], v[3]};
}

// Applies the clamping policy against the owning image. Boxes that stay
// inside come through bit-identical, so save/load round-trips exactly.
BoundingBox clamp_with_policy(const RawBox& raw, const ImageInfo& img,
                              const std::string& ctx) {
  if (!(std::isfinite(raw.x) && std::isfinite(raw.y) && std::isfinite(raw.w) &&
        std::isfinite(raw.h))) {
    throw ValidationError(ctx + ": box has non-finite coordinates");
  }
  if (raw.w <= 0.0 || raw.h <= 0.0) {
    throw ValidationError(ctx + ": degenerate box (w=" +
                          std::to_string(raw.w) + ", h=" +
                          std::to_string(raw.h) + ")");
  }
  const double right = raw.x + raw.w;
  const double bottom = raw.y + raw.h;
  if (raw.x < -kClampTolerance || raw.y < -kClampTolerance ||
      right > img.width + kClampTolerance ||
      bottom > img.height + kClampTolerance) {
    throw ValidationError(ctx + ": box lies more than 2 px outside the image");
  }

  const double nx = std::max(raw.x, 0.0);
  const double ny = std::max(raw.y, 0.0);
  const double nr = std::min(right, img.width);
  const double nb = std::min(bottom, img.height);
  if (nx == raw.x && ny == raw.y && nr == right && nb == bottom) {
    return BoundingBox(raw.x, raw.y, raw.w, raw.h);  // untouched, bit-exact
  }

  std::cerr << "warning: " << ctx << ": clamped box to image bounds\n";
  double nw = nr - nx;
  double nh = nb - ny;
  if (nw <= 0.0 || nh <= 0.0) {
    throw ValidationError(ctx + ": box is degenerate after clamping");
  }
  // Absorb float dust so clamped boxes satisfy x + w <= width exactly.
  while (nx + nw > img.width) nw = std::nextafter(nw, 0.0);
  while (ny + nh > img.height) nh = std::nextafter(nh, 0.0);
  return BoundingBox(nx, ny, nw, nh);
}

std::string percent_cell(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return std::string(buf);
}

std::string number_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return std::string(buf);
}

}  // namespace

ReportFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".json") return ReportFormat::json;
  if (ext == ".csv") return ReportFormat::csv;
  if (ext == ".svg") return ReportFormat::svg;
  throw ConfigError("cannot infer report format from extension: '" + ext +
                    "' (expected .json, .csv or .svg)");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path,
                const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest parse_manifest(const std::string& text, BoxFormat fmt) {
  const json root = parse_text(text, "manifest");
  if (!root.is_object()) throw ParseError("manifest: root must be an object");

  std::vector<ImageInfo> images;
  detail::StringIndex index;
  const json& jimages = expect_array(root, "images", "manifest");
  for (std::size_t i = 0; i < jimages.size(); ++i) {
    const std::string ctx = "manifest images[" + std::to_string(i) + "]";
    ImageInfo img{expect_string(jimages[i], "id", ctx),
                  expect_number(jimages[i], "width", ctx),
                  expect_number(jimages[i], "height", ctx)};
    if (img.id.empty()) throw ValidationError(ctx + ": image id is empty");
    if (!(img.width > 0.0 && img.height > 0.0)) {
      throw ValidationError("image " + img.id +
                            " has non-positive dimensions");
    }
    if (!index.emplace(img.id, images.size()).second) {
      throw ValidationError("duplicate image id: " + img.id);
    }
    images.push_back(std::move(img));
  }

  const json& jclasses = expect_array(root, "classes", "manifest");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < jclasses.size(); ++i) {
    if (!jclasses[i].is_string()) {
      throw ParseError("manifest classes[" + std::to_string(i) +
                       "] must be a string");
    }
    names.push_back(jclasses[i].get<std::string>());
  }
  ClassRegistry registry(std::move(names));

  std::vector<GroundTruthAnnotation> annotations;
  const json& janns = expect_array(root, "annotations", "manifest");
  for (std::size_t i = 0; i < janns.size(); ++i) {
    const std::string ctx = "manifest annotations[" + std::to_string(i) + "]";
    const std::string image_id = expect_string(janns[i], "image_id", ctx);
    const auto it = index.find(image_id);
    if (it == index.end()) {
      throw ValidationError("annotation references unknown image: " +
                            image_id);
    }
    const std::string label = expect_string(janns[i], "class", ctx);
    const auto class_id = registry.find(label);
    if (!class_id) {
      throw ValidationError("unknown class label '" + label + "' on image " +
                            image_id);
    }
    const RawBox raw = parse_box(janns[i], fmt, ctx);
    annotations.push_back(GroundTruthAnnotation{
        image_id, *class_id,
        clamp_with_policy(raw, images[it->second],
                          "annotation on image " + image_id)});
  }

  return DatasetManifest(std::move(images), std::move(annotations),
                         std::move(registry));
}

DatasetManifest load_manifest(const std::filesystem::path& path,
                              BoxFormat fmt) {
  try {
    return parse_manifest(read_file(path), fmt);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  ojson j;
  j["images"] = ojson::array();
  for (const auto& img : m.images()) {
    j["images"].push_back(
        ojson{{"id", img.id}, {"width", img.width}, {"height", img.height}});
  }
  j["classes"] = m.registry().names();
  j["annotations"] = ojson::array();
  for (const auto& a : m.annotations()) {
    j["annotations"].push_back(
        ojson{{"image_id", a.image_id},
              {"class", m.registry().name(a.class_id)},
              {"bbox", {a.box.x(), a.box.y(), a.box.w(), a.box.h()}}});
  }
  return j.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& m,
                   const std::filesystem::path& path) {
  write_file(path, manifest_to_json(m));
}

DetectionFile parse_detections(const std::string& text,
                               const DatasetManifest& manifest,
                               BoxFormat fmt) {
  const json root = parse_text(text, "detections");
  if (!root.is_object()) {
    throw ParseError("detections: root must be an object");
  }
  DetectionFile file{expect_string(root, "model_id", "detections"), {}};
  if (file.model_id.empty()) {
    throw ValidationError("detections: model id is empty");
  }

  const json& jdets = expect_array(root, "detections", "detections");
  for (std::size_t i = 0; i < jdets.size(); ++i) {
    const std::string ctx = "detections[" + std::to_string(i) + "]";
    const std::string image_id = expect_string(jdets[i], "image_id", ctx);
    const ImageInfo* img = manifest.find_image(image_id);
    if (img == nullptr) {
      throw UnknownImageError(
          "detection references image absent from manifest: " + image_id);
    }
    const std::string label = expect_string(jdets[i], "class", ctx);
    const auto class_id = manifest.registry().find(label);
    if (!class_id) {
      throw ValidationError("unknown class label '" + label + "' on image " +
                            image_id);
    }
    const double score = expect_number(jdets[i], "score", ctx);
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
      throw ValidationError(ctx + ": score " + std::to_string(score) +
                            " lies outside [0, 1]");
    }
    const RawBox raw = parse_box(jdets[i], fmt, ctx);
    file.detections.push_back(Detection{
        image_id, *class_id,
        clamp_with_policy(raw, *img, "detection on image " + image_id), score,
        file.model_id});
  }
  return file;
}

DetectionFile load_detections(const std::filesystem::path& path,
                              const DatasetManifest& manifest, BoxFormat fmt) {
  try {
    return parse_detections(read_file(path), manifest, fmt);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const UnknownImageError& e) {
    throw UnknownImageError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string detections_to_json(const DetectionFile& f,
                               const ClassRegistry& registry) {
  ojson j;
  j["model_id"] = f.model_id;
  j["detections"] = ojson::array();
  for (const auto& d : f.detections) {
    j["detections"].push_back(
        ojson{{"image_id", d.image_id},
              {"class", registry.name(d.class_id)},
              {"bbox", {d.box.x(), d.box.y(), d.box.w(), d.box.h()}},
              {"score", d.score}});
  }
  return j.dump(2) + "\n";
}

void save_detections(const DetectionFile& f, const ClassRegistry& registry,
                     const std::filesystem::path& path) {
  write_file(path, detections_to_json(f, registry));
}

std::string report_to_json(const EvalReport& r) {
  ojson j;
  j["tool"] = r.tool;
  j["version"] = r.version;
  j["config_hash"] = r.config_hash;
  j["detections_id"] = r.detections_id;
  j["manifest_id"] = r.manifest_id;
  j["classes"] = r.class_names;
  j["thresholds"] = ojson::array();
  for (const auto& te : r.thresholds) {
    ojson jt;
    jt["iou"] = te.iou;
    jt["map"] = te.map;
    jt["classes"] = ojson::array();
    for (const auto& ce : te.classes) {
      ojson jc;
      jc["class"] = r.class_names.at(ce.class_id);
      jc["n_gt"] = ce.n_gt;
      if (ce.result) {
        jc["ap"] = ce.result->ap;
        ojson pr = ojson::array();
        for (const auto& p : ce.result->pr) {
          pr.push_back({p.recall, p.precision});
        }
        jc["pr"] = std::move(pr);
      } else {
        jc["ap"] = nullptr;
        jc["pr"] = ojson::array();
      }
      jt["classes"].push_back(std::move(jc));
    }
    j["thresholds"].push_back(std::move(jt));
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& r) {
  std::string s = "iou,class,n_gt,ap\n";
  for (const auto& te : r.thresholds) {
    std::size_t total_gt = 0;
    for (const auto& ce : te.classes) {
      s += number_g(te.iou);
      s += ',';
      s += r.class_names.at(ce.class_id);
      s += ',';
      s += std::to_string(ce.n_gt);
      s += ',';
      if (ce.result) {
        s += percent_cell(ce.result->ap);
        total_gt += ce.n_gt;
      }
      s += '\n';
    }
    s += number_g(te.iou);
    s += ",mAP,";
    s += std::to_string(total_gt);
    s += ',';
    s += percent_cell(te.map);
    s += '\n';
  }
  return s;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22",
                                    "#17becf"};

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

void svg_open(std::string& s, double width, double height) {
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       svg_coord(width) + "\" height=\"" + svg_coord(height) +
       "\" viewBox=\"0 0 " + svg_coord(width) + " " + svg_coord(height) +
       "\" font-family=\"sans-serif\" font-size=\"10\">\n";
}

void svg_panel_frame(std::string& s, double x0, double y0, double w, double h,
                     const std::string& title) {
  s += "<rect x=\"" + svg_coord(x0) + "\" y=\"" + svg_coord(y0) +
       "\" width=\"" + svg_coord(w) + "\" height=\"" + svg_coord(h) +
       "\" fill=\"none\" stroke=\"#333\"/>\n";
  s += "<text x=\"" + svg_coord(x0 + w / 2) + "\" y=\"" + svg_coord(y0 - 6) +
       "\" text-anchor=\"middle\">" + title + "</text>\n";
}

void svg_marker(std::string& s, std::size_t method_index, double cx, double cy,
                const std::string& color) {
  switch (method_index % 4) {
    case 0:  // cross
      s += "<path d=\"M" + svg_coord(cx - 3.5) + " " + svg_coord(cy - 3.5) +
           " L" + svg_coord(cx + 3.5) + " " + svg_coord(cy + 3.5) + " M" +
           svg_coord(cx - 3.5) + " " + svg_coord(cy + 3.5) + " L" +
           svg_coord(cx + 3.5) + " " + svg_coord(cy - 3.5) + "\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"/>\n";
      break;
    case 1:  // circle
      s += "<circle cx=\"" + svg_coord(cx) + "\" cy=\"" + svg_coord(cy) +
           "\" r=\"3.5\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
      break;
    case 2: {  // star
      s += "<path d=\"M" + svg_coord(cx) + " " + svg_coord(cy - 4) + " L" +
           svg_coord(cx + 1.2) + " " + svg_coord(cy - 1.2) + " L" +
           svg_coord(cx + 4) + " " + svg_coord(cy - 1.2) + " L" +
           svg_coord(cx + 1.8) + " " + svg_coord(cy + 1) + " L" +
           svg_coord(cx + 2.6) + " " + svg_coord(cy + 4) + " L" +
           svg_coord(cx) + " " + svg_coord(cy + 2.2) + " L" +
           svg_coord(cx - 2.6) + " " + svg_coord(cy + 4) + " L" +
           svg_coord(cx - 1.8) + " " + svg_coord(cy + 1) + " L" +
           svg_coord(cx - 4) + " " + svg_coord(cy - 1.2) + " L" +
           svg_coord(cx - 1.2) + " " + svg_coord(cy - 1.2) + " Z\" fill=\"" +
           color + "\"/>\n";
      break;
    }
    default:  // triangle
      s += "<path d=\"M" + svg_coord(cx) + " " + svg_coord(cy - 4) + " L" +
           svg_coord(cx + 4) + " " + svg_coord(cy + 3.5) + " L" +
           svg_coord(cx - 4) + " " + svg_coord(cy + 3.5) + " Z\" fill=\"" +
           color + "\"/>\n";
  }
}

}  // namespace

std::string report_to_svg(const EvalReport& r) {
  constexpr double kPanelW = 220.0;
  constexpr double kPanelH = 180.0;
  constexpr double kMargin = 40.0;
  const std::size_t n_panels = r.thresholds.size();
  const double width =
      kMargin + static_cast<double>(n_panels) * (kPanelW + kMargin);
  const double legend_h =
      16.0 * static_cast<double>(r.class_names.size()) + 20.0;
  const double height = kPanelH + 2.0 * kMargin + legend_h;

  std::string s;
  svg_open(s, width, height);
  for (std::size_t p = 0; p < n_panels; ++p) {
    const auto& te = r.thresholds[p];
    const double x0 = kMargin + static_cast<double>(p) * (kPanelW + kMargin);
    const double y0 = kMargin;
    svg_panel_frame(s, x0, y0, kPanelW, kPanelH,
                    "PR at IoU " + number_g(te.iou));
    s += "<text x=\"" + svg_coord(x0 + kPanelW / 2) + "\" y=\"" +
         svg_coord(y0 + kPanelH + 14) +
         "\" text-anchor=\"middle\">recall</text>\n";
    for (const auto& ce : te.classes) {
      if (!ce.result || ce.result->pr.empty()) continue;
      const std::string color = kPalette[ce.class_id % 10];
      std::string points;
      points += svg_coord(x0) + "," + svg_coord(y0 + kPanelH) + " ";
      for (const auto& pt : ce.result->pr) {
        points += svg_coord(x0 + pt.recall * kPanelW) + "," +
                  svg_coord(y0 + (1.0 - pt.precision) * kPanelH) + " ";
      }
      s += "<polyline points=\"" + points +
           "\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    }
  }
  double ly = kPanelH + 2.0 * kMargin;
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    const std::string color = kPalette[c % 10];
    s += "<rect x=\"" + svg_coord(kMargin) + "\" y=\"" + svg_coord(ly) +
         "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + svg_coord(kMargin + 16) + "\" y=\"" +
         svg_coord(ly + 9) + "\">" + r.class_names[c] + "</text>\n";
    ly += 16.0;
  }
  s += "</svg>\n";
  return s;
}

void write_report(const EvalReport& r, const std::filesystem::path& path,
                  ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::json:
      write_file(path, report_to_json(r));
      break;
    case ReportFormat::csv:
      write_file(path, report_to_csv(r));
      break;
    case ReportFormat::svg:
      write_file(path, report_to_svg(r));
      break;
  }
}

std::string benchmark_to_csv(const BenchmarkTable& t) {
  std::string s = "method";
  for (const double thr : t.thresholds) {
    s += ",mAP";
    s += number_g(thr * 100.0);
  }
  s += '\n';
  for (const auto& row : t.rows) {
    if (row.maps.size() != t.thresholds.size()) {
      throw ValidationError("benchmark row '" + row.label +
                            "' does not cover every threshold");
    }
    s += row.label;
    for (const double v : row.maps) {
      s += ',';
      s += percent_cell(v);
    }
    s += '\n';
  }
  return s;
}

std::string benchmark_to_json(const BenchmarkTable& t) {
  ojson j;
  j["thresholds"] = t.thresholds;
  j["rows"] = ojson::array();
  for (const auto& row : t.rows) {
    if (row.maps.size() != t.thresholds.size()) {
      throw ValidationError("benchmark row '" + row.label +
                            "' does not cover every threshold");
    }
    j["rows"].push_back(ojson{{"method", row.label}, {"maps", row.maps}});
  }
  return j.dump(2) + "\n";
}

std::string benchmark_to_svg(const BenchmarkTable& t) {
  // Row labels may encode a run as "method@run"; each run gets an x slot and
  // each method a marker shape, which reproduces scatter-per-run plots.
  struct RowKey {
    std::string method;
    std::string run;
  };
  std::vector<RowKey> keys;
  std::vector<std::string> methods;
  std::vector<std::string> runs;
  for (const auto& row : t.rows) {
    if (row.maps.size() != t.thresholds.size()) {
      throw ValidationError("benchmark row '" + row.label +
                            "' does not cover every threshold");
    }
    const auto at = row.label.find('@');
    RowKey key{at == std::string::npos ? row.label : row.label.substr(0, at),
               at == std::string::npos ? row.label : row.label.substr(at + 1)};
    if (std::find(methods.begin(), methods.end(), key.method) ==
        methods.end()) {
      methods.push_back(key.method);
    }
    if (std::find(runs.begin(), runs.end(), key.run) == runs.end()) {
      runs.push_back(key.run);
    }
    keys.push_back(std::move(key));
  }

  constexpr double kSlotW = 70.0;
  constexpr double kPanelH = 160.0;
  constexpr double kMargin = 42.0;
  const double panel_w =
      std::max<double>(kSlotW, static_cast<double>(runs.size()) * kSlotW);
  const double width =
      kMargin +
      static_cast<double>(t.thresholds.size()) * (panel_w + kMargin);
  const double legend_h = 16.0 * static_cast<double>(methods.size()) + 20.0;
  const double height = kPanelH + 2.0 * kMargin + legend_h;

  std::string s;
  svg_open(s, std::max(width, 200.0), height);
  for (std::size_t p = 0; p < t.thresholds.size(); ++p) {
    const double x0 = kMargin + static_cast<double>(p) * (panel_w + kMargin);
    const double y0 = kMargin;
    svg_panel_frame(s, x0, y0, panel_w, kPanelH,
                    "mAP at IoU " + number_g(t.thresholds[p]));
    for (int tick = 0; tick <= 100; tick += 25) {
      const double ty = y0 + kPanelH * (1.0 - static_cast<double>(tick) / 100.0);
      s += "<text x=\"" + svg_coord(x0 - 6) + "\" y=\"" + svg_coord(ty + 3) +
           "\" text-anchor=\"end\">" + std::to_string(tick) + "</text>\n";
    }
    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
      const double cx =
          x0 + (static_cast<double>(ri) + 0.5) * (panel_w /
                                                  static_cast<double>(runs.size()));
      s += "<text x=\"" + svg_coord(cx) + "\" y=\"" +
           svg_coord(y0 + kPanelH + 14) + "\" text-anchor=\"middle\">" +
           runs[ri] + "</text>\n";
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto run_it = std::find(runs.begin(), runs.end(), keys[i].run);
      const auto method_it =
          std::find(methods.begin(), methods.end(), keys[i].method);
      const std::size_t run_idx =
          static_cast<std::size_t>(run_it - runs.begin());
      const std::size_t method_idx =
          static_cast<std::size_t>(method_it - methods.begin());
      const double cx =
          x0 + (static_cast<double>(run_idx) + 0.5) *
                   (panel_w / static_cast<double>(runs.size()));
      const double cy = y0 + kPanelH * (1.0 - t.rows[i].maps[p]);
      svg_marker(s, method_idx, cx, cy, kPalette[method_idx % 10]);
    }
  }
  double ly = kPanelH + 2.0 * kMargin;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    svg_marker(s, m, kMargin + 5, ly + 5, kPalette[m % 10]);
    s += "<text x=\"" + svg_coord(kMargin + 16) + "\" y=\"" +
         svg_coord(ly + 9) + "\">" + methods[m] + "</text>\n";
    ly += 16.0;
  }
  s += "</svg>\n";
  return s;
}

void write_benchmark(const BenchmarkTable& t,
                     const std::filesystem::path& path, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::json:
      write_file(path, benchmark_to_json(t));
      break;
    case ReportFormat::csv:
      write_file(path, benchmark_to_csv(t));
      break;
    case ReportFormat::svg:
      write_file(path, benchmark_to_svg(t));
      break;
  }
}

ReportSummary load_report_summary(const std::filesystem::path& path) {
  const json root = parse_text(read_file(path), path.string());
  if (!root.is_object()) {
    throw ParseError(path.string() + ": root must be an object");
  }
  ReportSummary summary;
  summary.detections_id = root.value("detections_id", std::string{});
  const json& thresholds = expect_array(root, "thresholds", path.string());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const std::string ctx =
        path.string() + " thresholds[" + std::to_string(i) + "]";
    summary.thresholds.push_back(expect_number(thresholds[i], "iou", ctx));
    summary.maps.push_back(expect_number(thresholds[i], "map", ctx));
  }
  return summary;
}

bool is_report_file(const std::filesystem::path& path) {
  const json root = parse_text(read_file(path), path.string());
  return root.is_object() && root.contains("thresholds");
}

std::string distribution_to_csv(const ClassRegistry& registry,
                                const ClassDistribution& dist) {
  std::string s = "class,count\n";
  for (std::size_t c = 0; c < registry.size(); ++c) {
    s += registry.name(c);
    s += ',';
    s += std::to_string(dist.counts.at(c));
    s += '\n';
  }
  s += "total,";
  s += std::to_string(dist.total);
  s += '\n';
  return s;
}

}  // namespace detfuse
