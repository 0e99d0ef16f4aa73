#include "lpcg/kitti_io.hpp"

#include "lpcg/error.hpp"

#include <Eigen/LU>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace lpcg {
namespace {

using nlohmann::json;

constexpr double kOrthonormalTol = 1e-3;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Splits on '\n'; the final segment is dropped when empty.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::optional<double> to_double(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<std::vector<double>> to_doubles(std::string_view text) {
  std::vector<double> values;
  for (auto token : split_ws(text)) {
    auto v = to_double(token);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    values.push_back(*v);
  }
  return values;
}

template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols> row_major(const std::vector<double>& v) {
  Eigen::Matrix<double, Rows, Cols> m;
  for (int r = 0; r < Rows; ++r)
    for (int c = 0; c < Cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * Cols + c)];
  return m;
}

template <typename Derived>
std::string format_row_major(const Eigen::MatrixBase<Derived>& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += ' ';
      out += fmt::format("{:.12e}", m(r, c));
    }
  }
  return out;
}

bool is_tr_key(std::string_view key) { return key == "Tr_velo_to_cam" || key == "Tr_velo_cam"; }
bool is_r0_key(std::string_view key) { return key == "R0_rect" || key == "R_rect"; }

[[noreturn]] void bad_label(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kMalformedLabelLine, fmt::format("line {}: {}", line_no, why));
}

[[noreturn]] void bad_detections(const std::string& why) {
  throw Error(ErrorCode::kMalformedDetections, why);
}

double json_number(const json& j, const char* what) {
  if (!j.is_number()) bad_detections(fmt::format("'{}' is not a number", what));
  return j.get<double>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

std::string relativize(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty()) return {};
  if (base.empty() || p.is_absolute() != base.is_absolute()) return p.generic_string();
  auto rel = p.lexically_normal().lexically_relative(base.lexically_normal());
  if (rel.empty()) return p.generic_string();
  return rel.generic_string();
}

}  // namespace

CalibBundle parse_calib(std::string_view text, std::string_view camera_key) {
  CalibBundle calib;
  calib.camera_key = std::string(camera_key);
  bool have_p = false, have_r0 = false, have_tr = false;

  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key(trim(line.substr(0, colon)));
    const std::string_view rest = trim(line.substr(colon + 1));
    calib.entries.push_back({key, std::string(rest)});

    const bool wants_p = key == camera_key;
    const bool wants_r0 = is_r0_key(key);
    const bool wants_tr = is_tr_key(key);
    if (!wants_p && !wants_r0 && !wants_tr) continue;

    const auto values = to_doubles(rest);
    if (!values) throw Error(ErrorCode::kMalformedCalib, fmt::format("non-numeric value in '{}'", key));
    const std::size_t expected = wants_r0 ? 9 : 12;
    if (values->size() != expected) {
      throw Error(ErrorCode::kMalformedCalib,
                  fmt::format("'{}' has {} values, expected {}", key, values->size(), expected));
    }
    if (wants_p) {
      calib.P2 = row_major<3, 4>(*values);
      have_p = true;
    } else if (wants_r0) {
      calib.R0_rect = row_major<3, 3>(*values);
      have_r0 = true;
    } else {
      calib.Tr_velo_to_cam = row_major<3, 4>(*values);
      have_tr = true;
    }
  }

  if (!have_p) throw Error(ErrorCode::kMissingCalibKey, std::string(camera_key));
  if (!have_r0) throw Error(ErrorCode::kMissingCalibKey, "R0_rect");
  if (!have_tr) throw Error(ErrorCode::kMissingCalibKey, "Tr_velo_to_cam");

  const Eigen::Matrix3d rrt = calib.R0_rect * calib.R0_rect.transpose();
  if ((rrt - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kOrthonormalTol)
    throw Error(ErrorCode::kMalformedCalib, "R0_rect is not orthonormal");
  const double det = calib.Tr_velo_to_cam.leftCols<3>().determinant();
  if (std::abs(det - 1.0) > kOrthonormalTol)
    throw Error(ErrorCode::kMalformedCalib, fmt::format("Tr_velo_to_cam rotation has determinant {}", det));
  return calib;
}

std::string write_calib(const CalibBundle& calib) {
  std::vector<CalibEntry> entries = calib.entries;
  if (entries.empty()) {
    entries = {{calib.camera_key, {}}, {"R0_rect", {}}, {"Tr_velo_to_cam", {}}};
  }
  std::string out;
  for (const auto& e : entries) {
    std::string values = e.text;
    if (e.key == calib.camera_key) {
      values = format_row_major(calib.P2);
    } else if (is_r0_key(e.key)) {
      values = format_row_major(calib.R0_rect);
    } else if (is_tr_key(e.key)) {
      values = format_row_major(calib.Tr_velo_to_cam);
    }
    out += e.key;
    out += ':';
    if (!values.empty()) {
      out += ' ';
      out += values;
    }
    out += '\n';
  }
  return out;
}

std::vector<LabelRecord> parse_label_file(std::string_view text) {
  std::vector<LabelRecord> records;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = split_ws(lines[i]);
    if (fields.empty()) continue;
    if (fields.size() != 15 && fields.size() != 16)
      bad_label(line_no, fmt::format("{} fields, expected 15 or 16", fields.size()));

    double v[15] = {};
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto d = to_double(fields[f]);
      if (!d || !std::isfinite(*d)) bad_label(line_no, fmt::format("field {} is not a finite number", f + 1));
      if (f < 15) v[f - 1] = *d;
    }

    LabelRecord r;
    r.cls = std::string(fields[0]);
    r.truncation = v[0];
    if (v[1] != std::floor(v[1]) || std::abs(v[1]) > 1e6) bad_label(line_no, "occlusion is not an integer");
    r.occlusion = static_cast<int>(v[1]);
    r.alpha = v[2];
    r.bbox2d = {v[3], v[4], v[5], v[6]};
    r.h = v[7];
    r.w = v[8];
    r.l = v[9];
    r.loc = {v[10], v[11], v[12]};
    r.ry = v[13];
    if (fields.size() == 16) r.score = *to_double(fields[15]);

    if (r.is_dont_care()) {
      r.raw = std::string(trim(lines[i]));
    } else {
      if (r.bbox2d.x1 > r.bbox2d.x2 || r.bbox2d.y1 > r.bbox2d.y2) bad_label(line_no, "inverted 2D box");
      if (r.h < 0 || r.w < 0 || r.l < 0) bad_label(line_no, "negative dimension");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string format_label_line(const LabelRecord& r) {
  if (r.is_dont_care() && !r.raw.empty()) return r.raw;
  std::string line = fmt::format(
      "{} {:.2f} {} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f}", r.cls,
      r.truncation, r.occlusion, r.alpha, r.bbox2d.x1, r.bbox2d.y1, r.bbox2d.x2, r.bbox2d.y2, r.h, r.w, r.l,
      r.loc.x(), r.loc.y(), r.loc.z(), r.ry);
  if (r.score) line += fmt::format(" {:.4f}", *r.score);
  return line;
}

std::string write_label_file(std::span<const LabelRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += format_label_line(r);
    out += '\n';
  }
  return out;
}

PointCloud parse_velodyne(std::string_view bytes) {
  constexpr std::size_t kStride = 4 * sizeof(std::uint32_t);
  if (bytes.size() % kStride != 0)
    throw Error(ErrorCode::kMalformedCloud, fmt::format("{} bytes is not a multiple of 16", bytes.size()));

  auto load = [&](std::size_t offset) {
    std::uint32_t word = 0;
    for (std::size_t b = 0; b < 4; ++b)
      word |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
    return std::bit_cast<float>(word);
  };

  PointCloud cloud;
  const std::size_t n = bytes.size() / kStride;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t o = i * kStride;
    const LidarPoint p{load(o), load(o + 4), load(o + 8), load(o + 12)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.r)) {
      ++cloud.dropped_non_finite;
      continue;
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

std::string encode_velodyne(std::span<const LidarPoint> points) {
  std::string out;
  out.reserve(points.size() * 16);
  auto store = [&](float f) {
    const auto word = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((word >> (8 * b)) & 0xffu));
  };
  for (const auto& p : points) {
    store(p.x);
    store(p.y);
    store(p.z);
    store(p.r);
  }
  return out;
}

std::vector<Detection2D> parse_detections(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    bad_detections(e.what());
  }
  if (!doc.is_array()) bad_detections("top-level value must be an array");

  std::vector<Detection2D> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    if (!item.is_object()) bad_detections(fmt::format("entry {} is not an object", i));
    if (!item.contains("bbox") || !item.contains("score") || !item.contains("class"))
      bad_detections(fmt::format("entry {} needs bbox, score and class", i));

    Detection2D det;
    const json& bbox = item["bbox"];
    if (!bbox.is_array() || bbox.size() != 4) bad_detections(fmt::format("entry {}: bbox needs 4 numbers", i));
    det.bbox2d = {json_number(bbox[0], "bbox"), json_number(bbox[1], "bbox"), json_number(bbox[2], "bbox"),
                  json_number(bbox[3], "bbox")};
    if (det.bbox2d.x1 > det.bbox2d.x2 || det.bbox2d.y1 > det.bbox2d.y2)
      bad_detections(fmt::format("entry {}: inverted bbox", i));

    det.score = json_number(item["score"], "score");
    if (!(det.score >= 0.0 && det.score <= 1.0))
      throw Error(ErrorCode::kInvalidScore, fmt::format("entry {}: score {} outside [0,1]", i, det.score));

    if (!item["class"].is_string()) bad_detections(fmt::format("entry {}: class must be a string", i));
    det.cls = item["class"].get<std::string>();

    if (item.contains("mask") && !item["mask"].is_null()) {
      const json& mask = item["mask"];
      if (!mask.is_array() || mask.size() < 3)
        bad_detections(fmt::format("entry {}: mask polygon needs at least 3 vertices", i));
      std::vector<Pixel> polygon;
      polygon.reserve(mask.size());
      for (const auto& vtx : mask) {
        if (!vtx.is_array() || vtx.size() != 2) bad_detections(fmt::format("entry {}: mask vertex must be [u,v]", i));
        polygon.push_back({json_number(vtx[0], "mask"), json_number(vtx[1], "mask")});
      }
      det.mask = std::move(polygon);
    }
    out.push_back(std::move(det));
  }
  return out;
}

std::string write_detections(std::span<const Detection2D> detections) {
  json doc = json::array();
  for (const auto& d : detections) {
    json item;
    item["bbox"] = {d.bbox2d.x1, d.bbox2d.y1, d.bbox2d.x2, d.bbox2d.y2};
    item["score"] = d.score;
    item["class"] = d.cls;
    if (d.mask) {
      json mask = json::array();
      for (const auto& p : *d.mask) mask.push_back({p.u, p.v});
      item["mask"] = std::move(mask);
    }
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

void validate_manifest(const DatasetManifest& manifest) {
  std::set<std::string> seen;
  for (const auto& f : manifest.frames) {
    if (f.frame_id.empty()) throw Error(ErrorCode::kMalformedManifest, "empty frame_id");
    if (!seen.insert(f.frame_id).second) throw Error(ErrorCode::kDuplicateFrameId, f.frame_id);
    if (f.has_annotation && f.label.empty())
      throw Error(ErrorCode::kMalformedManifest, fmt::format("annotated frame {} has no label path", f.frame_id));
  }
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, e.what());
  }

  DatasetManifest manifest;
  try {
    if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array())
      throw Error(ErrorCode::kMalformedManifest, "expected an object with a 'frames' array");
    if (doc.contains("sequence_id") && !doc["sequence_id"].is_null())
      manifest.sequence_id = doc["sequence_id"].get<std::string>();
    for (const auto& item : doc["frames"]) {
      FrameEntry f;
      f.frame_id = item.at("frame_id").get<std::string>();
      f.has_annotation = item.value("has_annotation", false);
      f.pseudo_label = item.value("pseudo_label", false);
      f.image = resolve(base_dir, item.value("image", std::string{}));
      f.velodyne = resolve(base_dir, item.value("velodyne", std::string{}));
      f.calib = resolve(base_dir, item.value("calib", std::string{}));
      f.label = resolve(base_dir, item.value("label", std::string{}));
      f.detections = resolve(base_dir, item.value("detections", std::string{}));
      manifest.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, e.what());
  }
  validate_manifest(manifest);
  return manifest;
}

std::string write_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  json doc;
  if (manifest.sequence_id) doc["sequence_id"] = *manifest.sequence_id;
  json frames = json::array();
  for (const auto& f : manifest.frames) {
    json item;
    item["frame_id"] = f.frame_id;
    item["has_annotation"] = f.has_annotation;
    if (f.pseudo_label) item["pseudo_label"] = true;
    auto put = [&](const char* key, const std::filesystem::path& p) {
      if (!p.empty()) item[key] = relativize(base_dir, p);
    };
    put("image", f.image);
    put("velodyne", f.velodyne);
    put("calib", f.calib);
    put("label", f.label);
    put("detections", f.detections);
    frames.push_back(std::move(item));
  }
  doc["frames"] = std::move(frames);
  return doc.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::kMissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, fmt::format("short write to {}", path.string()));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

}  // namespace lpcg
