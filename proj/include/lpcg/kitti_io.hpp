#pragma once

// Readers and writers for the KITTI object-detection file formats plus the
// JSON detection and manifest files used by the labeling pipelines.

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lpcg {

using Matrix34d = Eigen::Matrix<double, 3, 4>;

struct CalibEntry {
  std::string key;
  std::string text;  // everything after "key:", trimmed
};

struct CalibBundle {
  Matrix34d P2 = Matrix34d::Identity();
  Eigen::Matrix3d R0_rect = Eigen::Matrix3d::Identity();
  Matrix34d Tr_velo_to_cam = Matrix34d::Identity();
  std::string camera_key = "P2";

  // All "key: values" lines in file order. Keeps write_calib byte-stable for
  // keys this library does not interpret (P0, P1, P3, Tr_imu_to_velo, ...).
  std::vector<CalibEntry> entries;
};

// `camera_key` selects which projection matrix populates P2 ("P2" for the
// left colour camera, "P3" for the right one).
CalibBundle parse_calib(std::string_view text, std::string_view camera_key = "P2");
std::string write_calib(const CalibBundle& calib);

struct BBox2D {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
};

struct LabelRecord {
  std::string cls;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  BBox2D bbox2d;
  double h = 0.0, w = 0.0, l = 0.0;
  Eigen::Vector3d loc = Eigen::Vector3d::Zero();
  double ry = 0.0;
  std::optional<double> score;

  // Original line for DontCare records, which are written back verbatim.
  std::string raw;

  bool is_dont_care() const { return cls == "DontCare"; }
};

std::vector<LabelRecord> parse_label_file(std::string_view text);
std::string format_label_line(const LabelRecord& record);
std::string write_label_file(std::span<const LabelRecord> records);

struct LidarPoint {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;
  float r = 0.f;
};

struct PointCloud {
  std::vector<LidarPoint> points;
  std::size_t dropped_non_finite = 0;

  std::size_t size() const { return points.size(); }
};

// Packed little-endian float32 quadruples (x, y, z, reflectance).
PointCloud parse_velodyne(std::string_view bytes);
std::string encode_velodyne(std::span<const LidarPoint> points);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct Detection2D {
  BBox2D bbox2d;
  std::optional<std::vector<Pixel>> mask;
  std::string cls;
  double score = 0.0;
};

// JSON array of {"bbox":[x1,y1,x2,y2], "score":s, "class":c, "mask":[[u,v],...]}.
std::vector<Detection2D> parse_detections(std::string_view text);
std::string write_detections(std::span<const Detection2D> detections);

struct FrameEntry {
  std::string frame_id;
  bool has_annotation = false;
  // Empty path means "not provided".
  std::filesystem::path image;
  std::filesystem::path velodyne;
  std::filesystem::path calib;
  std::filesystem::path label;
  std::filesystem::path detections;
  // Set on frames whose label was produced by a pipeline rather than by hand.
  bool pseudo_label = false;
};

struct DatasetManifest {
  std::optional<std::string> sequence_id;
  std::vector<FrameEntry> frames;
};

// Relative paths inside the document are resolved against `base_dir`.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
// Paths under `base_dir` are written relative to it.
std::string write_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir);
void validate_manifest(const DatasetManifest& manifest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace lpcg
