#include "semreg/point_cloud_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "semreg/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "scan and label records are little-endian");

namespace semreg {

namespace {

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> buf(static_cast<std::size_t>(size));
  if (size > 0) in.read(buf.data(), size);
  if (!in) throw IoError("failed reading file: " + path);
  return buf;
}

}  // namespace

std::uint32_t LabelConfig::canonical(std::uint32_t raw) const {
  auto it = remap.find(raw);
  if (it != remap.end()) return it->second;
  if (instance_classes.count(raw) || feature_classes.count(raw)) return raw;
  return unclassified_id;
}

void LabelConfig::validate() const {
  for (std::uint32_t id : instance_classes) {
    if (feature_classes.count(id))
      throw ConfigError("label id " + std::to_string(id) +
                        " is in both instance_classes and feature_classes");
  }
  if (instance_classes.count(unclassified_id) ||
      feature_classes.count(unclassified_id))
    throw ConfigError("unclassified_id " + std::to_string(unclassified_id) +
                      " must not be a classified label");
}

SemanticPointCloud load_scan(const std::string& path,
                             std::uint32_t unclassified_id) {
  const std::vector<char> buf = read_all(path);
  if (buf.size() % 16 != 0)
    throw IoError("truncated record in " + path + ": " +
                  std::to_string(buf.size()) + " bytes is not a multiple of 16");

  const std::size_t n = buf.size() / 16;
  SemanticPointCloud cloud;
  cloud.points.reserve(n);
  cloud.labels.assign(n, unclassified_id);
  for (std::size_t i = 0; i < n; ++i) {
    float xyz[4];
    std::memcpy(xyz, buf.data() + i * 16, 16);
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(xyz[k]))
        throw IoError("non-finite coordinate at point " + std::to_string(i) +
                      " in " + path);
    }
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  return cloud;
}

void write_scan(const std::string& path, const SemanticPointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (const Vec3& p : cloud.points) {
    const float xyz[4] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z()), 0.0f};
    out.write(reinterpret_cast<const char*>(xyz), 16);
  }
  if (!out) throw IoError("failed writing file: " + path);
}

SemanticPointCloud load_labels(const std::string& path,
                               const SemanticPointCloud& cloud,
                               const LabelConfig& cfg) {
  const std::vector<char> buf = read_all(path);
  if (buf.size() % 4 != 0)
    throw IoError("truncated record in " + path);
  const std::size_t n = buf.size() / 4;
  if (n != cloud.size())
    throw IoError("label count mismatch for " + path + ": " +
                  std::to_string(n) + " records for " +
                  std::to_string(cloud.size()) + " points");

  SemanticPointCloud out = cloud;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, buf.data() + i * 4, 4);
    out.labels[i] = cfg.canonical(raw & 0xffffu);
  }
  return out;
}

void write_labels(const std::string& path, const SemanticPointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (std::uint32_t l : cloud.labels)
    out.write(reinterpret_cast<const char*>(&l), 4);
  if (!out) throw IoError("failed writing file: " + path);
}

std::vector<Pose> load_poses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<Pose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double m[12];
    for (int k = 0; k < 12; ++k) {
      if (!(ss >> m[k]))
        throw IoError("malformed pose line " + std::to_string(lineno) +
                      " in " + path + ": expected 12 reals");
    }
    std::string extra;
    if (ss >> extra)
      throw IoError("malformed pose line " + std::to_string(lineno) + " in " +
                    path + ": expected 12 reals");
    Pose p;
    Mat3 r;
    r << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    p.rotation = project_to_rotation(r);
    p.translation = Vec3(m[3], m[7], m[11]);
    poses.push_back(p);
  }
  return poses;
}

void write_poses(const std::string& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.precision(17);
  for (const Pose& p : poses) {
    const Mat3& r = p.rotation;
    const Vec3& t = p.translation;
    out << r(0, 0) << ' ' << r(0, 1) << ' ' << r(0, 2) << ' ' << t.x() << ' '
        << r(1, 0) << ' ' << r(1, 1) << ' ' << r(1, 2) << ' ' << t.y() << ' '
        << r(2, 0) << ' ' << r(2, 1) << ' ' << r(2, 2) << ' ' << t.z() << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace semreg
