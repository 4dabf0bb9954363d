#pragma once

#include <string>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

/// Reads a velodyne-style binary scan: 16-byte records of little-endian
/// float32 (x, y, z, intensity). Intensity is discarded; labels start as
/// `unclassified_id`. Throws IoError on a missing file, a trailing partial
/// record, or a non-finite coordinate (the message names the point index).
SemanticPointCloud load_scan(const std::string& path,
                             std::uint32_t unclassified_id = 0);

/// Companion writer: float32 records with a zero intensity channel.
void write_scan(const std::string& path, const SemanticPointCloud& cloud);

/// Reads per-point labels (one little-endian uint32 per point; the lower
/// 16 bits are the semantic class, upper bits carry an instance id and are
/// ignored) and returns a copy of `cloud` with labels remapped through
/// `cfg`. Throws IoError when the record count differs from the cloud size.
SemanticPointCloud load_labels(const std::string& path,
                               const SemanticPointCloud& cloud,
                               const LabelConfig& cfg);

/// Companion writer: canonical labels as uint32 records.
void write_labels(const std::string& path, const SemanticPointCloud& cloud);

/// Reads a pose file with 12 whitespace-separated reals per line
/// (row-major 3x4). Rotations are re-projected onto SO(3); ground-truth
/// files carry rounding noise. Throws IoError with the 1-based line number
/// on a malformed line.
std::vector<Pose> load_poses(const std::string& path);

void write_poses(const std::string& path, const std::vector<Pose>& poses);

}  // namespace semreg
