#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdsr/core.hpp"

namespace pdsr {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary feature matrix: "PDSR", u32 version, u64 rows, u32 dim (all
/// little-endian), then rows*dim little-endian float32 in row-major order.
inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 4 + 8 + 4;

FloatMatrix read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const std::filesystem::path& path, const FloatMatrix& rows);

/// Rounds every entry through float32 so the in-memory value equals what a
/// feature file round-trip yields.
FeatureVector to_float_precision(const FeatureVector& v);

struct Dataset {
  std::string name = "dataset";
  Eigen::Index dim = 0;
  Eigen::Index joints = 0;
  int pose_count = 0;
  std::vector<Tracklet> tracklets;

  int camera_count() const;
  DatasetShape shape() const { return {dim, joints}; }
};

/// Manifest (JSON) + feature matrix. Throws kMalformedFile, kDanglingReference
/// or kDimensionMismatch; the result always passes validate_dataset.
Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& features_path);

/// Writes features row by row in tracklet/frame order.
void save_dataset(const Dataset& dataset, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& features_path);

CanonicalPoseSet load_canonical_set(const std::filesystem::path& path);
void save_canonical_set(const CanonicalPoseSet& canon, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pdsr
