#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pdsr {

using Scalar = double;
using FeatureVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using ScoreVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using JointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;
using VisibilityMask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using FrameId = std::int64_t;
using CameraId = int;

enum class ErrorCode {
  kNoCommonJoints,
  kAllFramesUnassignable,
  kMissingSynthetic,
  kZeroVector,
  kEmptyUnion,
  kLengthMismatch,
  kMalformedFile,
  kDanglingReference,
  kDimensionMismatch,
  kInvalidArgument,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Keypoint layout of one frame: k joints in normalized crop coordinates.
struct PoseVector {
  JointMatrix joints;
  VisibilityMask visible;

  Eigen::Index joint_count() const { return joints.rows(); }

  static PoseVector all_visible(JointMatrix joints) {
    PoseVector p;
    p.visible = VisibilityMask::Constant(joints.rows(), true);
    p.joints = std::move(joints);
    return p;
  }
};

/// 1-based index into a CanonicalPoseSet.
class PoseIndex {
 public:
  constexpr PoseIndex() = default;
  constexpr explicit PoseIndex(int j) : j_(j) {}

  constexpr int value() const { return j_; }
  constexpr std::size_t offset() const { return static_cast<std::size_t>(j_ - 1); }

  friend constexpr auto operator<=>(PoseIndex, PoseIndex) = default;

 private:
  int j_ = 1;
};

inline const std::string kDistractor = "DISTRACTOR";

struct FrameRecord {
  FrameId frame_id = 0;
  FeatureVector feature;
  PoseVector pose;
};

struct Tracklet {
  std::string id;
  std::string identity;
  CameraId camera = 0;
  // Explicit query flag from a manifest; overrides seeded probe selection.
  bool probe = false;
  std::vector<FrameRecord> frames;

  bool is_distractor() const { return identity == kDistractor; }
  std::size_t length() const { return frames.size(); }
  const FrameRecord* find_frame(FrameId id) const;
};

struct CanonicalPoseSet {
  std::vector<PoseVector> poses;

  int size() const { return static_cast<int>(poses.size()); }
  const PoseVector& operator[](PoseIndex j) const { return poses.at(j.offset()); }
};

enum class Origin { kReal, kSynthetic };

struct PoseEntry {
  PoseIndex pose;
  FeatureVector feature;
  Scalar frequency = 0;
  Origin origin = Origin::kReal;
};

/// Per-canonical-pose pooled features of one tracklet. `entries` is sorted
/// by strictly increasing pose index.
struct PoseNormalizedEmbedding {
  std::string tracklet_id;
  std::vector<PoseEntry> entries;
  std::vector<PoseIndex> observed;
  std::vector<PoseIndex> backfilled;

  const PoseEntry* find(PoseIndex j) const;
};

/// Expected dataset shape. Zero means "infer from the data".
struct DatasetShape {
  Eigen::Index dim = 0;
  Eigen::Index joints = 0;
};

struct Finding {
  enum class Kind {
    kDimensionMismatch,
    kJointCountMismatch,
    kEmptyTracklet,
    kCoordinateOutOfRange,
    kNonFiniteFeature,
    kZeroFeature,
    kDuplicateFrameId,
    kDuplicateTrackletId,
    kEmptyCanonicalSet,
    kDuplicateCanonicalPose,
  };
  Kind kind;
  std::string tracklet_id;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  std::size_t count(Finding::Kind kind) const;
};

ValidationReport validate_dataset(std::span<const Tracklet> tracklets, const CanonicalPoseSet& canon,
                                  DatasetShape shape = {});

}  // namespace pdsr
