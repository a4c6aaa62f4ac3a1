#pragma once

#include <map>
#include <optional>
#include <vector>

#include "pdsr/core.hpp"

namespace pdsr {

struct QuantizerOptions {
  // Fewer mutually visible joints than this make a comparison meaningless.
  int min_common_joints = 4;
};

/// Root of the mean squared per-joint displacement over joints visible in
/// both poses. Throws kNoCommonJoints below `min_common_joints`.
Scalar keypoint_distance(const PoseVector& a, const PoseVector& b, int min_common_joints = 4);

/// Same as keypoint_distance but returns nullopt instead of throwing when
/// too few joints are shared.
std::optional<Scalar> try_keypoint_distance(const PoseVector& a, const PoseVector& b,
                                            int min_common_joints = 4);

struct PoseAssignment {
  FrameId frame_id = 0;
  std::optional<PoseIndex> pose;  // nullopt: unassignable
  Scalar distance = 0;

  bool assigned() const { return pose.has_value(); }
};

/// Nearest canonical pose; ties go to the lowest index.
PoseAssignment assign_pose(const PoseVector& frame_pose, const CanonicalPoseSet& canon,
                           const QuantizerOptions& options = {});

struct PoseGrouping {
  // Frame positions (into Tracklet::frames) per observed pose, in frame order.
  std::map<PoseIndex, std::vector<std::size_t>> groups;
  std::map<PoseIndex, Scalar> frequency;
  std::vector<PoseAssignment> assignments;
  std::size_t assignable = 0;
};

/// Partitions the assignable frames of `t` by canonical pose. Throws
/// kAllFramesUnassignable when no frame can be assigned.
PoseGrouping group_by_pose(const Tracklet& t, const CanonicalPoseSet& canon,
                           const QuantizerOptions& options = {});

}  // namespace pdsr
