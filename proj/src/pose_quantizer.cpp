#include "pdsr/pose_quantizer.hpp"

#include <cmath>
#include <string>

namespace pdsr {

std::optional<Scalar> try_keypoint_distance(const PoseVector& a, const PoseVector& b,
                                            int min_common_joints) {
  if (a.joint_count() != b.joint_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "poses with different joint counts");
  }
  const VisibilityMask common = a.visible && b.visible;
  const Eigen::Index n = common.count();
  if (n < min_common_joints || n == 0) {
    return std::nullopt;
  }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> sq =
      (a.joints - b.joints).rowwise().squaredNorm().array();
  const Scalar total = common.select(sq, Scalar(0)).sum();
  return std::sqrt(total / static_cast<Scalar>(n));
}

Scalar keypoint_distance(const PoseVector& a, const PoseVector& b, int min_common_joints) {
  auto d = try_keypoint_distance(a, b, min_common_joints);
  if (!d) {
    throw Error(ErrorCode::kNoCommonJoints,
                "fewer than " + std::to_string(min_common_joints) + " mutually visible joints");
  }
  return *d;
}

PoseAssignment assign_pose(const PoseVector& frame_pose, const CanonicalPoseSet& canon,
                           const QuantizerOptions& options) {
  if (canon.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty canonical pose set");
  }
  PoseAssignment best;
  for (int j = 1; j <= canon.size(); ++j) {
    const auto d = try_keypoint_distance(frame_pose, canon[PoseIndex(j)], options.min_common_joints);
    if (d && (!best.pose || *d < best.distance)) {
      best.pose = PoseIndex(j);
      best.distance = *d;
    }
  }
  return best;
}

PoseGrouping group_by_pose(const Tracklet& t, const CanonicalPoseSet& canon,
                           const QuantizerOptions& options) {
  PoseGrouping g;
  g.assignments.reserve(t.frames.size());
  for (std::size_t i = 0; i < t.frames.size(); ++i) {
    PoseAssignment a = assign_pose(t.frames[i].pose, canon, options);
    a.frame_id = t.frames[i].frame_id;
    if (a.pose) {
      g.groups[*a.pose].push_back(i);
      ++g.assignable;
    }
    g.assignments.push_back(a);
  }
  if (g.assignable == 0) {
    throw Error(ErrorCode::kAllFramesUnassignable, "tracklet " + t.id);
  }
  for (const auto& [pose, members] : g.groups) {
    g.frequency[pose] = static_cast<Scalar>(members.size()) / static_cast<Scalar>(g.assignable);
  }
  return g;
}

}  // namespace pdsr
