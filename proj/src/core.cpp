#include "pdsr/core.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pdsr/pose_quantizer.hpp"

namespace pdsr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoCommonJoints: return "NO_COMMON_JOINTS";
    case ErrorCode::kAllFramesUnassignable: return "ALL_FRAMES_UNASSIGNABLE";
    case ErrorCode::kMissingSynthetic: return "MISSING_SYNTHETIC";
    case ErrorCode::kZeroVector: return "ZERO_VECTOR";
    case ErrorCode::kEmptyUnion: return "EMPTY_UNION";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kMalformedFile: return "MALFORMED_FILE";
    case ErrorCode::kDanglingReference: return "DANGLING_REFERENCE";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

const FrameRecord* Tracklet::find_frame(FrameId id) const {
  auto it = std::find_if(frames.begin(), frames.end(),
                         [id](const FrameRecord& f) { return f.frame_id == id; });
  return it == frames.end() ? nullptr : &*it;
}

const PoseEntry* PoseNormalizedEmbedding::find(PoseIndex j) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), j,
                             [](const PoseEntry& e, PoseIndex p) { return e.pose < p; });
  return (it != entries.end() && it->pose == j) ? &*it : nullptr;
}

std::size_t ValidationReport::count(Finding::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

namespace {

// Most frequent per-tracklet value, smallest on ties.
template <typename Get>
Eigen::Index dominant(std::span<const Tracklet> tracklets, Get get) {
  std::map<Eigen::Index, std::size_t> votes;
  for (const auto& t : tracklets) {
    if (!t.frames.empty()) ++votes[get(t.frames.front())];
  }
  Eigen::Index best = 0;
  std::size_t best_votes = 0;
  for (const auto& [value, n] : votes) {
    if (n > best_votes) {
      best = value;
      best_votes = n;
    }
  }
  return best;
}

bool coordinates_in_range(const PoseVector& p) {
  for (Eigen::Index i = 0; i < p.joint_count(); ++i) {
    if (!p.visible(i)) continue;
    const Scalar x = p.joints(i, 0);
    const Scalar y = p.joints(i, 1);
    if (!(x >= 0 && x <= 1 && y >= 0 && y <= 1)) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_dataset(std::span<const Tracklet> tracklets, const CanonicalPoseSet& canon,
                                  DatasetShape shape) {
  ValidationReport report;
  auto add = [&](Finding::Kind kind, const std::string& id, std::string msg) {
    report.findings.push_back({kind, id, std::move(msg)});
  };

  const Eigen::Index dim =
      shape.dim > 0 ? shape.dim
                    : dominant(tracklets, [](const FrameRecord& f) { return f.feature.size(); });
  Eigen::Index joints = shape.joints;
  if (joints == 0) {
    joints = canon.size() > 0 ? canon.poses.front().joint_count()
                              : dominant(tracklets, [](const FrameRecord& f) {
                                  return f.pose.joint_count();
                                });
  }

  if (canon.size() == 0) {
    add(Finding::Kind::kEmptyCanonicalSet, "", "canonical pose set is empty");
  }
  for (int a = 1; a <= canon.size(); ++a) {
    const PoseVector& pa = canon[PoseIndex(a)];
    if (pa.joint_count() != joints || pa.visible.size() != joints) {
      add(Finding::Kind::kJointCountMismatch, "", "canonical pose " + std::to_string(a));
      continue;
    }
    if (!coordinates_in_range(pa)) {
      add(Finding::Kind::kCoordinateOutOfRange, "", "canonical pose " + std::to_string(a));
    }
    for (int b = 1; b < a; ++b) {
      const PoseVector& pb = canon[PoseIndex(b)];
      if (pb.joint_count() != joints) continue;
      const auto d = try_keypoint_distance(pa, pb, 1);
      if (d && *d == 0) {
        add(Finding::Kind::kDuplicateCanonicalPose, "",
            "canonical poses " + std::to_string(b) + " and " + std::to_string(a) + " coincide");
      }
    }
  }

  std::set<std::string> seen_ids;
  for (const auto& t : tracklets) {
    if (!seen_ids.insert(t.id).second) {
      add(Finding::Kind::kDuplicateTrackletId, t.id, "tracklet id appears more than once");
    }
    if (t.frames.empty()) {
      add(Finding::Kind::kEmptyTracklet, t.id, "tracklet has no frames");
      continue;
    }
    bool dim_bad = false, joints_bad = false, range_bad = false, finite_bad = false, zero_bad = false;
    std::set<FrameId> frame_ids;
    for (const auto& f : t.frames) {
      if (!frame_ids.insert(f.frame_id).second) {
        add(Finding::Kind::kDuplicateFrameId, t.id, "frame " + std::to_string(f.frame_id));
      }
      dim_bad |= f.feature.size() != dim;
      joints_bad |= f.pose.joint_count() != joints || f.pose.visible.size() != joints;
      if (!joints_bad) range_bad |= !coordinates_in_range(f.pose);
      finite_bad |= !f.feature.allFinite();
      zero_bad |= f.feature.size() > 0 && (f.feature.array() == 0).all();
    }
    if (dim_bad) {
      add(Finding::Kind::kDimensionMismatch, t.id,
          "feature dimension differs from " + std::to_string(dim));
    }
    if (joints_bad) {
      add(Finding::Kind::kJointCountMismatch, t.id,
          "joint count differs from " + std::to_string(joints));
    }
    if (range_bad) add(Finding::Kind::kCoordinateOutOfRange, t.id, "visible joint outside [0,1]");
    if (finite_bad) add(Finding::Kind::kNonFiniteFeature, t.id, "feature has NaN or Inf");
    if (zero_bad) add(Finding::Kind::kZeroFeature, t.id, "all-zero feature vector");
  }
  return report;
}

}  // namespace pdsr
