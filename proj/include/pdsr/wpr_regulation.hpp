#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pdsr/core.hpp"
#include "pdsr/pose_quantizer.hpp"
#include "pdsr/synth_features.hpp"

namespace pdsr {

/// Pools frame features per observed canonical pose. Only real entries are
/// produced here; missing poses depend on the partner and are filled by
/// align_pair.
PoseNormalizedEmbedding pose_normalize(const Tracklet& t, const CanonicalPoseSet& canon,
                                       const QuantizerOptions& options = {});

struct AlignedSide {
  FeatureVector feature;
  Scalar frequency = 0;
  Origin origin = Origin::kReal;
};

/// Two tracklets laid out on the sorted union of their observed poses.
/// `nu` is normalized to sum to one.
struct AlignedPair {
  std::vector<PoseIndex> poses;
  std::vector<AlignedSide> left;
  std::vector<AlignedSide> right;
  std::vector<Scalar> nu;
};

/// Aligns `a` and `b` on R(a) ∪ R(b), backfilling each side's missing poses
/// from its synthetic bank with frequency 0. Under kLenient, poses that cannot
/// be filled on either side are dropped (kEmptyUnion if nothing remains);
/// under kStrict they raise kMissingSynthetic.
AlignedPair align_pair(const PoseNormalizedEmbedding& a, const SyntheticBank& bank_a,
                       const PoseNormalizedEmbedding& b, const SyntheticBank& bank_b,
                       MissingPolicy policy = MissingPolicy::kStrict);

/// Σ_j ν_j · cos(left_j, right_j) in increasing pose order.
Scalar wpr_score(const AlignedPair& pair);

/// A tracklet prepared for pose-regulated matching.
struct WprOperand {
  PoseNormalizedEmbedding embedding;
  SyntheticBank bank;
};

WprOperand prepare_wpr(const Tracklet& t, const CanonicalPoseSet& canon,
                       const SyntheticFeatureProvider& provider, const RepresentativeChoice& rep,
                       const QuantizerOptions& options = {});

/// scores(p, g) = wpr_score(align_pair(probes[p], gallery[g])), computed
/// without materializing the aligned pairs. Results are bit-identical to the
/// per-pair path and independent of evaluation order.
Eigen::MatrixXd wpr_score_matrix(std::span<const WprOperand> probes,
                                 std::span<const WprOperand> gallery,
                                 MissingPolicy policy = MissingPolicy::kStrict);

}  // namespace pdsr
