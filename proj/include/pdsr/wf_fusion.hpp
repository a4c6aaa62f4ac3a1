#pragma once

#include <span>

#include "pdsr/core.hpp"
#include "pdsr/synth_features.hpp"

namespace pdsr {

/// Average pooling of all frame features.
FeatureVector baseline_embedding(const Tracklet& t);

struct WfEmbedding {
  FeatureVector vector;
  Scalar weight_used = 0;
  std::size_t real_count = 0;
  int synth_count = 0;
};

/// w * mean(real frame features) + mean(synthetic canonical-pose features).
///
/// Under kStrict every canonical pose must be served by the bank, otherwise
/// kMissingSynthetic. Under kLenient the synthetic mean runs over the served
/// poses only. An empty bank is an error under either policy.
WfEmbedding wf_embedding(const Tracklet& t, const SyntheticBank& bank, Scalar w,
                         MissingPolicy policy = MissingPolicy::kStrict);

WfEmbedding wf_embedding(const Tracklet& t, const SyntheticFeatureProvider& provider,
                         const CanonicalPoseSet& canon, Scalar w, const RepresentativeChoice& rep,
                         MissingPolicy policy = MissingPolicy::kStrict);

/// Cosine similarity of `probe` against each gallery vector.
ScoreVector cosine_scores(const FeatureVector& probe, std::span<const FeatureVector> gallery);

ScoreVector wf_score(const WfEmbedding& probe, std::span<const WfEmbedding> gallery);

}  // namespace pdsr
