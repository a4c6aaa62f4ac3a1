#include "pdsr/wf_fusion.hpp"

#include <cmath>

#include "pdsr/math.hpp"

namespace pdsr {

FeatureVector baseline_embedding(const Tracklet& t) {
  if (t.frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tracklet " + t.id + " has no frames");
  }
  return mean_of(t.frames, [](const FrameRecord& f) -> const FeatureVector& { return f.feature; });
}

WfEmbedding wf_embedding(const Tracklet& t, const SyntheticBank& bank, Scalar w,
                         MissingPolicy policy) {
  if (!(w >= 0) || !std::isfinite(w)) {
    throw Error(ErrorCode::kInvalidArgument, "fusion weight must be finite and non-negative");
  }
  std::vector<const FeatureVector*> served;
  served.reserve(bank.by_pose.size());
  for (std::size_t j = 0; j < bank.by_pose.size(); ++j) {
    if (bank.by_pose[j]) {
      served.push_back(&*bank.by_pose[j]);
    } else if (policy == MissingPolicy::kStrict) {
      throw Error(ErrorCode::kMissingSynthetic,
                  "tracklet " + t.id + " pose " + std::to_string(j + 1));
    }
  }
  if (served.empty()) {
    throw Error(ErrorCode::kMissingSynthetic, "tracklet " + t.id + " has no synthetic poses");
  }

  WfEmbedding e;
  const FeatureVector synth =
      mean_of(served, [](const FeatureVector* v) -> const FeatureVector& { return *v; });
  const FeatureVector real = baseline_embedding(t);
  if (synth.size() != real.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "synthetic feature dimension for " + t.id);
  }
  e.vector = w * real + synth;
  e.weight_used = w;
  e.real_count = t.frames.size();
  e.synth_count = static_cast<int>(served.size());
  return e;
}

WfEmbedding wf_embedding(const Tracklet& t, const SyntheticFeatureProvider& provider,
                         const CanonicalPoseSet& canon, Scalar w, const RepresentativeChoice& rep,
                         MissingPolicy policy) {
  return wf_embedding(t, build_synthetic_bank(t, provider, canon.size(), rep), w, policy);
}

ScoreVector cosine_scores(const FeatureVector& probe, std::span<const FeatureVector> gallery) {
  ScoreVector s(static_cast<Eigen::Index>(gallery.size()));
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    s(static_cast<Eigen::Index>(g)) = cosine_similarity(probe, gallery[g]);
  }
  return s;
}

ScoreVector wf_score(const WfEmbedding& probe, std::span<const WfEmbedding> gallery) {
  ScoreVector s(static_cast<Eigen::Index>(gallery.size()));
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    s(static_cast<Eigen::Index>(g)) = cosine_similarity(probe.vector, gallery[g].vector);
  }
  return s;
}

}  // namespace pdsr
