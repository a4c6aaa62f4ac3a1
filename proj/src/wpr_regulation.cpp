#include "pdsr/wpr_regulation.hpp"

#include "pdsr/math.hpp"

namespace pdsr {

PoseNormalizedEmbedding pose_normalize(const Tracklet& t, const CanonicalPoseSet& canon,
                                       const QuantizerOptions& options) {
  const PoseGrouping grouping = group_by_pose(t, canon, options);
  PoseNormalizedEmbedding e;
  e.tracklet_id = t.id;
  e.entries.reserve(grouping.groups.size());
  for (const auto& [pose, members] : grouping.groups) {
    PoseEntry entry;
    entry.pose = pose;
    entry.feature = mean_of(members, [&t](std::size_t i) -> const FeatureVector& {
      return t.frames[i].feature;
    });
    entry.frequency = grouping.frequency.at(pose);
    entry.origin = Origin::kReal;
    e.entries.push_back(std::move(entry));
    e.observed.push_back(pose);
  }
  return e;
}

namespace {

struct Side {
  const FeatureVector* feature = nullptr;
  Scalar frequency = 0;
  Origin origin = Origin::kReal;
};

struct Term {
  PoseIndex pose;
  Side left;
  Side right;
};

// Resolves one side at `pose`: its own pooled entry or a synthetic backfill.
bool resolve(const PoseEntry* own, const SyntheticBank& bank, PoseIndex pose, MissingPolicy policy,
             Side& out) {
  if (own != nullptr) {
    out = {&own->feature, own->frequency, Origin::kReal};
    return true;
  }
  if (const FeatureVector* synth = bank.get(pose)) {
    out = {synth, 0, Origin::kSynthetic};
    return true;
  }
  if (policy == MissingPolicy::kStrict) {
    throw Error(ErrorCode::kMissingSynthetic,
                "tracklet " + bank.tracklet_id + " pose " + std::to_string(pose.value()));
  }
  return false;
}

// Walks the sorted union of observed poses in increasing order.
void collect_terms(const PoseNormalizedEmbedding& a, const SyntheticBank& bank_a,
                   const PoseNormalizedEmbedding& b, const SyntheticBank& bank_b,
                   MissingPolicy policy, std::vector<Term>& terms) {
  terms.clear();
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() || ib != b.entries.end()) {
    const PoseEntry* ea = nullptr;
    const PoseEntry* eb = nullptr;
    PoseIndex pose;
    if (ib == b.entries.end() || (ia != a.entries.end() && ia->pose < ib->pose)) {
      ea = &*ia++;
      pose = ea->pose;
    } else if (ia == a.entries.end() || ib->pose < ia->pose) {
      eb = &*ib++;
      pose = eb->pose;
    } else {
      ea = &*ia++;
      eb = &*ib++;
      pose = ea->pose;
    }
    Term term{pose, {}, {}};
    const bool left_ok = resolve(ea, bank_a, pose, policy, term.left);
    const bool right_ok = resolve(eb, bank_b, pose, policy, term.right);
    if (left_ok && right_ok) terms.push_back(term);
  }
  if (terms.empty()) {
    throw Error(ErrorCode::kEmptyUnion, a.tracklet_id + " vs " + b.tracklet_id);
  }
}

Scalar raw_weight(const Term& t) { return (t.left.frequency + t.right.frequency) / 2; }

Scalar raw_weight_total(const std::vector<Term>& terms) {
  Scalar total = 0;
  for (const Term& t : terms) total += raw_weight(t);
  return total;
}

Scalar score_terms(const std::vector<Term>& terms) {
  const Scalar total = raw_weight_total(terms);
  Scalar score = 0;
  for (const Term& t : terms) {
    score += (raw_weight(t) / total) * cosine_similarity(*t.left.feature, *t.right.feature);
  }
  return score;
}

}  // namespace

AlignedPair align_pair(const PoseNormalizedEmbedding& a, const SyntheticBank& bank_a,
                       const PoseNormalizedEmbedding& b, const SyntheticBank& bank_b,
                       MissingPolicy policy) {
  std::vector<Term> terms;
  collect_terms(a, bank_a, b, bank_b, policy, terms);
  const Scalar total = raw_weight_total(terms);

  AlignedPair pair;
  pair.poses.reserve(terms.size());
  pair.left.reserve(terms.size());
  pair.right.reserve(terms.size());
  pair.nu.reserve(terms.size());
  for (const Term& t : terms) {
    pair.poses.push_back(t.pose);
    pair.left.push_back({*t.left.feature, t.left.frequency, t.left.origin});
    pair.right.push_back({*t.right.feature, t.right.frequency, t.right.origin});
    pair.nu.push_back(raw_weight(t) / total);
  }
  return pair;
}

Scalar wpr_score(const AlignedPair& pair) {
  Scalar score = 0;
  for (std::size_t j = 0; j < pair.poses.size(); ++j) {
    score += pair.nu[j] * cosine_similarity(pair.left[j].feature, pair.right[j].feature);
  }
  return score;
}

WprOperand prepare_wpr(const Tracklet& t, const CanonicalPoseSet& canon,
                       const SyntheticFeatureProvider& provider, const RepresentativeChoice& rep,
                       const QuantizerOptions& options) {
  return {pose_normalize(t, canon, options), build_synthetic_bank(t, provider, canon.size(), rep)};
}

Eigen::MatrixXd wpr_score_matrix(std::span<const WprOperand> probes,
                                 std::span<const WprOperand> gallery, MissingPolicy policy) {
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(probes.size()),
                         static_cast<Eigen::Index>(gallery.size()));
  std::vector<Term> terms;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      collect_terms(probes[p].embedding, probes[p].bank, gallery[g].embedding, gallery[g].bank,
                    policy, terms);
      scores(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(g)) = score_terms(terms);
    }
  }
  return scores;
}

}  // namespace pdsr
