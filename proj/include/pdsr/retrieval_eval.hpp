#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdsr/core.hpp"
#include "pdsr/pose_quantizer.hpp"
#include "pdsr/synth_features.hpp"

namespace pdsr {

enum class Mode { kBaseline, kWf, kWpr, kWfPlusWpr };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct ProtocolConfig {
  std::uint64_t query_selection_seed = 0;
  bool exclude_same_camera = true;
  Mode mode = Mode::kWfPlusWpr;
};

/// One probe and its gallery, as positions into the dataset's tracklets.
struct ProbeSet {
  std::size_t probe = 0;
  std::vector<std::size_t> gallery;
};

/// One probe per non-distractor identity. Explicit manifest probe flags win;
/// otherwise the probe is a seeded draw keyed by (seed, identity) over that
/// identity's tracklets sorted by id, so manifest order never matters.
std::vector<ProbeSet> build_protocol(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg);

/// Element-wise sum, no rescaling.
ScoreVector fuse_scores(const ScoreVector& wf, const ScoreVector& wpr);

struct Ranking {
  std::string probe_id;
  std::vector<std::string> gallery_ids;  // decreasing score, ties by ascending id
  std::vector<Scalar> scores;
};

Ranking rank_gallery(const std::string& probe_id, std::span<const std::string> gallery_ids,
                     const ScoreVector& scores);

/// Mean of precision at each positive's rank; nullopt when the ranking holds
/// no positive (such probes are left out of mAP).
std::optional<Scalar> average_precision(const Ranking& ranking,
                                        const std::set<std::string>& positives);

/// 1-based rank of the first positive.
std::optional<std::size_t> first_hit(const Ranking& ranking, const std::set<std::string>& positives);

/// cmc[r-1] = fraction of probes with a positive whose first positive is at
/// rank <= r. Length is the longest ranking.
std::vector<Scalar> cmc_curve(std::span<const Ranking> rankings,
                              std::span<const std::set<std::string>> positives);

/// Probe-camera x gallery-camera mAP. Absent cells hold nullopt.
struct CameraConfusion {
  std::vector<CameraId> cameras;
  std::vector<std::optional<Scalar>> cells;  // row-major

  std::size_t size() const { return cameras.size(); }
  const std::optional<Scalar>& at(std::size_t x, std::size_t y) const {
    return cells[x * cameras.size() + y];
  }
  std::optional<Scalar>& at(std::size_t x, std::size_t y) { return cells[x * cameras.size() + y]; }
};

/// scores(p, i) is the score of probe p against tracklet i, for every
/// tracklet. Cell (X, Y) averages AP over probes from camera X ranked against
/// camera-Y tracklets only (the probe itself excluded), positives restricted
/// to camera Y.
CameraConfusion camera_confusion(std::span<const Tracklet> tracklets,
                                 std::span<const ProbeSet> probes, const Eigen::MatrixXd& scores);

struct ProbeResult {
  std::string probe_id;
  CameraId camera = 0;
  std::size_t gallery_size = 0;
  std::size_t positives = 0;
  std::optional<std::size_t> first_hit;
  std::optional<Scalar> ap;
};

struct EvalReport {
  Mode mode = Mode::kBaseline;
  std::vector<Scalar> cmc;
  Scalar map = 0;
  std::size_t evaluated_probes = 0;  // probes with at least one positive
  CameraConfusion camera_confusion;
  std::vector<ProbeResult> per_probe;
};

/// Inputs beyond the dataset. Modes other than kBaseline need `canon` and
/// `provider`.
struct EvalComponents {
  const CanonicalPoseSet* canon = nullptr;
  const SyntheticFeatureProvider* provider = nullptr;
  Scalar weight = 4.0;
  RepresentativeChoice representative;
  MissingPolicy policy = MissingPolicy::kStrict;
  QuantizerOptions quantizer;
};

/// Scores of each probe against every tracklet under `mode`.
Eigen::MatrixXd score_matrix(std::span<const Tracklet> tracklets,
                             std::span<const std::size_t> probe_rows, Mode mode,
                             const EvalComponents& components);

/// Rankings of each protocol probe over its protocol gallery.
std::vector<Ranking> rank_protocol(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg,
                                   const EvalComponents& components);

EvalReport evaluate(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg,
                    const EvalComponents& components);

}  // namespace pdsr
