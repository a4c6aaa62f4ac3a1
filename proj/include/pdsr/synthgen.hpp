#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pdsr/core.hpp"
#include "pdsr/dataset_io.hpp"
#include "pdsr/synth_features.hpp"

namespace pdsr {

/// Parameters of a planted dataset. Noise magnitudes are expressed as the
/// expected norm of the added vector, so they do not depend on `dim`.
struct GenSpec {
  int identities = 10;
  int cameras = 2;
  int tracklets_per_camera = 1;  // per identity
  int min_frames = 4;
  int max_frames = 12;
  Eigen::Index dim = 128;
  Eigen::Index joints = 18;
  int pose_count = 8;
  Scalar pose_effect_scale = 0.5;
  Scalar noise_sigma = 0.1;
  Scalar keypoint_jitter = 0.0;
  // Observable poses per camera (1-based). Empty: every camera sees every pose.
  std::vector<std::vector<int>> pose_visibility;
  int distractors = 0;
  // Extra noise of the corrupted provider, on top of the ideal one.
  Scalar corruption_sigma = 1.0;
  std::uint64_t seed = 0;
};

GenSpec load_gen_spec(const std::filesystem::path& path);
GenSpec parse_gen_spec(const std::string& json_text);

/// Generator stand-in that knows the planted composition:
/// normalize(identity_latent + pose_offset[j] + corruption noise).
class PlantedProvider final : public SyntheticFeatureProvider {
 public:
  PlantedProvider(std::map<std::string, FeatureVector> latent_by_tracklet,
                  std::vector<FeatureVector> pose_offsets, Scalar corruption_sigma,
                  std::uint64_t seed);

  std::optional<FeatureVector> lookup(const Tracklet& t, FrameId representative,
                                      PoseIndex pose) const override;

 private:
  std::map<std::string, FeatureVector> latent_by_tracklet_;
  std::vector<FeatureVector> pose_offsets_;
  Scalar corruption_sigma_;
  std::uint64_t seed_;
};

struct GroundTruth {
  std::map<std::string, FeatureVector> identity_latent;  // by identity label
  std::map<std::string, FeatureVector> tracklet_latent;  // by tracklet id
  std::vector<FeatureVector> pose_offsets;
  std::map<std::string, std::vector<PoseIndex>> planted_poses;  // per frame, by tracklet id
};

struct SynthWorld {
  Dataset dataset;
  CanonicalPoseSet canon;
  std::shared_ptr<const PlantedProvider> ideal;
  std::shared_ptr<const PlantedProvider> corrupted;
  GroundTruth truth;
};

/// Deterministic in `spec` (including its seed).
SynthWorld generate(const GenSpec& spec);

/// Writes manifest.json, features.bin, canon.json and, for the ideal and the
/// corrupted provider, synth_index.tsv / synth_features.bin and
/// synth_corrupted_index.tsv / synth_corrupted_features.bin.
void write_world(const SynthWorld& world, const std::filesystem::path& out_dir);

}  // namespace pdsr
