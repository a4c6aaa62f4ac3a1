#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdsr/core.hpp"

namespace pdsr {

enum class MissingPolicy { kStrict, kLenient };

/// Feature-level stand-in for a pose-conditioned image generator: the
/// feature of the image showing a tracklet's representative frame re-posed
/// into canonical pose j. Implementations must be deterministic and safe for
/// concurrent const calls.
class SyntheticFeatureProvider {
 public:
  virtual ~SyntheticFeatureProvider() = default;

  /// nullopt when the provider has nothing for this key.
  virtual std::optional<FeatureVector> lookup(const Tracklet& t, FrameId representative,
                                              PoseIndex pose) const = 0;

  /// Like lookup, but a miss raises kMissingSynthetic.
  FeatureVector query(const Tracklet& t, FrameId representative, PoseIndex pose) const;
};

struct RepresentativeChoice {
  enum class Strategy { kSeededRandom, kMiddleFrame };
  Strategy strategy = Strategy::kSeededRandom;
  std::uint64_t seed = 0;
};

/// Frame fed to the generator for every canonical pose of `t`.
FrameId choose_representative(const Tracklet& t, const RepresentativeChoice& choice);

/// Serves pre-computed features keyed by (tracklet id, pose).
class FileBackedProvider final : public SyntheticFeatureProvider {
 public:
  /// Index lines are `tracklet_id<TAB>pose_index<TAB>row`, rows referring
  /// into the feature matrix at `features_path`.
  static FileBackedProvider load(const std::filesystem::path& index_path,
                                 const std::filesystem::path& features_path);

  FileBackedProvider(std::map<std::pair<std::string, int>, FeatureVector> table, Eigen::Index dim);

  std::optional<FeatureVector> lookup(const Tracklet& t, FrameId representative,
                                      PoseIndex pose) const override;

  std::size_t size() const { return table_.size(); }
  Eigen::Index dimension() const { return dim_; }
  std::vector<PoseIndex> poses_for(const std::string& tracklet_id) const;

 private:
  std::map<std::pair<std::string, int>, FeatureVector> table_;
  Eigen::Index dim_ = 0;
};

/// Test double: alpha * rep_feature + (1 - alpha) * prototype[j] + seeded noise.
class StubProvider final : public SyntheticFeatureProvider {
 public:
  StubProvider(std::vector<FeatureVector> prototypes, Scalar alpha, Scalar noise_sigma,
               std::uint64_t seed);

  std::optional<FeatureVector> lookup(const Tracklet& t, FrameId representative,
                                      PoseIndex pose) const override;

 private:
  std::vector<FeatureVector> prototypes_;
  Scalar alpha_;
  Scalar noise_sigma_;
  std::uint64_t seed_;
};

/// Synthetic features of one tracklet for every canonical pose, generated
/// once from a single representative frame and reused by every consumer.
struct SyntheticBank {
  std::string tracklet_id;
  FrameId representative = 0;
  std::vector<std::optional<FeatureVector>> by_pose;

  const FeatureVector* get(PoseIndex j) const;
  int served() const;
};

SyntheticBank build_synthetic_bank(const Tracklet& t, const SyntheticFeatureProvider& provider,
                                   int pose_count, const RepresentativeChoice& choice);

}  // namespace pdsr
