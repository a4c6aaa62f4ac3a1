#include "pdsr/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pdsr/random.hpp"

namespace pdsr {

using nlohmann::json;

namespace {

constexpr std::uint64_t kCorruptionStream = 0x9e3779b97f4a7c15ULL;

std::string label(const char* prefix, int width, long long n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*lld", prefix, width, n);
  return buf;
}

FeatureVector gaussian(std::mt19937_64& rng, Eigen::Index dim, Scalar stddev) {
  std::normal_distribution<Scalar> n(0, stddev);
  FeatureVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = n(rng);
  return v;
}

FeatureVector unit_gaussian(std::mt19937_64& rng, Eigen::Index dim) {
  FeatureVector v = gaussian(rng, dim, 1);
  return v / v.norm();
}

// Per-coordinate stddev giving an expected vector norm of about `sigma`.
Scalar per_dim(Scalar sigma, Eigen::Index dim) {
  return sigma / std::sqrt(static_cast<Scalar>(dim));
}

void check_spec(const GenSpec& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, "gen spec: " + what); };
  if (s.identities < 1) fail("identities must be >= 1");
  if (s.cameras < 1) fail("cameras must be >= 1");
  if (s.tracklets_per_camera < 1) fail("tracklets_per_camera must be >= 1");
  if (s.min_frames < 1 || s.max_frames < s.min_frames) fail("frame range");
  if (s.dim < 1 || s.joints < 1 || s.pose_count < 1) fail("dim, joints and pose_count must be >= 1");
  if (s.pose_effect_scale < 0 || s.noise_sigma < 0 || s.keypoint_jitter < 0 ||
      s.corruption_sigma < 0) {
    fail("scales must be non-negative");
  }
  if (s.distractors < 0) fail("distractors must be >= 0");
  for (const auto& vis : s.pose_visibility) {
    if (vis.empty()) fail("pose_visibility subsets must be nonempty");
    for (int j : vis) {
      if (j < 1 || j > s.pose_count) fail("pose_visibility index out of range");
    }
  }
}

}  // namespace

GenSpec parse_gen_spec(const std::string& json_text) {
  GenSpec s;
  try {
    const json j = json::parse(json_text);
    s.identities = j.value("identities", s.identities);
    s.cameras = j.value("cameras", s.cameras);
    s.tracklets_per_camera = j.value("tracklets_per_camera", s.tracklets_per_camera);
    s.min_frames = j.value("min_frames", s.min_frames);
    s.max_frames = j.value("max_frames", s.max_frames);
    s.dim = j.value("dim", s.dim);
    s.joints = j.value("joints", s.joints);
    s.pose_count = j.value("pose_count", s.pose_count);
    s.pose_effect_scale = j.value("pose_effect_scale", s.pose_effect_scale);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.keypoint_jitter = j.value("keypoint_jitter", s.keypoint_jitter);
    s.pose_visibility = j.value("pose_visibility", s.pose_visibility);
    s.distractors = j.value("distractors", s.distractors);
    s.corruption_sigma = j.value("corruption_sigma", s.corruption_sigma);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("gen spec: ") + e.what());
  }
  check_spec(s);
  return s;
}

GenSpec load_gen_spec(const std::filesystem::path& path) { return parse_gen_spec(read_text_file(path)); }

PlantedProvider::PlantedProvider(std::map<std::string, FeatureVector> latent_by_tracklet,
                                 std::vector<FeatureVector> pose_offsets, Scalar corruption_sigma,
                                 std::uint64_t seed)
    : latent_by_tracklet_(std::move(latent_by_tracklet)),
      pose_offsets_(std::move(pose_offsets)),
      corruption_sigma_(corruption_sigma),
      seed_(seed) {}

std::optional<FeatureVector> PlantedProvider::lookup(const Tracklet& t, FrameId,
                                                     PoseIndex pose) const {
  auto it = latent_by_tracklet_.find(t.id);
  if (it == latent_by_tracklet_.end() || pose.value() < 1 || pose.offset() >= pose_offsets_.size()) {
    return std::nullopt;
  }
  FeatureVector v = it->second + pose_offsets_[pose.offset()];
  if (corruption_sigma_ > 0) {
    auto rng = keyed_engine(seed_, t.id, {static_cast<std::uint64_t>(pose.value())});
    v += gaussian(rng, v.size(), per_dim(corruption_sigma_, v.size()));
  }
  return to_float_precision(v / v.norm());
}

SynthWorld generate(const GenSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(keyed_engine(spec.seed, "synthgen"));
  SynthWorld w;
  GroundTruth& truth = w.truth;

  std::uniform_real_distribution<Scalar> coord(0.15, 0.85);
  for (int j = 0; j < spec.pose_count; ++j) {
    JointMatrix joints(spec.joints, 2);
    for (Eigen::Index i = 0; i < joints.size(); ++i) joints.data()[i] = coord(rng);
    w.canon.poses.push_back(PoseVector::all_visible(std::move(joints)));
  }
  for (int j = 0; j < spec.pose_count; ++j) {
    truth.pose_offsets.push_back(unit_gaussian(rng, spec.dim) * spec.pose_effect_scale);
  }

  std::vector<int> all_poses(static_cast<std::size_t>(spec.pose_count));
  for (int j = 0; j < spec.pose_count; ++j) all_poses[static_cast<std::size_t>(j)] = j + 1;
  auto visible_poses = [&](CameraId cam) -> const std::vector<int>& {
    if (spec.pose_visibility.empty()) return all_poses;
    return spec.pose_visibility[static_cast<std::size_t>(cam - 1) % spec.pose_visibility.size()];
  };

  std::uniform_int_distribution<int> length(spec.min_frames, spec.max_frames);
  std::normal_distribution<Scalar> jitter(0, spec.keypoint_jitter > 0 ? spec.keypoint_jitter : 1);
  const Scalar noise_sd = per_dim(spec.noise_sigma, spec.dim);
  long long next_tracklet = 1;

  auto make_tracklet = [&](const std::string& identity, const FeatureVector& latent, CameraId cam) {
    Tracklet t;
    t.id = label("T", 5, next_tracklet++);
    t.identity = identity;
    t.camera = cam;
    const auto& poses = visible_poses(cam);
    std::uniform_int_distribution<std::size_t> pick(0, poses.size() - 1);
    const int frames = length(rng);
    auto& planted = truth.planted_poses[t.id];
    for (int f = 0; f < frames; ++f) {
      const PoseIndex j(poses[pick(rng)]);
      planted.push_back(j);
      FrameRecord fr;
      fr.frame_id = f;
      FeatureVector raw = latent + truth.pose_offsets[j.offset()];
      if (spec.noise_sigma > 0) raw += gaussian(rng, spec.dim, noise_sd);
      fr.feature = to_float_precision(raw / raw.norm());
      fr.pose = w.canon[j];
      if (spec.keypoint_jitter > 0) {
        for (Eigen::Index i = 0; i < fr.pose.joints.size(); ++i) {
          fr.pose.joints.data()[i] = std::clamp(fr.pose.joints.data()[i] + jitter(rng), 0.0, 1.0);
        }
      }
      t.frames.push_back(std::move(fr));
    }
    truth.tracklet_latent[t.id] = latent;
    w.dataset.tracklets.push_back(std::move(t));
  };

  for (int id = 1; id <= spec.identities; ++id) {
    const std::string name = label("P", 4, id);
    truth.identity_latent[name] = unit_gaussian(rng, spec.dim);
  }
  for (int id = 1; id <= spec.identities; ++id) {
    const std::string name = label("P", 4, id);
    for (CameraId cam = 1; cam <= spec.cameras; ++cam) {
      for (int k = 0; k < spec.tracklets_per_camera; ++k) {
        make_tracklet(name, truth.identity_latent[name], cam);
      }
    }
  }
  std::uniform_int_distribution<CameraId> any_camera(1, spec.cameras);
  for (int d = 0; d < spec.distractors; ++d) {
    const FeatureVector latent = unit_gaussian(rng, spec.dim);
    make_tracklet(kDistractor, latent, any_camera(rng));
  }

  w.dataset.name = "synthgen-" + std::to_string(spec.seed);
  w.dataset.dim = spec.dim;
  w.dataset.joints = spec.joints;
  w.dataset.pose_count = spec.pose_count;
  w.ideal = std::make_shared<PlantedProvider>(truth.tracklet_latent, truth.pose_offsets, 0, spec.seed);
  w.corrupted = std::make_shared<PlantedProvider>(truth.tracklet_latent, truth.pose_offsets,
                                                  spec.corruption_sigma, spec.seed ^ kCorruptionStream);
  return w;
}

namespace {

void write_provider(const SynthWorld& w, const SyntheticFeatureProvider& provider,
                    const std::filesystem::path& index_path,
                    const std::filesystem::path& features_path) {
  const auto& ts = w.dataset.tracklets;
  FloatMatrix rows(static_cast<Eigen::Index>(ts.size()) * w.canon.size(), w.dataset.dim);
  std::ostringstream index;
  Eigen::Index row = 0;
  for (const auto& t : ts) {
    for (int j = 1; j <= w.canon.size(); ++j) {
      rows.row(row) = provider.query(t, t.frames.front().frame_id, PoseIndex(j)).transpose().cast<float>();
      index << t.id << '\t' << j << '\t' << row << '\n';
      ++row;
    }
  }
  write_feature_matrix(features_path, rows);
  write_text_file(index_path, index.str());
}

}  // namespace

void write_world(const SynthWorld& world, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_dataset(world.dataset, out_dir / "manifest.json", out_dir / "features.bin");
  save_canonical_set(world.canon, out_dir / "canon.json");
  write_provider(world, *world.ideal, out_dir / "synth_index.tsv", out_dir / "synth_features.bin");
  write_provider(world, *world.corrupted, out_dir / "synth_corrupted_index.tsv",
                 out_dir / "synth_corrupted_features.bin");
}

}  // namespace pdsr
