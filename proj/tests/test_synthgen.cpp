#include <doctest.h>

#include <filesystem>

#include "pdsr/math.hpp"
#include "pdsr/pose_quantizer.hpp"
#include "pdsr/synthgen.hpp"
#include "pdsr/wf_fusion.hpp"

using namespace pdsr;
namespace fs = std::filesystem;

namespace {

double pose_recovery(const SynthWorld& w) {
  std::size_t hit = 0, total = 0;
  for (const auto& t : w.dataset.tracklets) {
    const auto& planted = w.truth.planted_poses.at(t.id);
    for (std::size_t f = 0; f < t.frames.size(); ++f) {
      const PoseAssignment a = assign_pose(t.frames[f].pose, w.canon);
      hit += a.pose && *a.pose == planted[f];
      ++total;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("generate follows its GenSpec") {
  GenSpec spec;
  spec.identities = 5;
  spec.cameras = 3;
  spec.tracklets_per_camera = 2;
  spec.distractors = 4;
  spec.dim = 16;
  spec.pose_visibility = {{1, 2}, {3}};
  const SynthWorld w = generate(spec);
  const auto& ts = w.dataset.tracklets;
  CHECK(ts.size() == 5 * 3 * 2 + 4);
  CHECK(w.canon.size() == 8);
  CHECK(validate_dataset(ts, w.canon).ok());
  std::size_t distractors = 0;
  for (const auto& t : ts) {
    distractors += t.is_distractor();
    CHECK(static_cast<int>(t.length()) >= spec.min_frames);
    CHECK(static_cast<int>(t.length()) <= spec.max_frames);
    if (t.is_distractor()) continue;
    // Visibility sets cycle over cameras: camera 3 reuses {1, 2}.
    for (PoseIndex j : w.truth.planted_poses.at(t.id)) {
      if (t.camera == 2) {
        CHECK(j.value() == 3);
      } else {
        CHECK(j.value() <= 2);
      }
    }
    for (const auto& f : t.frames) CHECK(f.feature.norm() == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(distractors == 4);
}

TEST_CASE("generate is deterministic") {
  GenSpec spec;
  spec.keypoint_jitter = 0.02;
  spec.distractors = 3;
  spec.seed = 77;
  const SynthWorld a = generate(spec);
  const SynthWorld b = generate(spec);
  REQUIRE(a.dataset.tracklets.size() == b.dataset.tracklets.size());
  for (std::size_t i = 0; i < a.dataset.tracklets.size(); ++i) {
    const auto& x = a.dataset.tracklets[i];
    const auto& y = b.dataset.tracklets[i];
    CHECK(x.id == y.id);
    REQUIRE(x.frames.size() == y.frames.size());
    for (std::size_t f = 0; f < x.frames.size(); ++f) {
      CHECK(x.frames[f].feature == y.frames[f].feature);
      CHECK(x.frames[f].pose.joints == y.frames[f].pose.joints);
    }
    CHECK(*a.corrupted->lookup(x, 0, PoseIndex(3)) == *b.corrupted->lookup(y, 0, PoseIndex(3)));
  }
  spec.seed = 78;
  CHECK(generate(spec).dataset.tracklets[0].frames[0].feature != a.dataset.tracklets[0].frames[0].feature);
}

TEST_CASE("zero keypoint jitter recovers every planted pose") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GenSpec spec;
    spec.seed = seed;
    CHECK(pose_recovery(generate(spec)) == 1.0);
  }
}

TEST_CASE("keypoint jitter degrades pose recovery") {
  const std::vector<double> jitters{0.0, 0.2, 0.3, 0.45, 0.7};
  std::vector<double> mean(jitters.size(), 0.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (std::size_t k = 0; k < jitters.size(); ++k) {
      GenSpec spec;
      spec.identities = 6;
      spec.dim = 8;
      spec.keypoint_jitter = jitters[k];
      spec.seed = seed;
      mean[k] += pose_recovery(generate(spec)) / 30;
    }
  }
  for (std::size_t k = 1; k < mean.size(); ++k) {
    INFO("jitter " << jitters[k] << ": " << mean[k]);
    CHECK(mean[k] <= mean[k - 1]);
  }
  CHECK(mean.back() < mean.front());
  CHECK(mean[2] < 1.0);
}

TEST_CASE("synthetic poses pull same-identity tracklets together across cameras") {
  double base_sum = 0, wf_sum = 0;
  int pairs = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GenSpec spec;
    spec.identities = 10;
    spec.pose_effect_scale = 2;
    spec.noise_sigma = 5;
    spec.pose_visibility = {{1, 2, 3, 4}, {5, 6, 7, 8}};
    spec.seed = seed;
    const SynthWorld w = generate(spec);
    const auto& ts = w.dataset.tracklets;
    for (const auto& a : ts) {
      for (const auto& b : ts) {
        if (a.id >= b.id || a.identity != b.identity || a.camera == b.camera) continue;
        const FeatureVector wa = wf_embedding(a, *w.ideal, w.canon, 4.0, {}).vector;
        const FeatureVector wb = wf_embedding(b, *w.ideal, w.canon, 4.0, {}).vector;
        base_sum += cosine_similarity(baseline_embedding(a), baseline_embedding(b));
        wf_sum += cosine_similarity(wa, wb);
        ++pairs;
      }
    }
  }
  REQUIRE(pairs > 0);
  CHECK(base_sum / pairs < wf_sum / pairs);
}

TEST_CASE("gen spec parsing") {
  const GenSpec s = parse_gen_spec(R"({"identities": 3, "cameras": 4, "noise_sigma": 0.5,
                                      "pose_visibility": [[1], [2, 3]], "seed": 12})");
  CHECK(s.identities == 3);
  CHECK(s.cameras == 4);
  CHECK(s.noise_sigma == 0.5);
  CHECK(s.pose_visibility == std::vector<std::vector<int>>{{1}, {2, 3}});
  CHECK(s.seed == 12);
  CHECK(s.dim == 128);

  CHECK_THROWS_AS(parse_gen_spec("{\"identities\": 0}"), Error);
  CHECK_THROWS_AS(parse_gen_spec("{\"min_frames\": 5, \"max_frames\": 2}"), Error);
  CHECK_THROWS_AS(parse_gen_spec("{\"pose_visibility\": [[9]]}"), Error);
  CHECK_THROWS_AS(parse_gen_spec("{\"noise_sigma\": -1}"), Error);
  CHECK_THROWS_AS(parse_gen_spec("[1, 2"), Error);
}

TEST_CASE("write_world produces every artifact") {
  const fs::path dir = fs::temp_directory_path() / "pdsr_unit" / "world";
  fs::remove_all(dir);
  GenSpec spec;
  spec.identities = 3;
  write_world(generate(spec), dir);
  for (const char* name : {"manifest.json", "features.bin", "canon.json", "synth_index.tsv",
                           "synth_features.bin", "synth_corrupted_index.tsv",
                           "synth_corrupted_features.bin"}) {
    CHECK(fs::exists(dir / name));
  }
}
