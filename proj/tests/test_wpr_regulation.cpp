#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracle/naive_reid.hpp"
#include "pdsr/wpr_regulation.hpp"
#include "test_support.hpp"

using namespace pdsr;
using namespace pdsr::testing;

namespace {

// Tracklet whose frames sit exactly on the given canonical poses.
Tracklet posed_tracklet(std::mt19937_64& rng, const std::string& id, const CanonicalPoseSet& canon,
                        const std::vector<int>& poses, Eigen::Index d) {
  Tracklet t;
  t.id = id;
  t.identity = "P";
  for (std::size_t f = 0; f < poses.size(); ++f) {
    t.frames.push_back({static_cast<FrameId>(f), random_feature(rng, d),
                        canon.poses[static_cast<std::size_t>(poses[f] - 1)]});
  }
  return t;
}

PoseNormalizedEmbedding embedding(std::initializer_list<std::tuple<int, FeatureVector, double>> entries) {
  PoseNormalizedEmbedding e;
  e.tracklet_id = "e";
  for (const auto& [j, f, freq] : entries) {
    e.entries.push_back({PoseIndex(j), f, freq, Origin::kReal});
    e.observed.push_back(PoseIndex(j));
  }
  return e;
}

SyntheticBank full_bank(std::mt19937_64& rng, const std::string& id, int m, Eigen::Index d) {
  SyntheticBank b;
  b.tracklet_id = id;
  for (int j = 0; j < m; ++j) b.by_pose.emplace_back(random_feature(rng, d));
  return b;
}

struct Scenario {
  CanonicalPoseSet canon;
  StubProvider provider;
  RepresentativeChoice rep{RepresentativeChoice::Strategy::kMiddleFrame, 0};
};

Scenario make_scenario(std::mt19937_64& rng, int m, Eigen::Index d) {
  std::vector<FeatureVector> protos;
  for (int j = 0; j < m; ++j) protos.push_back(random_feature(rng, d));
  return {random_canon(rng, m, 18), StubProvider(protos, 0.5, 0.1, 3)};
}

double pair_score(const Tracklet& a, const Tracklet& b, const Scenario& s) {
  const WprOperand oa = prepare_wpr(a, s.canon, s.provider, s.rep);
  const WprOperand ob = prepare_wpr(b, s.canon, s.provider, s.rep);
  return wpr_score(align_pair(oa.embedding, oa.bank, ob.embedding, ob.bank));
}

std::vector<int> random_poses(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> pick(1, m);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(pick(rng));
  return out;
}

}  // namespace

TEST_CASE("pose_normalize examples") {
  std::mt19937_64 rng(40);
  const CanonicalPoseSet canon = random_canon(rng, 8, 18);

  const Tracklet same = posed_tracklet(rng, "a", canon, {2, 2, 2}, 6);
  const PoseNormalizedEmbedding e = pose_normalize(same, canon);
  REQUIRE(e.entries.size() == 1);
  CHECK(e.entries[0].pose == PoseIndex(2));
  CHECK(e.entries[0].frequency == 1.0);
  CHECK(e.entries[0].origin == Origin::kReal);
  CHECK(e.entries[0].feature.isApprox(
      (same.frames[0].feature + same.frames[1].feature + same.frames[2].feature) / 3.0, 1e-14));
  CHECK(e.backfilled.empty());

  const Tracklet split = posed_tracklet(rng, "b", canon, {1, 4, 1, 1}, 6);
  const PoseNormalizedEmbedding s = pose_normalize(split, canon);
  REQUIRE(s.entries.size() == 2);
  CHECK(s.find(PoseIndex(1))->frequency == 0.75);
  CHECK(s.find(PoseIndex(4))->frequency == 0.25);
}

TEST_CASE("pose_normalize matches group-then-average") {
  std::mt19937_64 rng(41);
  const CanonicalPoseSet canon = random_canon(rng, 8, 18);
  oracle::Setup setup;
  setup.canon = &canon;
  for (int trial = 0; trial < 40; ++trial) {
    const Tracklet t = random_tracklet(rng, "t", 12, 10, 18, 0.8);
    const oracle::PoseGroups expected = oracle::groups(t, setup);
    if (expected.pooled.empty()) continue;
    const PoseNormalizedEmbedding e = pose_normalize(t, canon);
    REQUIRE(e.entries.size() == expected.pooled.size());
    double freq_sum = 0;
    for (std::size_t k = 0; k < e.entries.size(); ++k) {
      if (k > 0) CHECK(e.entries[k - 1].pose < e.entries[k].pose);
      const int j = e.entries[k].pose.value();
      const oracle::Vec& mean = expected.pooled.at(j);
      for (std::size_t i = 0; i < mean.size(); ++i) {
        CHECK(std::abs(e.entries[k].feature(static_cast<Eigen::Index>(i)) - mean[i]) <= 1e-12);
      }
      CHECK(e.entries[k].frequency == doctest::Approx(expected.freq.at(j)).epsilon(1e-15));
      freq_sum += e.entries[k].frequency;
    }
    CHECK(std::abs(freq_sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("align_pair examples") {
  std::mt19937_64 rng(42);
  const FeatureVector f = random_feature(rng, 5);
  const SyntheticBank ba = full_bank(rng, "a", 4, 5);
  const SyntheticBank bb = full_bank(rng, "b", 4, 5);

  {
    const AlignedPair p = align_pair(embedding({{1, f, 1.0}}), ba, embedding({{1, f, 1.0}}), bb);
    REQUIRE(p.poses == std::vector<PoseIndex>{PoseIndex(1)});
    CHECK(p.nu == std::vector<double>{1.0});
    CHECK(p.left[0].origin == Origin::kReal);
    CHECK(p.right[0].origin == Origin::kReal);
  }
  {
    const AlignedPair p = align_pair(embedding({{1, f, 1.0}}), ba, embedding({{2, f, 1.0}}), bb);
    REQUIRE(p.poses == std::vector<PoseIndex>{PoseIndex(1), PoseIndex(2)});
    CHECK(p.nu == std::vector<double>{0.5, 0.5});
    CHECK(p.left[1].origin == Origin::kSynthetic);
    CHECK(p.left[1].frequency == 0.0);
    CHECK(p.left[1].feature == *ba.get(PoseIndex(2)));
    CHECK(p.right[0].origin == Origin::kSynthetic);
    CHECK(p.right[0].feature == *bb.get(PoseIndex(1)));
  }
  {
    const AlignedPair p = align_pair(embedding({{1, f, 0.75}, {4, f, 0.25}}), ba,
                                     embedding({{4, f, 1.0}}), bb);
    REQUIRE(p.poses == std::vector<PoseIndex>{PoseIndex(1), PoseIndex(4)});
    CHECK(p.nu[0] == 0.375);
    CHECK(p.nu[1] == 0.625);
  }
}

TEST_CASE("align_pair with unfillable poses") {
  std::mt19937_64 rng(43);
  const FeatureVector f = random_feature(rng, 5);
  SyntheticBank sparse = full_bank(rng, "a", 3, 5);
  sparse.by_pose[1].reset();  // pose 2 unavailable for a
  const SyntheticBank bb = full_bank(rng, "b", 3, 5);

  const auto a = embedding({{1, f, 1.0}});
  const auto b = embedding({{1, f, 0.5}, {2, f, 0.5}});
  try {
    align_pair(a, sparse, b, bb, MissingPolicy::kStrict);
    FAIL("expected MISSING_SYNTHETIC");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingSynthetic);
  }
  const AlignedPair p = align_pair(a, sparse, b, bb, MissingPolicy::kLenient);
  REQUIRE(p.poses == std::vector<PoseIndex>{PoseIndex(1)});
  CHECK(p.nu == std::vector<double>{1.0});

  SyntheticBank empty;
  empty.by_pose.resize(3);
  const auto only2 = embedding({{2, f, 1.0}});
  try {
    align_pair(a, empty, only2, empty, MissingPolicy::kLenient);
    FAIL("expected EMPTY_UNION");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyUnion);
  }
}

TEST_CASE("wpr_score examples") {
  std::mt19937_64 rng(44);
  const FeatureVector x = random_feature(rng, 6);
  const FeatureVector y = random_feature(rng, 6);
  const SyntheticBank bank = full_bank(rng, "a", 3, 6);
  const auto e = embedding({{1, x, 0.4}, {3, y, 0.6}});
  CHECK(wpr_score(align_pair(e, bank, e, bank)) == doctest::Approx(1.0).epsilon(1e-15));

  AlignedPair p;
  p.poses = {PoseIndex(1), PoseIndex(2)};
  p.left = {{vec({1, 0}), 0.5, Origin::kReal}, {vec({1, 0}), 0.5, Origin::kReal}};
  p.right = {{vec({2, 0}), 0.5, Origin::kReal}, {vec({0, 3}), 0.5, Origin::kReal}};
  p.nu = {0.5, 0.5};
  CHECK(wpr_score(p) == 0.5);

  p.right[1].feature.setZero();
  CHECK_THROWS_AS(wpr_score(p), Error);
}

TEST_CASE("wpr_score matches the per-pose cosine oracle") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = make_scenario(rng, 8, 12);
    const Tracklet a = posed_tracklet(rng, "a", s.canon, random_poses(rng, 9, 8), 12);
    const Tracklet b = posed_tracklet(rng, "b", s.canon, random_poses(rng, 7, 8), 12);
    oracle::Setup setup;
    setup.canon = &s.canon;
    setup.provider = &s.provider;
    CHECK(std::abs(pair_score(a, b, s) - oracle::wpr(a, b, setup)) <= 1e-12);
  }
}

TEST_CASE("wpr_score_matrix equals the per-pair path") {
  std::mt19937_64 rng(46);
  const Scenario s = make_scenario(rng, 6, 10);
  std::vector<Tracklet> ts;
  for (int i = 0; i < 5; ++i) {
    ts.push_back(posed_tracklet(rng, "t" + std::to_string(i), s.canon, random_poses(rng, 6, 6), 10));
  }
  std::vector<WprOperand> ops;
  for (const auto& t : ts) ops.push_back(prepare_wpr(t, s.canon, s.provider, s.rep));

  const std::span<const WprOperand> all(ops);
  const Eigen::MatrixXd one = wpr_score_matrix(all.subspan(0, 1), all.subspan(1, 1));
  CHECK(one(0, 0) == wpr_score(align_pair(ops[0].embedding, ops[0].bank, ops[1].embedding, ops[1].bank)));

  const Eigen::MatrixXd m = wpr_score_matrix(all.subspan(0, 2), all.subspan(2, 3));
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  for (int p = 0; p < 2; ++p) {
    for (int g = 0; g < 3; ++g) {
      const auto& l = ops[static_cast<std::size_t>(p)];
      const auto& r = ops[static_cast<std::size_t>(2 + g)];
      CHECK(m(p, g) == wpr_score(align_pair(l.embedding, l.bank, r.embedding, r.bank)));
    }
  }

  const Eigen::MatrixXd self = wpr_score_matrix(all.subspan(3, 1), all);
  CHECK(self(0, 3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("wpr invariances") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = make_scenario(rng, 8, 16);
    Tracklet a = posed_tracklet(rng, "a", s.canon, random_poses(rng, 10, 8), 16);
    const Tracklet b = posed_tracklet(rng, "b", s.canon, random_poses(rng, 6, 8), 16);
    const double base = pair_score(a, b, s);

    CHECK(std::abs(base - pair_score(b, a, s)) < 1e-12);

    // The middle frame feeds the generator; keep it fixed while permuting.
    RepresentativeChoice rep = s.rep;
    const FrameId rep_id = choose_representative(a, rep);
    Tracklet permuted = a;
    std::shuffle(permuted.frames.begin(), permuted.frames.end(), rng);
    auto it = std::find_if(permuted.frames.begin(), permuted.frames.end(),
                           [&](const FrameRecord& f) { return f.frame_id == rep_id; });
    std::iter_swap(it, permuted.frames.begin() + static_cast<std::ptrdiff_t>(permuted.frames.size() / 2));
    CHECK(std::abs(base - pair_score(permuted, b, s)) < 1e-12);

    Tracklet doubled = a;
    for (const auto& f : a.frames) {
      FrameRecord copy = f;
      copy.frame_id += 1000;
      doubled.frames.push_back(copy);
    }
    // Duplication moves the middle frame, so reuse a's synthetic bank.
    const WprOperand oa = prepare_wpr(a, s.canon, s.provider, s.rep);
    const WprOperand od{pose_normalize(doubled, s.canon), oa.bank};
    const WprOperand ob = prepare_wpr(b, s.canon, s.provider, s.rep);
    CHECK(std::abs(base - wpr_score(align_pair(od.embedding, od.bank, ob.embedding, ob.bank))) < 1e-12);

    const AlignedPair p = align_pair(oa.embedding, oa.bank, ob.embedding, ob.bank);
    double nu = 0;
    for (double v : p.nu) nu += v;
    CHECK(std::abs(nu - 1.0) <= 1e-12);
    for (std::size_t k = 1; k < p.poses.size(); ++k) CHECK(p.poses[k - 1] < p.poses[k]);
  }
}
