#include "pdsr/retrieval_eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "pdsr/random.hpp"
#include "pdsr/wf_fusion.hpp"
#include "pdsr/wpr_regulation.hpp"

namespace pdsr {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kBaseline: return "baseline";
    case Mode::kWf: return "wf";
    case Mode::kWpr: return "wpr";
    case Mode::kWfPlusWpr: return "wf+wpr";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::kBaseline, Mode::kWf, Mode::kWpr, Mode::kWfPlusWpr}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + name + "'");
}

namespace {

std::vector<std::size_t> ids_sorted(std::span<const Tracklet> tracklets,
                                    std::vector<std::size_t> rows) {
  std::sort(rows.begin(), rows.end(),
            [&](std::size_t a, std::size_t b) { return tracklets[a].id < tracklets[b].id; });
  return rows;
}

std::set<std::string> positives_of(std::span<const Tracklet> tracklets, std::size_t probe,
                                   std::span<const std::size_t> gallery) {
  std::set<std::string> out;
  const Tracklet& p = tracklets[probe];
  for (std::size_t g : gallery) {
    const Tracklet& t = tracklets[g];
    if (!t.is_distractor() && t.identity == p.identity) out.insert(t.id);
  }
  return out;
}

Ranking rank_rows(std::span<const Tracklet> tracklets, std::size_t probe,
                  std::span<const std::size_t> gallery, const Eigen::MatrixXd& scores,
                  Eigen::Index score_row) {
  std::vector<std::string> ids;
  ScoreVector s(static_cast<Eigen::Index>(gallery.size()));
  ids.reserve(gallery.size());
  for (std::size_t k = 0; k < gallery.size(); ++k) {
    ids.push_back(tracklets[gallery[k]].id);
    s(static_cast<Eigen::Index>(k)) = scores(score_row, static_cast<Eigen::Index>(gallery[k]));
  }
  return rank_gallery(tracklets[probe].id, ids, s);
}

}  // namespace

std::vector<ProbeSet> build_protocol(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg) {
  if (cfg.exclude_same_camera) {
    std::set<CameraId> cams;
    for (const auto& t : tracklets) cams.insert(t.camera);
    if (cams.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, "cross-camera protocol needs at least 2 cameras");
    }
  }

  std::vector<std::size_t> probe_rows;
  const bool explicit_probes =
      std::any_of(tracklets.begin(), tracklets.end(), [](const Tracklet& t) { return t.probe; });
  if (explicit_probes) {
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
      if (tracklets[i].probe && !tracklets[i].is_distractor()) probe_rows.push_back(i);
    }
    probe_rows = ids_sorted(tracklets, std::move(probe_rows));
  } else {
    std::map<std::string, std::vector<std::size_t>> by_identity;
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
      if (!tracklets[i].is_distractor()) by_identity[tracklets[i].identity].push_back(i);
    }
    for (auto& [identity, rows] : by_identity) {
      const auto sorted = ids_sorted(tracklets, rows);
      auto rng = keyed_engine(cfg.query_selection_seed, identity);
      std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
      probe_rows.push_back(sorted[pick(rng)]);
    }
  }

  std::vector<std::size_t> all(tracklets.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  all = ids_sorted(tracklets, std::move(all));

  std::vector<ProbeSet> out;
  out.reserve(probe_rows.size());
  for (std::size_t p : probe_rows) {
    ProbeSet ps;
    ps.probe = p;
    for (std::size_t i : all) {
      if (i == p) continue;
      if (cfg.exclude_same_camera && tracklets[i].camera == tracklets[p].camera) continue;
      ps.gallery.push_back(i);
    }
    out.push_back(std::move(ps));
  }
  return out;
}

ScoreVector fuse_scores(const ScoreVector& wf, const ScoreVector& wpr) {
  if (wf.size() != wpr.size()) {
    throw Error(ErrorCode::kLengthMismatch, "score vectors differ in length");
  }
  return wf + wpr;
}

Ranking rank_gallery(const std::string& probe_id, std::span<const std::string> gallery_ids,
                     const ScoreVector& scores) {
  if (static_cast<Eigen::Index>(gallery_ids.size()) != scores.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one score per gallery id required");
  }
  std::vector<std::size_t> order(gallery_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Scalar sa = scores(static_cast<Eigen::Index>(a));
    const Scalar sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return gallery_ids[a] < gallery_ids[b];
  });
  Ranking r;
  r.probe_id = probe_id;
  r.gallery_ids.reserve(order.size());
  r.scores.reserve(order.size());
  for (std::size_t k : order) {
    r.gallery_ids.push_back(gallery_ids[k]);
    r.scores.push_back(scores(static_cast<Eigen::Index>(k)));
  }
  return r;
}

std::optional<Scalar> average_precision(const Ranking& ranking,
                                        const std::set<std::string>& positives) {
  Scalar sum = 0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranking.gallery_ids.size(); ++k) {
    if (positives.count(ranking.gallery_ids[k])) {
      ++hits;
      sum += static_cast<Scalar>(hits) / static_cast<Scalar>(k + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<Scalar>(hits);
}

std::optional<std::size_t> first_hit(const Ranking& ranking, const std::set<std::string>& positives) {
  for (std::size_t k = 0; k < ranking.gallery_ids.size(); ++k) {
    if (positives.count(ranking.gallery_ids[k])) return k + 1;
  }
  return std::nullopt;
}

std::vector<Scalar> cmc_curve(std::span<const Ranking> rankings,
                              std::span<const std::set<std::string>> positives) {
  if (rankings.size() != positives.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one positive set per ranking required");
  }
  std::size_t longest = 0;
  for (const auto& r : rankings) longest = std::max(longest, r.gallery_ids.size());
  std::vector<std::size_t> first_hits_at(longest + 1, 0);
  std::size_t counted = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (auto hit = first_hit(rankings[i], positives[i])) {
      ++first_hits_at[*hit];
      ++counted;
    }
  }
  std::vector<Scalar> cmc(longest, 0);
  if (counted == 0) return cmc;
  std::size_t cumulative = 0;
  for (std::size_t r = 1; r <= longest; ++r) {
    cumulative += first_hits_at[r];
    cmc[r - 1] = static_cast<Scalar>(cumulative) / static_cast<Scalar>(counted);
  }
  return cmc;
}

CameraConfusion camera_confusion(std::span<const Tracklet> tracklets,
                                 std::span<const ProbeSet> probes, const Eigen::MatrixXd& scores) {
  CameraConfusion cc;
  {
    std::set<CameraId> cams;
    for (const auto& t : tracklets) cams.insert(t.camera);
    cc.cameras.assign(cams.begin(), cams.end());
  }
  const std::size_t n = cc.cameras.size();
  cc.cells.assign(n * n, std::nullopt);
  auto cam_pos = [&](CameraId c) {
    return static_cast<std::size_t>(std::lower_bound(cc.cameras.begin(), cc.cameras.end(), c) -
                                    cc.cameras.begin());
  };

  std::vector<std::vector<std::size_t>> by_camera(n);
  for (std::size_t i = 0; i < tracklets.size(); ++i) by_camera[cam_pos(tracklets[i].camera)].push_back(i);
  for (auto& rows : by_camera) rows = ids_sorted(tracklets, std::move(rows));

  std::vector<Scalar> sums(n * n, 0);
  std::vector<std::size_t> counts(n * n, 0);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const std::size_t probe = probes[p].probe;
    const std::size_t x = cam_pos(tracklets[probe].camera);
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<std::size_t> gallery;
      for (std::size_t i : by_camera[y]) {
        if (i != probe) gallery.push_back(i);
      }
      const auto positives = positives_of(tracklets, probe, gallery);
      if (positives.empty()) continue;
      const Ranking r = rank_rows(tracklets, probe, gallery, scores, static_cast<Eigen::Index>(p));
      sums[x * n + y] += *average_precision(r, positives);
      ++counts[x * n + y];
    }
  }
  for (std::size_t c = 0; c < n * n; ++c) {
    if (counts[c] > 0) cc.cells[c] = sums[c] / static_cast<Scalar>(counts[c]);
  }
  return cc;
}

Eigen::MatrixXd score_matrix(std::span<const Tracklet> tracklets,
                             std::span<const std::size_t> probe_rows, Mode mode,
                             const EvalComponents& components) {
  const auto rows = static_cast<Eigen::Index>(probe_rows.size());
  const auto cols = static_cast<Eigen::Index>(tracklets.size());
  if (mode != Mode::kBaseline && (components.canon == nullptr || components.provider == nullptr)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("mode ") + to_string(mode) + " needs canonical poses and a provider");
  }

  std::vector<SyntheticBank> banks;
  if (mode != Mode::kBaseline) {
    banks.reserve(tracklets.size());
    for (const auto& t : tracklets) {
      banks.push_back(build_synthetic_bank(t, *components.provider, components.canon->size(),
                                           components.representative));
    }
  }

  auto cosine_block = [&](const std::vector<FeatureVector>& embeddings) {
    Eigen::MatrixXd s(rows, cols);
    for (Eigen::Index p = 0; p < rows; ++p) {
      s.row(p) = cosine_scores(embeddings[probe_rows[static_cast<std::size_t>(p)]], embeddings)
                     .transpose();
    }
    return s;
  };

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(rows, cols);
  if (mode == Mode::kBaseline) {
    std::vector<FeatureVector> emb;
    emb.reserve(tracklets.size());
    for (const auto& t : tracklets) emb.push_back(baseline_embedding(t));
    return cosine_block(emb);
  }
  if (mode == Mode::kWf || mode == Mode::kWfPlusWpr) {
    std::vector<FeatureVector> emb;
    emb.reserve(tracklets.size());
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
      emb.push_back(wf_embedding(tracklets[i], banks[i], components.weight, components.policy).vector);
    }
    total = cosine_block(emb);
    if (mode == Mode::kWf) return total;
  }

  std::vector<WprOperand> operands;
  operands.reserve(tracklets.size());
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    operands.push_back(
        {pose_normalize(tracklets[i], *components.canon, components.quantizer), std::move(banks[i])});
  }
  std::vector<WprOperand> probe_ops;
  probe_ops.reserve(probe_rows.size());
  for (std::size_t p : probe_rows) probe_ops.push_back(operands[p]);
  const Eigen::MatrixXd wpr = wpr_score_matrix(probe_ops, operands, components.policy);
  if (mode == Mode::kWpr) return wpr;
  // Row-wise fusion so every entry goes through fuse_scores.
  for (Eigen::Index p = 0; p < rows; ++p) {
    total.row(p) = fuse_scores(total.row(p).transpose(), wpr.row(p).transpose()).transpose();
  }
  return total;
}

namespace {

struct ProtocolRun {
  std::vector<ProbeSet> probes;
  Eigen::MatrixXd scores;
  std::vector<Ranking> rankings;
  std::vector<std::set<std::string>> positives;
};

ProtocolRun run_protocol(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg,
                         const EvalComponents& components) {
  ProtocolRun run;
  run.probes = build_protocol(tracklets, cfg);
  std::vector<std::size_t> probe_rows;
  probe_rows.reserve(run.probes.size());
  for (const auto& ps : run.probes) probe_rows.push_back(ps.probe);
  run.scores = score_matrix(tracklets, probe_rows, cfg.mode, components);
  for (std::size_t p = 0; p < run.probes.size(); ++p) {
    const ProbeSet& ps = run.probes[p];
    run.rankings.push_back(
        rank_rows(tracklets, ps.probe, ps.gallery, run.scores, static_cast<Eigen::Index>(p)));
    run.positives.push_back(positives_of(tracklets, ps.probe, ps.gallery));
  }
  return run;
}

}  // namespace

std::vector<Ranking> rank_protocol(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg,
                                   const EvalComponents& components) {
  return run_protocol(tracklets, cfg, components).rankings;
}

EvalReport evaluate(std::span<const Tracklet> tracklets, const ProtocolConfig& cfg,
                    const EvalComponents& components) {
  const ProtocolRun run = run_protocol(tracklets, cfg, components);

  EvalReport report;
  report.mode = cfg.mode;
  report.cmc = cmc_curve(run.rankings, run.positives);
  Scalar ap_sum = 0;
  for (std::size_t p = 0; p < run.probes.size(); ++p) {
    const Tracklet& probe = tracklets[run.probes[p].probe];
    ProbeResult pr;
    pr.probe_id = probe.id;
    pr.camera = probe.camera;
    pr.gallery_size = run.probes[p].gallery.size();
    pr.positives = run.positives[p].size();
    pr.first_hit = first_hit(run.rankings[p], run.positives[p]);
    pr.ap = average_precision(run.rankings[p], run.positives[p]);
    if (pr.ap) {
      ap_sum += *pr.ap;
      ++report.evaluated_probes;
    }
    report.per_probe.push_back(std::move(pr));
  }
  report.map = report.evaluated_probes > 0
                   ? ap_sum / static_cast<Scalar>(report.evaluated_probes)
                   : Scalar(0);
  report.camera_confusion = camera_confusion(tracklets, run.probes, run.scores);
  return report;
}

}  // namespace pdsr
