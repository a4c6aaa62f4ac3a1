// Command-line front end: quantize, embed, match, eval, synthgen.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pdsr/dataset_io.hpp"
#include "pdsr/pose_quantizer.hpp"
#include "pdsr/report_io.hpp"
#include "pdsr/retrieval_eval.hpp"
#include "pdsr/synth_features.hpp"
#include "pdsr/synthgen.hpp"
#include "pdsr/wf_fusion.hpp"
#include "pdsr/wpr_regulation.hpp"

namespace fs = std::filesystem;
using namespace pdsr;

namespace {

struct GlobalOptions {
  std::string manifest;
  std::string features;
  std::string canon;
  std::string synth_index;
  std::string synth_features;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool lenient = false;
  int min_common_joints = 4;
  std::string representative = "random";
};

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
}

Dataset load_inputs(const GlobalOptions& g) {
  require(g.manifest, "--manifest");
  require(g.features, "--features");
  return load_dataset(g.manifest, g.features);
}

CanonicalPoseSet load_canon(const GlobalOptions& g) {
  require(g.canon, "--canon");
  return load_canonical_set(g.canon);
}

fs::path synth_features_path(const GlobalOptions& g) {
  if (!g.synth_features.empty()) return g.synth_features;
  fs::path index(g.synth_index);
  std::string stem = index.stem().string();
  if (auto pos = stem.rfind("index"); pos != std::string::npos) {
    stem.replace(pos, 5, "features");
  } else {
    stem += "_features";
  }
  return index.parent_path() / (stem + ".bin");
}

std::unique_ptr<FileBackedProvider> load_provider(const GlobalOptions& g) {
  require(g.synth_index, "--synth-index");
  return std::make_unique<FileBackedProvider>(
      FileBackedProvider::load(g.synth_index, synth_features_path(g)));
}

RepresentativeChoice rep_choice(const GlobalOptions& g) {
  RepresentativeChoice c;
  c.seed = g.seed;
  if (g.representative == "middle") {
    c.strategy = RepresentativeChoice::Strategy::kMiddleFrame;
  } else if (g.representative == "random") {
    c.strategy = RepresentativeChoice::Strategy::kSeededRandom;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--representative must be random or middle");
  }
  return c;
}

MissingPolicy policy(const GlobalOptions& g) {
  return g.lenient ? MissingPolicy::kLenient : MissingPolicy::kStrict;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

void run_quantize(const GlobalOptions& g, const std::string& out) {
  const Dataset ds = load_inputs(g);
  const CanonicalPoseSet canon = load_canon(g);
  const QuantizerOptions q{g.min_common_joints};
  std::ostringstream s;
  s << "tracklet_id\tframe_id\tpose\tdistance\n";
  for (const auto& t : ds.tracklets) {
    for (const auto& f : t.frames) {
      const PoseAssignment a = assign_pose(f.pose, canon, q);
      s << t.id << '\t' << f.frame_id << '\t'
        << (a.pose ? std::to_string(a.pose->value()) : std::string("UNASSIGNABLE")) << '\t'
        << (a.pose ? real_text(a.distance) : std::string("null")) << '\n';
    }
  }
  emit(out, s.str());
}

void run_embed(const GlobalOptions& g, const std::string& mode, double weight,
               const std::string& out) {
  require(out, "--out");
  const Dataset ds = load_inputs(g);
  const fs::path bin = out + ".bin";
  const fs::path index = out + ".tsv";
  std::ostringstream s;
  std::vector<FeatureVector> rows;

  if (mode == "baseline") {
    for (const auto& t : ds.tracklets) {
      s << t.id << '\t' << rows.size() << '\n';
      rows.push_back(baseline_embedding(t));
    }
  } else if (mode == "wf") {
    const CanonicalPoseSet canon = load_canon(g);
    const auto provider = load_provider(g);
    for (const auto& t : ds.tracklets) {
      s << t.id << '\t' << rows.size() << '\n';
      rows.push_back(wf_embedding(t, *provider, canon, weight, rep_choice(g), policy(g)).vector);
    }
  } else if (mode == "wpr") {
    const CanonicalPoseSet canon = load_canon(g);
    std::unique_ptr<FileBackedProvider> provider;
    if (!g.synth_index.empty()) provider = load_provider(g);
    for (const auto& t : ds.tracklets) {
      const PoseNormalizedEmbedding e = pose_normalize(t, canon, {g.min_common_joints});
      std::optional<SyntheticBank> bank;
      if (provider) bank = build_synthetic_bank(t, *provider, canon.size(), rep_choice(g));
      for (int j = 1; j <= canon.size(); ++j) {
        const PoseIndex pose(j);
        if (const PoseEntry* entry = e.find(pose)) {
          s << t.id << '\t' << j << "\tREAL\t" << real_text(entry->frequency) << '\t' << rows.size() << '\n';
          rows.push_back(entry->feature);
        } else if (const FeatureVector* synth = bank ? bank->get(pose) : nullptr) {
          s << t.id << '\t' << j << "\tSYNTHETIC\t0\t" << rows.size() << '\n';
          rows.push_back(*synth);
        }
      }
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "embed --mode must be baseline, wf or wpr");
  }

  FloatMatrix m(static_cast<Eigen::Index>(rows.size()), ds.dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose().cast<float>();
  }
  write_feature_matrix(bin, m);
  write_text_file(index, s.str());
}

EvalComponents components(const GlobalOptions& g, Mode mode, double weight,
                          std::optional<CanonicalPoseSet>& canon,
                          std::unique_ptr<FileBackedProvider>& provider) {
  EvalComponents c;
  c.weight = weight;
  c.representative = rep_choice(g);
  c.policy = policy(g);
  c.quantizer.min_common_joints = g.min_common_joints;
  if (mode != Mode::kBaseline) {
    canon = load_canon(g);
    provider = load_provider(g);
    c.canon = &*canon;
    c.provider = provider.get();
  }
  return c;
}

void run_match(const GlobalOptions& g, const std::string& mode_name, double weight,
               const std::string& probe_id, std::size_t top, const std::string& out) {
  const Dataset ds = load_inputs(g);
  const Mode mode = parse_mode(mode_name);
  std::optional<CanonicalPoseSet> canon;
  std::unique_ptr<FileBackedProvider> provider;
  const EvalComponents c = components(g, mode, weight, canon, provider);

  std::optional<std::size_t> probe;
  for (std::size_t i = 0; i < ds.tracklets.size(); ++i) {
    if (ds.tracklets[i].id == probe_id) probe = i;
  }
  if (!probe) throw Error(ErrorCode::kInvalidArgument, "unknown probe " + probe_id);

  const std::vector<std::size_t> probe_rows{*probe};
  const Eigen::MatrixXd scores = score_matrix(ds.tracklets, probe_rows, mode, c);
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 0; i < ds.tracklets.size(); ++i) {
    if (i == *probe || ds.tracklets[i].camera == ds.tracklets[*probe].camera) continue;
    ids.push_back(ds.tracklets[i].id);
    values.push_back(scores(0, static_cast<Eigen::Index>(i)));
  }
  const Ranking r =
      rank_gallery(probe_id, ids, Eigen::Map<const ScoreVector>(values.data(), static_cast<Eigen::Index>(values.size())));
  std::map<std::string, const Tracklet*> by_id;
  for (const auto& t : ds.tracklets) by_id[t.id] = &t;
  std::ostringstream s;
  s << "rank\tgallery_id\tidentity\tcamera\tscore\n";
  for (std::size_t k = 0; k < r.gallery_ids.size() && (top == 0 || k < top); ++k) {
    const Tracklet& t = *by_id.at(r.gallery_ids[k]);
    s << (k + 1) << '\t' << t.id << '\t' << t.identity << '\t' << t.camera << '\t'
      << real_text(r.scores[k]) << '\n';
  }
  emit(out, s.str());
}

void run_eval(const GlobalOptions& g, const std::string& mode_name, double weight,
              const std::string& report_path, const std::string& csv_path, bool same_camera) {
  const Dataset ds = load_inputs(g);
  ProtocolConfig cfg;
  cfg.mode = parse_mode(mode_name);
  cfg.query_selection_seed = g.seed;
  cfg.exclude_same_camera = !same_camera;
  std::optional<CanonicalPoseSet> canon;
  std::unique_ptr<FileBackedProvider> provider;
  const EvalComponents c = components(g, cfg.mode, weight, canon, provider);
  const EvalReport report = evaluate(ds.tracklets, cfg, c);
  if (!report_path.empty()) save_report(report, report_path, ReportFormat::kJson);
  if (!csv_path.empty()) save_report(report, csv_path, ReportFormat::kCsv);
  std::printf("mode %s  probes %zu (evaluated %zu)  rank-1 %.4f  mAP %.4f\n", to_string(cfg.mode),
              report.per_probe.size(), report.evaluated_probes,
              report.cmc.empty() ? 0.0 : report.cmc.front(), report.map);
}

void run_synthgen(const GlobalOptions& g, const std::string& spec_path, const std::string& out) {
  require(spec_path, "--spec");
  require(out, "--out");
  GenSpec spec = load_gen_spec(spec_path);
  if (g.seed_given) spec.seed = g.seed;
  const SynthWorld world = generate(spec);
  write_world(world, out);
  std::printf("wrote %zu tracklets to %s\n", world.dataset.tracklets.size(), out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-regulated video re-identification: quantize, embed, match, evaluate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with default option values")
      ->envname("PDSR_CONFIG");

  GlobalOptions g;
  app.add_option("--manifest", g.manifest, "Dataset manifest (JSON)");
  app.add_option("--features", g.features, "Frame feature matrix");
  app.add_option("--canon", g.canon, "Canonical pose set (JSON)");
  app.add_option("--synth-index", g.synth_index, "Synthetic feature index (TSV)");
  app.add_option("--synth-features", g.synth_features,
                 "Synthetic feature matrix (default: sibling of the index)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for probe and representative selection");
  app.add_flag("--lenient,!--strict", g.lenient, "Skip poses the provider cannot serve");
  app.add_option("--min-common-joints", g.min_common_joints)->check(CLI::PositiveNumber);
  app.add_option("--representative", g.representative, "Representative frame: random|middle");

  std::string out;
  double weight = 4.0;
  std::string mode = "wf+wpr";

  auto* quantize = app.add_subcommand("quantize", "Assign frames to canonical poses");
  quantize->add_option("--out", out, "Output TSV (default stdout)");

  auto* embed = app.add_subcommand("embed", "Write tracklet embeddings");
  std::string embed_mode = "wf";
  embed->add_option("--mode", embed_mode, "baseline|wf|wpr");
  embed->add_option("--weight", weight, "Real-branch weight w")->check(CLI::NonNegativeNumber);
  embed->add_option("--out", out, "Output prefix (<out>.bin, <out>.tsv)")->required();

  auto* match = app.add_subcommand("match", "Rank the cross-camera gallery for one probe");
  std::string probe;
  std::size_t top = 0;
  match->add_option("--probe", probe, "Probe tracklet id")->required();
  match->add_option("--mode", mode, "baseline|wf|wpr|wf+wpr");
  match->add_option("--weight", weight)->check(CLI::NonNegativeNumber);
  match->add_option("--top", top, "Show only the first N (0: all)");
  match->add_option("--out", out, "Output TSV (default stdout)");

  auto* eval = app.add_subcommand("eval", "Run the retrieval protocol");
  std::string report_path, csv_path;
  bool same_camera = false;
  eval->add_option("--mode", mode, "baseline|wf|wpr|wf+wpr");
  eval->add_option("--weight", weight)->check(CLI::NonNegativeNumber);
  eval->add_option("--report", report_path, "JSON report path");
  eval->add_option("--csv", csv_path, "CSV report path");
  eval->add_flag("--include-same-camera", same_camera, "Keep same-camera tracklets in galleries");

  auto* synth = app.add_subcommand("synthgen", "Generate a planted dataset");
  std::string spec_path;
  synth->add_option("--spec", spec_path, "Generator spec (JSON)")->required();
  synth->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*quantize) run_quantize(g, out);
    if (*embed) run_embed(g, embed_mode, weight, out);
    if (*match) run_match(g, mode, weight, probe, top, out);
    if (*eval) run_eval(g, mode, weight, report_path, csv_path, same_camera);
    if (*synth) run_synthgen(g, spec_path, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
