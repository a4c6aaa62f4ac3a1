#include "pdsr/synth_features.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pdsr/dataset_io.hpp"
#include "pdsr/random.hpp"

namespace pdsr {

FeatureVector SyntheticFeatureProvider::query(const Tracklet& t, FrameId representative,
                                              PoseIndex pose) const {
  auto v = lookup(t, representative, pose);
  if (!v) {
    throw Error(ErrorCode::kMissingSynthetic,
                "tracklet " + t.id + " pose " + std::to_string(pose.value()));
  }
  return std::move(*v);
}

FrameId choose_representative(const Tracklet& t, const RepresentativeChoice& choice) {
  if (t.frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tracklet " + t.id + " has no frames");
  }
  std::size_t pos = 0;
  switch (choice.strategy) {
    case RepresentativeChoice::Strategy::kMiddleFrame:
      pos = t.frames.size() / 2;
      break;
    case RepresentativeChoice::Strategy::kSeededRandom: {
      auto rng = keyed_engine(choice.seed, t.id);
      std::uniform_int_distribution<std::size_t> pick(0, t.frames.size() - 1);
      pos = pick(rng);
      break;
    }
  }
  return t.frames[pos].frame_id;
}

FileBackedProvider::FileBackedProvider(std::map<std::pair<std::string, int>, FeatureVector> table,
                                       Eigen::Index dim)
    : table_(std::move(table)), dim_(dim) {}

FileBackedProvider FileBackedProvider::load(const std::filesystem::path& index_path,
                                            const std::filesystem::path& features_path) {
  const FloatMatrix rows = read_feature_matrix(features_path);
  std::ifstream in(index_path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open synthetic index " + index_path.string());
  }
  std::map<std::pair<std::string, int>, FeatureVector> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string id, pose_s, row_s, extra;
    if (!std::getline(fields, id, '\t') || !std::getline(fields, pose_s, '\t') ||
        !std::getline(fields, row_s, '\t') || std::getline(fields, extra, '\t')) {
      throw Error(ErrorCode::kMalformedFile,
                  index_path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    long long pose = 0, row = 0;
    try {
      std::size_t used = 0;
      pose = std::stoll(pose_s, &used);
      if (used != pose_s.size()) throw std::invalid_argument(pose_s);
      row = std::stoll(row_s, &used);
      if (used != row_s.size()) throw std::invalid_argument(row_s);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kMalformedFile,
                  index_path.string() + ":" + std::to_string(line_no) + ": non-integer field");
    }
    if (pose < 1) {
      throw Error(ErrorCode::kMalformedFile,
                  index_path.string() + ":" + std::to_string(line_no) + ": pose index < 1");
    }
    if (row < 0 || row >= rows.rows()) {
      throw Error(ErrorCode::kDanglingReference,
                  index_path.string() + ":" + std::to_string(line_no) + ": row " +
                      std::to_string(row) + " outside feature matrix");
    }
    const auto key = std::make_pair(id, static_cast<int>(pose));
    if (table.count(key)) {
      throw Error(ErrorCode::kMalformedFile,
                  index_path.string() + ":" + std::to_string(line_no) + ": duplicate key");
    }
    table.emplace(key, rows.row(row).transpose().cast<Scalar>());
  }
  return FileBackedProvider(std::move(table), rows.cols());
}

std::optional<FeatureVector> FileBackedProvider::lookup(const Tracklet& t, FrameId,
                                                        PoseIndex pose) const {
  auto it = table_.find({t.id, pose.value()});
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::vector<PoseIndex> FileBackedProvider::poses_for(const std::string& tracklet_id) const {
  std::vector<PoseIndex> out;
  for (auto it = table_.lower_bound({tracklet_id, 0});
       it != table_.end() && it->first.first == tracklet_id; ++it) {
    out.emplace_back(it->first.second);
  }
  return out;
}

StubProvider::StubProvider(std::vector<FeatureVector> prototypes, Scalar alpha, Scalar noise_sigma,
                           std::uint64_t seed)
    : prototypes_(std::move(prototypes)), alpha_(alpha), noise_sigma_(noise_sigma), seed_(seed) {
  if (!(alpha_ >= 0 && alpha_ <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "stub alpha must lie in [0,1]");
  }
  if (!(noise_sigma_ >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "stub noise sigma must be non-negative");
  }
}

std::optional<FeatureVector> StubProvider::lookup(const Tracklet& t, FrameId representative,
                                                  PoseIndex pose) const {
  if (pose.value() < 1 || pose.offset() >= prototypes_.size()) return std::nullopt;
  const FrameRecord* rep = t.find_frame(representative);
  if (rep == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "representative frame " +
                                                 std::to_string(representative) +
                                                 " not in tracklet " + t.id);
  }
  const FeatureVector& proto = prototypes_[pose.offset()];
  if (proto.size() != rep->feature.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "stub prototype dimension");
  }
  FeatureVector out = alpha_ * rep->feature + (1 - alpha_) * proto;
  if (noise_sigma_ > 0) {
    auto rng = keyed_engine(seed_, t.id, {static_cast<std::uint64_t>(pose.value())});
    std::normal_distribution<Scalar> noise(0, noise_sigma_);
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += noise(rng);
  }
  return out;
}

const FeatureVector* SyntheticBank::get(PoseIndex j) const {
  if (j.value() < 1 || j.offset() >= by_pose.size()) return nullptr;
  const auto& slot = by_pose[j.offset()];
  return slot ? &*slot : nullptr;
}

int SyntheticBank::served() const {
  int n = 0;
  for (const auto& slot : by_pose) n += slot.has_value();
  return n;
}

SyntheticBank build_synthetic_bank(const Tracklet& t, const SyntheticFeatureProvider& provider,
                                   int pose_count, const RepresentativeChoice& choice) {
  SyntheticBank bank;
  bank.tracklet_id = t.id;
  bank.representative = choose_representative(t, choice);
  bank.by_pose.reserve(static_cast<std::size_t>(pose_count));
  for (int j = 1; j <= pose_count; ++j) {
    bank.by_pose.push_back(provider.lookup(t, bank.representative, PoseIndex(j)));
  }
  return bank;
}

}  // namespace pdsr
