#include "pdsr/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pdsr {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xffu));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<decltype(u)>((u << 8) | p[i]);
  return static_cast<T>(u);
}

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, path.string() + ": " + what);
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    malformed(path, e.what());
  }
}

json pose_to_json(const PoseVector& p) {
  json joints = json::array();
  for (Eigen::Index i = 0; i < p.joint_count(); ++i) {
    joints.push_back({p.joints(i, 0), p.joints(i, 1), p.visible(i) ? 1 : 0});
  }
  return joints;
}

PoseVector pose_from_json(const json& j, const std::filesystem::path& path) {
  if (!j.is_array()) malformed(path, "pose must be an array of [x, y, visible] triples");
  PoseVector p;
  p.joints.resize(static_cast<Eigen::Index>(j.size()), 2);
  p.visible.resize(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& t = j[i];
    if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number()) {
      malformed(path, "pose joint must be [x, y, visible]");
    }
    const auto row = static_cast<Eigen::Index>(i);
    p.joints(row, 0) = t[0].get<double>();
    p.joints(row, 1) = t[1].get<double>();
    p.visible(row) = t[2].is_boolean() ? t[2].get<bool>() : t[2].get<double>() != 0;
  }
  return p;
}

bool plain_token(const std::string& s) {
  if (s.empty()) return false;
  return s.find_first_of(" \t\r\n,\"") == std::string::npos;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

FloatMatrix read_feature_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < kFeatureHeaderBytes) malformed(path, "truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "PDSR", 4) != 0) malformed(path, "bad magic");
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kFeatureFileVersion) malformed(path, "unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(p + 8);
  const auto dim = get_le<std::uint32_t>(p + 16);
  if (dim == 0 && rows > 0) malformed(path, "zero feature dimension");
  const std::uint64_t body_bytes = bytes.size() - kFeatureHeaderBytes;
  if ((dim > 0 && rows > body_bytes / (std::uint64_t{dim} * 4)) ||
      body_bytes != rows * dim * 4) {
    malformed(path, "size " + std::to_string(bytes.size()) + " does not match header");
  }
  FloatMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  const unsigned char* body = p + kFeatureHeaderBytes;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<float>(get_le<std::uint32_t>(body));
      body += 4;
    }
  }
  return m;
}

void write_feature_matrix(const std::filesystem::path& path, const FloatMatrix& rows) {
  std::string out;
  out.reserve(kFeatureHeaderBytes + static_cast<std::size_t>(rows.size()) * 4);
  out.append("PDSR", 4);
  put_le<std::uint32_t>(out, kFeatureFileVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(rows.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(rows(r, c)));
    }
  }
  write_text_file(path, out);
}

FeatureVector to_float_precision(const FeatureVector& v) {
  return v.cast<float>().cast<Scalar>();
}

int Dataset::camera_count() const {
  std::set<CameraId> cams;
  for (const auto& t : tracklets) cams.insert(t.camera);
  return static_cast<int>(cams.size());
}

Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& features_path) {
  const json m = parse_json_file(manifest_path);
  const FloatMatrix features = read_feature_matrix(features_path);

  Dataset ds;
  try {
    ds.name = m.value("name", std::string("dataset"));
    ds.dim = m.at("dim").get<Eigen::Index>();
    ds.joints = m.at("joints").get<Eigen::Index>();
    ds.pose_count = m.value("poses", 0);
    if (features.cols() != ds.dim && features.rows() > 0) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "manifest dim " + std::to_string(ds.dim) + " vs feature file dim " +
                      std::to_string(features.cols()));
    }
    for (const json& jt : m.at("tracklets")) {
      Tracklet t;
      t.id = jt.at("id").get<std::string>();
      t.identity = jt.at("identity").get<std::string>();
      t.camera = jt.at("camera").get<CameraId>();
      t.probe = jt.value("probe", false);
      if (!plain_token(t.id) || !plain_token(t.identity)) {
        malformed(manifest_path, "ids must be non-empty without whitespace, commas or quotes");
      }
      for (const json& jf : jt.at("frames")) {
        FrameRecord f;
        f.frame_id = jf.at("frame_id").get<FrameId>();
        const auto row = jf.at("row").get<long long>();
        if (row < 0 || row >= features.rows()) {
          throw Error(ErrorCode::kDanglingReference,
                      "tracklet " + t.id + " frame " + std::to_string(f.frame_id) + " row " +
                          std::to_string(row));
        }
        f.feature = features.row(static_cast<Eigen::Index>(row)).transpose().cast<Scalar>();
        f.pose = pose_from_json(jf.at("pose"), manifest_path);
        t.frames.push_back(std::move(f));
      }
      ds.tracklets.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    malformed(manifest_path, e.what());
  }

  CanonicalPoseSet no_canon;
  const ValidationReport report = validate_dataset(ds.tracklets, no_canon, ds.shape());
  for (const Finding& f : report.findings) {
    if (f.kind == Finding::Kind::kEmptyCanonicalSet) continue;
    const ErrorCode code = f.kind == Finding::Kind::kDimensionMismatch ||
                                   f.kind == Finding::Kind::kJointCountMismatch
                               ? ErrorCode::kDimensionMismatch
                               : ErrorCode::kMalformedFile;
    throw Error(code, manifest_path.string() + ": tracklet " + f.tracklet_id + ": " + f.message);
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& features_path) {
  std::size_t total_frames = 0;
  for (const auto& t : dataset.tracklets) total_frames += t.frames.size();
  FloatMatrix rows(static_cast<Eigen::Index>(total_frames), dataset.dim);

  json tracklets = json::array();
  Eigen::Index row = 0;
  for (const auto& t : dataset.tracklets) {
    json frames = json::array();
    for (const auto& f : t.frames) {
      if (f.feature.size() != dataset.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "tracklet " + t.id + " feature dimension");
      }
      rows.row(row) = f.feature.transpose().cast<float>();
      frames.push_back({{"frame_id", f.frame_id}, {"row", row}, {"pose", pose_to_json(f.pose)}});
      ++row;
    }
    json jt = {{"id", t.id}, {"identity", t.identity}, {"camera", t.camera}, {"frames", frames}};
    if (t.probe) jt["probe"] = true;
    tracklets.push_back(std::move(jt));
  }
  const json m = {{"name", dataset.name},
                  {"dim", dataset.dim},
                  {"joints", dataset.joints},
                  {"poses", dataset.pose_count},
                  {"cameras", dataset.camera_count()},
                  {"tracklets", tracklets}};
  write_feature_matrix(features_path, rows);
  write_text_file(manifest_path, m.dump(1) + "\n");
}

CanonicalPoseSet load_canonical_set(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  CanonicalPoseSet canon;
  try {
    for (const json& p : j.at("poses")) canon.poses.push_back(pose_from_json(p, path));
    if (j.contains("joints")) {
      const auto k = j.at("joints").get<Eigen::Index>();
      for (const auto& p : canon.poses) {
        if (p.joint_count() != k) malformed(path, "canonical pose joint count differs from header");
      }
    }
  } catch (const json::exception& e) {
    malformed(path, e.what());
  }
  if (canon.poses.empty()) malformed(path, "no canonical poses");
  return canon;
}

void save_canonical_set(const CanonicalPoseSet& canon, const std::filesystem::path& path) {
  json poses = json::array();
  for (const auto& p : canon.poses) poses.push_back(pose_to_json(p));
  const json j = {{"joints", canon.poses.empty() ? 0 : canon.poses.front().joint_count()},
                  {"poses", poses}};
  write_text_file(path, j.dump(1) + "\n");
}

}  // namespace pdsr
