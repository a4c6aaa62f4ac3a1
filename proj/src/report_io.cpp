#include "pdsr/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pdsr/dataset_io.hpp"

namespace pdsr {

using nlohmann::json;

namespace {

std::string format_real(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string opt_str(const std::optional<T>& v) {
  if (!v) return "null";
  if constexpr (std::is_floating_point_v<T>) {
    return format_real(*v);
  } else {
    return std::to_string(*v);
  }
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::size_t cmc_written(const EvalReport& r) { return std::min(r.cmc.size(), kReportCmcRanks); }

std::string to_json_text(const EvalReport& r) {
  json cmc = json::array();
  for (std::size_t i = 0; i < cmc_written(r); ++i) cmc.push_back(r.cmc[i]);
  json confusion = json::array();
  const auto& cc = r.camera_confusion;
  for (std::size_t x = 0; x < cc.size(); ++x) {
    json row = json::array();
    for (std::size_t y = 0; y < cc.size(); ++y) row.push_back(opt_json(cc.at(x, y)));
    confusion.push_back(std::move(row));
  }
  json probes = json::array();
  for (const auto& p : r.per_probe) {
    probes.push_back({{"probe", p.probe_id},
                      {"camera", p.camera},
                      {"gallery_size", p.gallery_size},
                      {"positives", p.positives},
                      {"first_hit", opt_json(p.first_hit)},
                      {"ap", opt_json(p.ap)}});
  }
  const json j = {{"mode", to_string(r.mode)},
                  {"map", r.map},
                  {"evaluated_probes", r.evaluated_probes},
                  {"cmc", cmc},
                  {"cameras", cc.cameras},
                  {"camera_confusion", confusion},
                  {"per_probe", probes}};
  return j.dump(2) + "\n";
}

std::string to_csv_text(const EvalReport& r) {
  std::ostringstream out;
  out << "kind,id,x,y,gallery_size,positives,first_hit,value\n";
  out << "mode," << to_string(r.mode) << ",,,,,,\n";
  out << "map,,,,,,," << format_real(r.map) << "\n";
  out << "evaluated_probes,,,,,,," << r.evaluated_probes << "\n";
  for (std::size_t i = 0; i < cmc_written(r); ++i) {
    out << "cmc,," << (i + 1) << ",,,,," << format_real(r.cmc[i]) << "\n";
  }
  const auto& cc = r.camera_confusion;
  for (std::size_t x = 0; x < cc.size(); ++x) {
    for (std::size_t y = 0; y < cc.size(); ++y) {
      out << "confusion,," << cc.cameras[x] << "," << cc.cameras[y] << ",,,,"
          << opt_str(cc.at(x, y)) << "\n";
    }
  }
  for (const auto& p : r.per_probe) {
    out << "probe," << p.probe_id << "," << p.camera << ",," << p.gallery_size << ","
        << p.positives << "," << opt_str(p.first_hit) << "," << opt_str(p.ap) << "\n";
  }
  return out.str();
}

[[noreturn]] void bad_report(const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, "report: " + what);
}

Scalar parse_real(const std::string& s) {
  try {
    std::size_t used = 0;
    const Scalar v = std::stod(s, &used);
    if (used != s.size()) bad_report("trailing characters in '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad_report("not a number: '" + s + "'");
  }
}

long long parse_int(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_report("not an integer: '" + s + "'");
  return v;
}

EvalReport from_json_text(const std::string& text) {
  EvalReport r;
  try {
    const json j = json::parse(text);
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.map = j.at("map").get<Scalar>();
    r.evaluated_probes = j.at("evaluated_probes").get<std::size_t>();
    r.cmc = j.at("cmc").get<std::vector<Scalar>>();
    r.camera_confusion.cameras = j.at("cameras").get<std::vector<CameraId>>();
    const std::size_t n = r.camera_confusion.cameras.size();
    r.camera_confusion.cells.assign(n * n, std::nullopt);
    const json& rows = j.at("camera_confusion");
    if (rows.size() != n) bad_report("confusion matrix size");
    for (std::size_t x = 0; x < n; ++x) {
      if (rows[x].size() != n) bad_report("confusion matrix row size");
      for (std::size_t y = 0; y < n; ++y) {
        if (!rows[x][y].is_null()) r.camera_confusion.at(x, y) = rows[x][y].get<Scalar>();
      }
    }
    for (const json& jp : j.at("per_probe")) {
      ProbeResult p;
      p.probe_id = jp.at("probe").get<std::string>();
      p.camera = jp.at("camera").get<CameraId>();
      p.gallery_size = jp.at("gallery_size").get<std::size_t>();
      p.positives = jp.at("positives").get<std::size_t>();
      if (!jp.at("first_hit").is_null()) p.first_hit = jp.at("first_hit").get<std::size_t>();
      if (!jp.at("ap").is_null()) p.ap = jp.at("ap").get<Scalar>();
      r.per_probe.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    bad_report(e.what());
  }
  return r;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

EvalReport from_csv_text(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "kind,id,x,y,gallery_size,positives,first_hit,value") {
    bad_report("missing CSV header");
  }
  std::map<std::pair<CameraId, CameraId>, std::optional<Scalar>> cells;
  std::set<CameraId> cameras;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) bad_report("expected 8 fields: '" + line + "'");
    const std::string& kind = f[0];
    if (kind == "mode") {
      r.mode = parse_mode(f[1]);
    } else if (kind == "map") {
      r.map = parse_real(f[7]);
    } else if (kind == "evaluated_probes") {
      r.evaluated_probes = static_cast<std::size_t>(parse_int(f[7]));
    } else if (kind == "cmc") {
      if (static_cast<std::size_t>(parse_int(f[2])) != r.cmc.size() + 1) bad_report("cmc out of order");
      r.cmc.push_back(parse_real(f[7]));
    } else if (kind == "confusion") {
      const auto x = static_cast<CameraId>(parse_int(f[2]));
      const auto y = static_cast<CameraId>(parse_int(f[3]));
      cameras.insert(x);
      cameras.insert(y);
      cells[{x, y}] = f[7] == "null" ? std::nullopt : std::optional<Scalar>(parse_real(f[7]));
    } else if (kind == "probe") {
      ProbeResult p;
      p.probe_id = f[1];
      p.camera = static_cast<CameraId>(parse_int(f[2]));
      p.gallery_size = static_cast<std::size_t>(parse_int(f[4]));
      p.positives = static_cast<std::size_t>(parse_int(f[5]));
      if (f[6] != "null") p.first_hit = static_cast<std::size_t>(parse_int(f[6]));
      if (f[7] != "null") p.ap = parse_real(f[7]);
      r.per_probe.push_back(std::move(p));
    } else {
      bad_report("unknown row kind '" + kind + "'");
    }
  }
  auto& cc = r.camera_confusion;
  cc.cameras.assign(cameras.begin(), cameras.end());
  cc.cells.assign(cc.size() * cc.size(), std::nullopt);
  for (std::size_t x = 0; x < cc.size(); ++x) {
    for (std::size_t y = 0; y < cc.size(); ++y) {
      auto it = cells.find({cc.cameras[x], cc.cameras[y]});
      if (it == cells.end()) bad_report("confusion matrix incomplete");
      cc.at(x, y) = it->second;
    }
  }
  return r;
}

}  // namespace

std::string format_report(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::kJson ? to_json_text(report) : to_csv_text(report);
}

void save_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, format_report(report, format));
}

EvalReport parse_report(const std::string& text, ReportFormat format) {
  return format == ReportFormat::kJson ? from_json_text(text) : from_csv_text(text);
}

EvalReport load_report(const std::filesystem::path& path, ReportFormat format) {
  return parse_report(read_text_file(path), format);
}

}  // namespace pdsr
