#pragma once

#include <filesystem>

#include "pdsr/retrieval_eval.hpp"

namespace pdsr {

enum class ReportFormat { kJson, kCsv };

/// Ranks of the CMC curve written to report files.
inline constexpr std::size_t kReportCmcRanks = 50;

/// JSON or flat CSV. Absent confusion cells and probes without positives are
/// written as `null`; reals are written with round-trip precision.
void save_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);

std::string format_report(const EvalReport& report, ReportFormat format);

/// Inverse of save_report; the CMC curve comes back truncated to
/// kReportCmcRanks entries.
EvalReport load_report(const std::filesystem::path& path, ReportFormat format);

EvalReport parse_report(const std::string& text, ReportFormat format);

}  // namespace pdsr
