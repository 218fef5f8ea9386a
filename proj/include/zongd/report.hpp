#pragma once

#include <string>

#include "zongd/campaign.hpp"

namespace zongd {

enum class ReportFormat { JsonLines, Csv };

ReportFormat report_format_from_name(const std::string& name);
std::string report_format_name(ReportFormat f);

/// Serializes a campaign report with deterministic field order and
/// full-precision numbers; emit + read round-trips to an equal report.
/// Null aggregates (no successes / nothing attempted) stay explicit nulls.
void emit_report(const CampaignReport& report, const std::string& path, ReportFormat format);

std::string render_report(const CampaignReport& report, ReportFormat format);

CampaignReport read_report(const std::string& path, ReportFormat format);
CampaignReport parse_report(const std::string& text, ReportFormat format);

/// Human-oriented digest for the CLI.
std::string summarize_report(const CampaignReport& report);

}  // namespace zongd
