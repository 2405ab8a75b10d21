#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mtb/harness.hpp"

namespace mtb::report {

using Row = std::vector<std::string>;

// RFC 4180 quoting with LF line ends: fields holding a comma, quote or line
// break are quoted, quotes doubled.
std::string csv_field(std::string_view field);
std::string csv(const Row& header, const std::vector<Row>& rows);

// Column-aligned plain-text table; label columns are left-aligned, the rest
// right-aligned.
std::string table(const Row& header, const std::vector<Row>& rows, std::size_t label_columns = 1);

// Two decimals, half-up, as shown in human-readable tables.
std::string display(double v);

// Writes a file, creating parent directories. Throws IoError naming the path.
void write_file(const std::filesystem::path& path, std::string_view content);

// Full-precision CSV plus a rounded text table: <stem>.csv, <stem>.txt.
void write_transfer(const std::filesystem::path& dir, const harness::TransferMatrix& m);

// Plot data with header `step,mean,lo,hi`: history_cummin.csv and
// history_step.csv. Missing bounds stay empty.
void write_history(const std::filesystem::path& dir, const harness::DifficultyHistory& h);

// Table of data-quality rows, one column per method: quality.csv, quality.txt.
void write_quality(const std::filesystem::path& dir, const std::map<std::string, harness::DataQualityReport>& reports);

// Rows (group, measure) in presentation order for one report.
std::vector<std::pair<std::string, std::string>> quality_rows(const harness::DataQualityReport& r);

// Plot data with header `x,y,label`.
void write_pareto(const std::filesystem::path& path, const std::vector<harness::ParetoPoint>& points);

// Per-item scores and the summary mean.
void write_evaluation(const std::filesystem::path& dir, const std::string& label,
                      const std::vector<DatasetRecord>& records, const harness::Evaluation& ev);

}  // namespace mtb::report
