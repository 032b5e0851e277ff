#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "sgv/metrics.hpp"

namespace sgv {

/// Summary table row: one per sequence plus the aggregate (mean of the
/// per-sequence statistics), emitted last.
struct report_row {
    std::string sequence_id;
    metric_summary j;
    metric_summary f;
};

std::vector<report_row> per_sequence_table(const std::vector<sequence_result>& results);

/// Columns: sequence_id, J-M, J-O, J-D, F-M, F-O, F-D. LF line endings,
/// 4 decimal places. Empty input produces a header-only file.
void write_per_sequence_csv(const std::vector<sequence_result>& results,
                            const std::filesystem::path& path);

/// Full-precision JSON mirror of the table, including the per-frame
/// metric lists; reloading reproduces the summaries bit-exactly.
void write_per_sequence_json(const std::vector<sequence_result>& results,
                             const std::filesystem::path& path);

/// 101 rows of "percent,mean_j", no header.
void write_decay_csv(const std::array<double, 101>& curve, const std::filesystem::path& path);

void write_attribute_csv(const std::vector<attribute_entry>& entries,
                         const std::filesystem::path& path);

/// One row per sequence: id, FP-Close %, FP-Far %, FN %.
void write_error_csv(
    const std::vector<std::pair<std::string, error_partition_result>>& partitions,
    const std::filesystem::path& path);

/// format: "csv", "json", or "both".
void emit_report(const std::vector<sequence_result>& results, const std::filesystem::path& dir,
                 const std::string& format);

}  // namespace sgv
