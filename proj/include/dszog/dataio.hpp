#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/metrics.hpp"
#include "dszog/problems.hpp"

namespace dszog {

/// Ordered key=value pairs, as written to manifest.txt and report.txt.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Reads the sparse text format
///
///     <label> <index>:<value> <index>:<value> ...
///
/// one row per line. Tokens are separated by any run of spaces or tabs.
/// Blank lines and lines whose first non-blank character is '#' are
/// skipped. Indices are 1-based and may appear in any order but at most once
/// per line; omitted entries are zero. Labels:
///
///     -1, 0        -> -1
///     +1, 1, 2     -> +1
///
/// Anything else, a missing ':', index 0, a non-numeric or nonfinite value,
/// or an index above `expect_dim` is a ParseError carrying the line number.
/// The dimension is `expect_dim` when given, otherwise the largest index
/// seen. An empty file gives an empty dataset.
Dataset read_sparse_dataset(const std::filesystem::path& path,
                            std::optional<Index> expect_dim = std::nullopt);

/// Same grammar, from an in-memory string (line numbers count from 1).
Dataset parse_sparse_dataset(const std::string& text, std::optional<Index> expect_dim = std::nullopt);

/// n_keep rows chosen by `seed`, kept in their original order. Stratified
/// sampling allocates rows to the two classes by largest remainder, so each
/// class count is within one row of its proportional share. Throws
/// DataError if n_keep > n.
Dataset subsample(const Dataset& data, Index n_keep, bool stratified, std::uint64_t seed);

/// 64-bit FNV-1a over n and d (int64), then features row-major, labels and
/// the sensitive matrix (if any) as little-endian IEEE doubles.
std::uint64_t dataset_checksum(const Dataset& data);

/// Hex rendering used in manifests.
std::string checksum_hex(std::uint64_t checksum);

/// `%.12g`, the number format of every output file.
std::string format_number(double x);

/// Header of trace.csv for a record with the given extra columns.
std::string trace_header(const std::vector<std::string>& extra_names);

/// Writes trace.csv, report.txt and manifest.txt into out_dir (created if
/// missing). `report_extra` lines are appended to report.txt after the
/// stationarity fields. I/O failures throw std::runtime_error naming the
/// path.
void write_run(const RunRecord& record, const StationarityReport& report, const KeyValues& manifest,
               const std::filesystem::path& out_dir, const KeyValues& report_extra = {});

/// Reads a key=value file back, in file order. Lines without '=' are a
/// ParseError.
KeyValues read_key_values(const std::filesystem::path& path);

}  // namespace dszog
