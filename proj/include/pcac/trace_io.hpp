#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pcac/simulation.hpp"

namespace pcac {

/// Column names in file order (48 columns).
const std::vector<std::string>& trace_columns();

/// Flattens a record into the column order of trace_columns().
std::vector<double> trace_row(const TraceRecord& record);

/// Writes a header line and one row per record, 17 significant digits.
void write_trace_csv(const std::vector<TraceRecord>& trace, const std::filesystem::path& path);

/// Reads a file written by write_trace_csv. Throws IoError on a schema mismatch.
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace pcac
