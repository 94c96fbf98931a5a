#include "pcac/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcac/error.hpp"

namespace pcac {

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"t", "p1", "p2", "p3", "psi", "phi", "theta"};
    for (int i = 1; i <= 3; ++i) c.push_back("v" + std::to_string(i));
    for (int i = 1; i <= 3; ++i) c.push_back("w" + std::to_string(i));
    for (int i = 1; i <= 12; ++i) c.push_back("y" + std::to_string(i));
    c.push_back("f");
    for (int i = 1; i <= 3; ++i) c.push_back("tau" + std::to_string(i));
    for (int i = 1; i <= 12; ++i) c.push_back("th" + std::to_string(i));
    for (const char* name : {"lambda", "slack_max", "qp_iters", "qp_kkt"}) c.emplace_back(name);
    for (int i = 1; i <= 3; ++i) c.push_back("e" + std::to_string(i));
    return c;
  }();
  return columns;
}

std::vector<double> trace_row(const TraceRecord& r) {
  std::vector<double> row;
  row.reserve(trace_columns().size());
  row.push_back(r.t);
  for (int i = 0; i < kStateDim; ++i) row.push_back(r.state[i]);
  for (int i = 0; i < kStateDim; ++i) row.push_back(r.measured[i]);
  for (int i = 0; i < kInputDim; ++i) row.push_back(r.input[i]);
  for (int i = 0; i < kThetaDim; ++i) row.push_back(r.theta[i]);
  row.push_back(r.lambda);
  row.push_back(r.slack_max);
  row.push_back(r.qp_iterations);
  row.push_back(r.qp_kkt);
  for (int i = 0; i < 3; ++i) row.push_back(r.tracking_error[i]);
  return row;
}

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto& columns = trace_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  char buf[32];
  for (const auto& rec : trace) {
    const auto row = trace_row(rec);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  const auto& columns = trace_columns();
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trace file");
  {
    std::stringstream header(line);
    std::string name;
    std::size_t i = 0;
    while (std::getline(header, name, ',')) {
      if (i >= columns.size() || name != columns[i]) throw IoError("unexpected column '" + name + "'");
      ++i;
    }
    if (i != columns.size()) throw IoError("trace header has too few columns");
  }

  std::vector<TraceRecord> trace;
  std::vector<double> row(columns.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= row.size()) throw IoError("too many fields in trace row");
      try {
        row[i++] = std::stod(cell);
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in trace");
      }
    }
    if (i != row.size()) throw IoError("too few fields in trace row");

    TraceRecord r;
    std::size_t c = 0;
    r.t = row[c++];
    for (int j = 0; j < kStateDim; ++j) r.state[j] = row[c++];
    for (int j = 0; j < kStateDim; ++j) r.measured[j] = row[c++];
    for (int j = 0; j < kInputDim; ++j) r.input[j] = row[c++];
    for (int j = 0; j < kThetaDim; ++j) r.theta[j] = row[c++];
    r.lambda = row[c++];
    r.slack_max = row[c++];
    r.qp_iterations = static_cast<int>(row[c++]);
    r.qp_kkt = row[c++];
    for (int j = 0; j < 3; ++j) r.tracking_error[j] = row[c++];
    trace.push_back(r);
  }
  return trace;
}

}  // namespace pcac
