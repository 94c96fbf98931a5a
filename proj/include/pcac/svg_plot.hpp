#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pcac/scenario.hpp"
#include "pcac/simulation.hpp"

namespace pcac {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool dashed = false;
};

struct Axes {
  std::string title;
  std::string ylabel;
  std::vector<Series> series;
};

/// Static line-chart figure rendered to SVG. Panels fill a grid row by row.
class Figure {
 public:
  Figure(std::string title, int rows, int columns);

  Axes& panel(int row, int column);
  std::string render() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::string title_;
  int rows_;
  int columns_;
  std::vector<Axes> panels_;
};

/// Position, attitude, identified parameters, forgetting factor and inputs,
/// one SVG per group named `<stem>_<group>.svg`. Writes nothing for an empty
/// trace. Returns the files written.
std::vector<std::filesystem::path> write_trace_plots(const Scenario& scenario, const std::vector<TraceRecord>& trace,
                                                     const std::filesystem::path& directory, const std::string& stem);

}  // namespace pcac
