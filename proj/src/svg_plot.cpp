#include "pcac/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "pcac/error.hpp"

namespace pcac {

namespace {

constexpr double kPanelWidth = 420.0;
constexpr double kPanelHeight = 200.0;
constexpr double kMarginLeft = 62.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 26.0;
constexpr double kMarginBottom = 30.0;
constexpr double kTitleHeight = 34.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / magnitude;
  const double m = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return m * magnitude;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void pad() {
    if (!std::isfinite(lo)) {
      lo = -1.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double d = std::max(1e-3, 0.1 * std::abs(hi));
      lo -= d;
      hi += d;
    } else {
      const double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

void render_axes(std::ostringstream& svg, const Axes& axes, double x0, double y0) {
  const double w = kPanelWidth - kMarginLeft - kMarginRight;
  const double h = kPanelHeight - kMarginTop - kMarginBottom;
  const double left = x0 + kMarginLeft;
  const double top = y0 + kMarginTop;

  Range xr, yr;
  for (const auto& s : axes.series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  if (std::isfinite(xr.lo) && xr.hi <= xr.lo) xr.hi = xr.lo + 1.0;
  if (!std::isfinite(xr.lo)) {
    xr.lo = 0.0;
    xr.hi = 1.0;
  }
  yr.pad();
  auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double v) { return top + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };

  svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"white\" stroke=\"#444\" stroke-width=\"0.8\"/>\n";

  const double ystep = nice_step(yr.hi - yr.lo, 4);
  for (double v = std::ceil(yr.lo / ystep) * ystep; v <= yr.hi + 1e-9 * ystep; v += ystep) {
    const double yy = py(v);
    svg << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(yy) << "\" x2=\"" << fmt(left + w) << "\" y2=\"" << fmt(yy)
        << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n";
    svg << "<text x=\"" << fmt(left - 4) << "\" y=\"" << fmt(yy + 3.5)
        << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(std::abs(v) < 1e-12 * ystep ? 0.0 : v) << "</text>\n";
  }
  const double xstep = nice_step(xr.hi - xr.lo, 6);
  for (double v = std::ceil(xr.lo / xstep) * xstep; v <= xr.hi + 1e-9 * xstep; v += xstep) {
    const double xx = px(v);
    svg << "<line x1=\"" << fmt(xx) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(xx) << "\" y2=\"" << fmt(top + h)
        << "\" stroke=\"#eee\" stroke-width=\"0.6\"/>\n";
    svg << "<text x=\"" << fmt(xx) << "\" y=\"" << fmt(top + h + 13)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + w / 2) << "\" y=\"" << fmt(top + h + 26)
      << "\" font-size=\"10\" text-anchor=\"middle\">t [s]</text>\n";
  svg << "<text x=\"" << fmt(left + w / 2) << "\" y=\"" << fmt(y0 + 17)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(axes.title) << "</text>\n";
  if (!axes.ylabel.empty()) {
    const double cx = x0 + 12;
    const double cy = top + h / 2;
    svg << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(cy) << "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << fmt(cx) << " " << fmt(cy) << ")\">" << escape(axes.ylabel) << "</text>\n";
  }

  double legend_y = top + 12;
  for (const auto& s : axes.series) {
    if (s.x.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\"";
    if (s.dashed) svg << " stroke-dasharray=\"5,3\"";
    svg << " points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.y[i])) continue;
      // Clamp so far-off samples still draw at the frame edge.
      const double yy = std::clamp(py(s.y[i]), top - 2.0, top + h + 2.0);
      svg << fmt(px(s.x[i])) << "," << fmt(yy) << " ";
    }
    svg << "\"/>\n";
    if (!s.label.empty()) {
      svg << "<line x1=\"" << fmt(left + w - 70) << "\" y1=\"" << fmt(legend_y - 3) << "\" x2=\"" << fmt(left + w - 56)
          << "\" y2=\"" << fmt(legend_y - 3) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"4,2\"" : "") << "/>\n";
      svg << "<text x=\"" << fmt(left + w - 52) << "\" y=\"" << fmt(legend_y) << "\" font-size=\"9\">" << escape(s.label)
          << "</text>\n";
      legend_y += 11;
    }
  }
}

}  // namespace

Figure::Figure(std::string title, int rows, int columns)
    : title_(std::move(title)), rows_(rows), columns_(columns), panels_(static_cast<std::size_t>(rows * columns)) {
  if (rows <= 0 || columns <= 0) throw Error("figure needs at least one panel");
}

Axes& Figure::panel(int row, int column) {
  return panels_.at(static_cast<std::size_t>(row * columns_ + column));
}

std::string Figure::render() const {
  const double width = columns_ * kPanelWidth;
  const double height = kTitleHeight + rows_ * kPanelHeight;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
  svg << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << escape(title_)
      << "</text>\n";
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < columns_; ++c) {
      render_axes(svg, panels_[static_cast<std::size_t>(r * columns_ + c)], c * kPanelWidth, kTitleHeight + r * kPanelHeight);
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void Figure::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << render();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::filesystem::path> write_trace_plots(const Scenario& scenario, const std::vector<TraceRecord>& trace,
                                                     const std::filesystem::path& directory, const std::string& stem) {
  std::vector<std::filesystem::path> written;
  if (trace.empty()) return written;

  std::vector<double> t;
  for (const auto& r : trace) t.push_back(r.t);
  auto column = [&](auto get) {
    std::vector<double> v;
    v.reserve(trace.size());
    for (const auto& r : trace) v.push_back(get(r));
    return v;
  };
  auto constant = [&](double value) { return std::vector<double>(trace.size(), value); };
  const char* kMeasured = "#1f77b4";
  const char* kCommand = "#d62728";
  const char* kBound = "#7f7f7f";

  auto save = [&](const Figure& fig, const std::string& group) {
    const auto path = directory / (stem + "_" + group + ".svg");
    fig.save(path);
    written.push_back(path);
  };

  {
    Figure fig(scenario.name + ": position", 3, 1);
    const char* names[] = {"p1 [m]", "p2 [m]", "p3 [m]"};
    for (int i = 0; i < 3; ++i) {
      Axes& ax = fig.panel(i, 0);
      ax.title = std::string("position ") + names[i];
      ax.ylabel = names[i];
      ax.series.push_back({t, column([i](const TraceRecord& r) { return r.state[i]; }), kMeasured, "response", false});
      ax.series.push_back({t, column([&, i](const TraceRecord& r) { return evaluate_command(scenario.command, r.t)[i]; }),
                           kCommand, "command", true});
    }
    save(fig, "position");
  }
  {
    Figure fig(scenario.name + ": Euler angles", 3, 1);
    const char* names[] = {"psi [rad]", "phi [rad]", "theta [rad]"};
    for (int i = 0; i < 3; ++i) {
      Axes& ax = fig.panel(i, 0);
      ax.title = names[i];
      ax.ylabel = names[i];
      const double limit = -scenario.pcac.constraint_offset[2 * i];
      ax.series.push_back({t, column([i](const TraceRecord& r) { return r.state[state_index::kEuler + i]; }), kMeasured,
                           "response", false});
      ax.series.push_back({t, constant(limit), kBound, "limit", true});
      ax.series.push_back({t, constant(-limit), kBound, "", true});
    }
    save(fig, "attitude");
  }
  {
    const auto truth = true_theta_history(scenario, trace);
    Figure fig(scenario.name + ": identified parameters", 4, 3);
    for (int i = 0; i < kThetaDim; ++i) {
      Axes& ax = fig.panel(i / 3, i % 3);
      ax.title = "theta " + std::to_string(i + 1);
      ax.series.push_back({t, column([i](const TraceRecord& r) { return r.theta[i]; }), kMeasured, "estimate", false});
      std::vector<double> ref;
      for (const auto& th : truth) ref.push_back(th[i]);
      ax.series.push_back({t, ref, kCommand, "true", true});
    }
    save(fig, "theta");
  }
  {
    Figure fig(scenario.name + ": forgetting factor", 1, 1);
    Axes& ax = fig.panel(0, 0);
    ax.title = "lambda";
    ax.series.push_back({t, column([](const TraceRecord& r) { return r.lambda; }), kMeasured, "", false});
    save(fig, "lambda");
  }
  {
    Figure fig(scenario.name + ": inputs", 4, 1);
    const char* names[] = {"f [N]", "tau1 [N m]", "tau2 [N m]", "tau3 [N m]"};
    for (int i = 0; i < kInputDim; ++i) {
      Axes& ax = fig.panel(i, 0);
      ax.title = names[i];
      ax.ylabel = names[i];
      ax.series.push_back({t, column([i](const TraceRecord& r) { return r.input[i]; }), kMeasured, "applied", false});
      // Bounds act on the deviation, so the thrust band moves with the feedforward.
      std::vector<double> lo, hi;
      for (const auto& r : trace) {
        const double offset =
            i == 0 ? (scenario.feedforward_mass == FeedforwardMass::kPlant ? scenario.plant_mass_at(r.t) : scenario.vehicle.mass) *
                         scenario.vehicle.gravity
                   : 0.0;
        lo.push_back(scenario.pcac.u_min[i] + offset);
        hi.push_back(scenario.pcac.u_max[i] + offset);
      }
      ax.series.push_back({t, hi, kBound, "bounds", true});
      ax.series.push_back({t, lo, kBound, "", true});
    }
    save(fig, "inputs");
  }
  return written;
}

}  // namespace pcac
