#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace terragan {

struct CurveSeries {
  std::string name;
  std::vector<std::pair<int, double>> points;  // epochs strictly increasing
};

/// Parses a long-format TrainLog CSV into one series per metric, sorted by
/// epoch. Malformed rows and duplicate epochs are reported with their line
/// number.
std::vector<CurveSeries> load_log(const std::filesystem::path& path);

/// Pointwise real - fake; the epoch grids must match exactly.
CurveSeries gap_series(const CurveSeries& real, const CurveSeries& fake);

/// Ordinary least-squares slope over the trailing `window` fraction of the
/// series (window 1.0 = everything). Needs at least two points in view.
double trend_slope(const CurveSeries& s, double window);

/// Leading-window variant: slope over the first `count` points.
double trend_slope_first(const CurveSeries& s, int count);

/// Deterministic SVG line chart: fixed canvas, one polyline per series,
/// legend and linear auto-ranged axes with a 5% margin.
void render_curves(const std::vector<CurveSeries>& series,
                   const std::filesystem::path& path);

/// min / max / final / slope per metric as a JSON document.
std::string summarize(const std::vector<CurveSeries>& series);

}  // namespace terragan
