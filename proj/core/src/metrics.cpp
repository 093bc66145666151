#include "terragan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "terragan/errors.hpp"
#include "terragan/train_log.hpp"

namespace terragan {

std::vector<CurveSeries> load_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open log: " + path.string());

  std::vector<CurveSeries> series;
  std::map<std::string, size_t> index;
  std::map<std::string, std::set<int>> seen_epochs;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "epoch,metric,value")
        throw DataError("log line 1: expected header 'epoch,metric,value'");
      continue;
    }
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string epoch_s, metric, value_s;
    if (!std::getline(fields, epoch_s, ',') || !std::getline(fields, metric, ',') ||
        !std::getline(fields, value_s))
      throw DataError("log line " + std::to_string(lineno) + ": expected 3 fields");
    int epoch = 0;
    double value = 0.0;
    try {
      size_t pos = 0;
      epoch = std::stoi(epoch_s, &pos);
      if (pos != epoch_s.size()) throw std::invalid_argument(epoch_s);
      value = std::stod(value_s, &pos);
      if (pos != value_s.size()) throw std::invalid_argument(value_s);
    } catch (const std::exception&) {
      throw DataError("log line " + std::to_string(lineno) + ": malformed row");
    }
    if (metric.empty())
      throw DataError("log line " + std::to_string(lineno) + ": empty metric name");
    if (!seen_epochs[metric].insert(epoch).second)
      throw DataError("log line " + std::to_string(lineno) + ": duplicate epoch " +
                      std::to_string(epoch) + " for metric " + metric);
    auto it = index.find(metric);
    if (it == index.end()) {
      index[metric] = series.size();
      series.push_back(CurveSeries{metric, {}});
      it = index.find(metric);
    }
    series[it->second].points.emplace_back(epoch, value);
  }
  for (CurveSeries& s : series)
    std::sort(s.points.begin(), s.points.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  return series;
}

CurveSeries gap_series(const CurveSeries& real, const CurveSeries& fake) {
  if (real.points.size() != fake.points.size())
    throw DataError("gap_series: epoch grids differ in length");
  CurveSeries out;
  out.name = real.name + "-" + fake.name;
  out.points.reserve(real.points.size());
  for (size_t i = 0; i < real.points.size(); ++i) {
    if (real.points[i].first != fake.points[i].first)
      throw DataError("gap_series: epoch grids do not match");
    out.points.emplace_back(real.points[i].first,
                            real.points[i].second - fake.points[i].second);
  }
  return out;
}

namespace {

double ols_slope(const std::vector<std::pair<int, double>>& pts, size_t begin,
                 size_t end) {
  const size_t n = end - begin;
  if (n < 2) throw DataError("trend_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (size_t i = begin; i < end; ++i) {
    mx += pts[i].first;
    my += pts[i].second;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = begin; i < end; ++i) {
    double dx = pts[i].first - mx;
    sxy += dx * (pts[i].second - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DataError("trend_slope: degenerate epoch axis");
  return sxy / sxx;
}

}  // namespace

double trend_slope(const CurveSeries& s, double window) {
  if (window <= 0.0 || window > 1.0)
    throw DataError("trend_slope: window must be in (0, 1]");
  const size_t n = s.points.size();
  size_t take = static_cast<size_t>(std::ceil(window * static_cast<double>(n)));
  take = std::max<size_t>(take, 2);
  take = std::min(take, n);
  return ols_slope(s.points, n - take, n);
}

double trend_slope_first(const CurveSeries& s, int count) {
  size_t take = std::min(static_cast<size_t>(count), s.points.size());
  return ols_slope(s.points, 0, take);
}

// --------------------------------------------------------------------- plot

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 45;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void render_curves(const std::vector<CurveSeries>& series,
                   const std::filesystem::path& path) {
  if (series.empty()) throw DataError("render_curves: no series");
  for (const CurveSeries& s : series)
    if (s.points.empty()) throw DataError("render_curves: empty series " + s.name);

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const CurveSeries& s : series) {
    for (const auto& [e, v] : s.points) {
      xmin = std::min(xmin, static_cast<double>(e));
      xmax = std::max(xmax, static_cast<double>(e));
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  // Linear axes, 5% margins; degenerate ranges get a unit pad.
  double xpad = (xmax - xmin) * 0.05;
  double ypad = (ymax - ymin) * 0.05;
  if (xpad == 0.0) xpad = 0.5;
  if (ypad == 0.0) ypad = std::max(0.5, std::abs(ymax) * 0.05);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) {
    return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w;
  };
  auto sy = [&](double y) {
    return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";

  // Axes with 5 ticks per side.
  os << "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
     << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
     << "\"/>\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
     << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double fy = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << kHeight - kMarginBottom + 16
       << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
    os << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << fmt(sy(fy) + 4)
       << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
  }
  os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 8
     << "\" text-anchor=\"middle\">epoch</text>\n";
  os << "</g>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [e, v] : series[k].points)
      os << fmt(sx(e)) << "," << fmt(sy(v)) << " ";
    os << "\"/>\n";
  }

  // Legend, top-right.
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    double y = kMarginTop + 14.0 + 16.0 * static_cast<double>(k);
    os << "<rect x=\"" << kWidth - 160 << "\" y=\"" << fmt(y - 9)
       << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << kWidth - 145 << "\" y=\"" << fmt(y) << "\">"
       << series[k].name << "</text>\n";
  }
  os << "</g>\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write plot: " + path.string());
  out << os.str();
  if (!out) throw DataError("write failure: " + path.string());
}

std::string summarize(const std::vector<CurveSeries>& series) {
  nlohmann::json doc;
  for (const CurveSeries& s : series) {
    if (s.points.empty()) continue;
    double mn = 1e300, mx = -1e300;
    for (const auto& [e, v] : s.points) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    nlohmann::json entry;
    entry["min"] = mn;
    entry["max"] = mx;
    entry["final"] = s.points.back().second;
    entry["slope"] = s.points.size() >= 2 ? trend_slope(s, 1.0) : 0.0;
    doc[s.name] = entry;
  }
  return doc.dump(2) + "\n";
}

}  // namespace terragan
