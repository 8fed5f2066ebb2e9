#include "gax/shape_export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gax/error.hpp"

namespace gax {

namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

constexpr double kWidth = 480.0;
constexpr double kHeight = 320.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Axis {
  double lo;
  double hi;
  double to_px(double v, double px_lo, double px_hi) const {
    const double span = hi - lo;
    return px_lo + (span > 0.0 ? (v - lo) / span : 0.5) * (px_hi - px_lo);
  }
};

// Points tracing the shape over [lo, hi]; steps for piecewise-constant.
std::vector<std::pair<double, double>> trace(const FeatureShape& s, double lo, double hi) {
  std::vector<std::pair<double, double>> pts;
  if (s.mode() == Interpolation::PiecewiseConstant) {
    pts.emplace_back(lo, s(lo));
    for (double x : s.xs()) {
      if (x <= lo || x >= hi) continue;
      pts.emplace_back(x, pts.back().second);
      pts.emplace_back(x, s(x));
    }
    pts.emplace_back(hi, s(hi));
  } else {
    constexpr int kSamples = 200;
    for (int k = 0; k <= kSamples; ++k) {
      const double x = lo + (hi - lo) * k / kSamples;
      pts.emplace_back(x, s(x));
    }
  }
  return pts;
}

}  // namespace

void write_shapes_csv(std::span<const FeatureShape> shapes, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "feature,breakpoint,value,mode\n";
  for (const auto& s : shapes) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      out << s.feature() << ',' << format_g17(s.xs()[k]) << ',' << format_g17(s.ys()[k]) << ','
          << to_string(s.mode()) << '\n';
    }
  }
  write_file(path, out.str());
}

void write_shapes_csv(const AdditiveModel& m, const std::filesystem::path& path) {
  write_shapes_csv(std::span<const FeatureShape>(m.shapes()), path);
}

std::vector<FeatureShape> read_shapes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "feature,breakpoint,value,mode") {
    throw Error(ErrorCode::MissingColumn, "unexpected shape CSV header in '" + path.string() + "'");
  }
  struct Pending {
    std::vector<double> xs, ys;
    Interpolation mode = Interpolation::PiecewiseConstant;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> pending;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) {
      throw Error(ErrorCode::MissingColumn,
                  "shape CSV line " + std::to_string(line_no) + " does not have 4 cells");
    }
    double x = 0.0, y = 0.0;
    const auto px = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), x);
    const auto py = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), y);
    if (px.ec != std::errc() || py.ec != std::errc()) {
      throw Error(ErrorCode::NonNumericCell,
                  "non-numeric value in shape CSV line " + std::to_string(line_no));
    }
    auto [it, inserted] = pending.try_emplace(cells[0]);
    if (inserted) order.push_back(cells[0]);
    it->second.xs.push_back(x);
    it->second.ys.push_back(y);
    it->second.mode = interpolation_from_string(cells[3]);
  }
  std::vector<FeatureShape> shapes;
  for (const auto& name : order) {
    auto& p = pending[name];
    shapes.emplace_back(name, std::move(p.xs), std::move(p.ys), p.mode);
  }
  return shapes;
}

std::string render_feature_svg(const std::string& feature, std::span<const SvgSeries> series) {
  double x_lo = INFINITY, x_hi = -INFINITY;
  for (const auto& s : series) {
    if (const auto* shape = s.model->find_shape(feature)) {
      x_lo = std::min(x_lo, shape->xs().front());
      x_hi = std::max(x_hi, shape->xs().back());
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  std::vector<std::vector<std::pair<double, double>>> traces;
  double y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : series) {
    const auto* shape = s.model->find_shape(feature);
    traces.push_back(shape ? trace(*shape, x_lo, x_hi) : std::vector<std::pair<double, double>>{});
    for (const auto& [x, y] : traces.back()) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!(y_lo <= y_hi)) {
    y_lo = -1.0;
    y_hi = 1.0;
  }
  const double pad = std::max(1e-9, 0.05 * (y_hi - y_lo));
  y_lo -= pad;
  y_hi += pad;
  const Axis ax{x_lo, x_hi};
  const Axis ay{y_lo, y_hi};
  const double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\">" << feature << "</text>\n";
  out << "<line x1=\"" << fixed(px0) << "\" y1=\"" << fixed(py0) << "\" x2=\"" << fixed(px1)
      << "\" y2=\"" << fixed(py0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fixed(px0) << "\" y1=\"" << fixed(py0) << "\" x2=\"" << fixed(px0)
      << "\" y2=\"" << fixed(py1) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
    const double xp = ax.to_px(xv, px0, px1);
    const double yp = ay.to_px(yv, py0, py1);
    out << "<text x=\"" << fixed(xp) << "\" y=\"" << fixed(py0 + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << fixed(xv, 3) << "</text>\n";
    out << "<text x=\"" << fixed(px0 - 6) << "\" y=\"" << fixed(yp + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fixed(yv, 3)
        << "</text>\n";
  }
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    if (!traces[k].empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < traces[k].size(); ++i) {
        out << (i ? " " : "") << fixed(ax.to_px(traces[k][i].first, px0, px1)) << ','
            << fixed(ay.to_px(traces[k][i].second, py0, py1));
      }
      out << "\"/>\n";
    }
    out << "<text x=\"" << fixed(px1 - 4) << "\" y=\"" << fixed(kTop + 12.0 * (k + 1))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << color
        << "\">" << series[k].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_pair_svg(const PairShape& pair) {
  const auto& gx = pair.grid_x();
  const auto& gy = pair.grid_y();
  const double vmax = std::max(1e-12, pair.values().cwiseAbs().maxCoeff());
  const double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;
  const double cw = (px1 - px0) / static_cast<double>(gx.size());
  const double ch = (py0 - py1) / static_cast<double>(gy.size());

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\">" << pair.features().first << " x "
      << pair.features().second << "</text>\n";
  // Cells are drawn on bin index axes; red positive, blue negative.
  for (std::size_t i = 0; i < gx.size(); ++i) {
    for (std::size_t j = 0; j < gy.size(); ++j) {
      const double v = pair.values()(static_cast<Index>(i), static_cast<Index>(j)) / vmax;
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
      char color[16];
      if (v >= 0) {
        std::snprintf(color, sizeof(color), "#ff%02x%02x", fade, fade);
      } else {
        std::snprintf(color, sizeof(color), "#%02x%02xff", fade, fade);
      }
      out << "<rect x=\"" << fixed(px0 + cw * static_cast<double>(i)) << "\" y=\""
          << fixed(py0 - ch * static_cast<double>(j + 1)) << "\" width=\"" << fixed(cw)
          << "\" height=\"" << fixed(ch) << "\" fill=\"" << color << "\"/>\n";
    }
  }
  out << "<text x=\"" << fixed(px0) << "\" y=\"" << fixed(py0 + 16)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << pair.features().first << " ["
      << fixed(gx.front(), 3) << ", " << fixed(gx.back(), 3) << "]</text>\n";
  out << "<text x=\"" << fixed(px0 - 6) << "\" y=\"" << fixed(py1 - 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << pair.features().second << " ["
      << fixed(gy.front(), 3) << ", " << fixed(gy.back(), 3) << "]</text>\n";
  out << "<text x=\"" << fixed(px1) << "\" y=\"" << fixed(py0 + 16)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">|max| "
      << fixed(vmax, 4) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> render_shape_svgs(std::span<const SvgSeries> series,
                                                     const std::filesystem::path& svg_dir) {
  std::error_code ec;
  std::filesystem::create_directories(svg_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + svg_dir.string() + "'");
  std::vector<std::string> features;
  for (const auto& s : series) {
    for (const auto& shape : s.model->shapes()) {
      if (std::find(features.begin(), features.end(), shape.feature()) == features.end()) {
        features.push_back(shape.feature());
      }
    }
  }
  std::vector<std::filesystem::path> written;
  for (const auto& f : features) {
    const auto path = svg_dir / ("shape_" + safe_name(f) + ".svg");
    write_file(path, render_feature_svg(f, series));
    written.push_back(path);
  }
  for (const auto& s : series) {
    for (const auto& pair : s.model->pairs()) {
      std::string stem = "pair_" + safe_name(pair.features().first) + "__" +
                         safe_name(pair.features().second);
      if (series.size() > 1) stem += "_" + safe_name(s.label);
      const auto path = svg_dir / (stem + ".svg");
      write_file(path, render_pair_svg(pair));
      written.push_back(path);
    }
  }
  return written;
}

std::vector<std::filesystem::path> export_shapes(const AdditiveModel& m,
                                                 const std::filesystem::path& csv_path,
                                                 const std::filesystem::path& svg_dir) {
  write_shapes_csv(m, csv_path);
  const SvgSeries series[] = {{m.method().empty() ? "model" : m.method(), &m}};
  return render_shape_svgs(series, svg_dir);
}

}  // namespace gax
