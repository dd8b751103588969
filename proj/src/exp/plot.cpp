#include "tomsc/exp/plot.hpp"

#include "tomsc/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace tomsc::exp {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::filesystem::path& csv, int line, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    fail("plot: ", csv.string(), ": line ", line, ": column '", column, "' is not a finite number: '", text, "'");
  }
  return v;
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

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string tick(double v, double span) {
  if (std::abs(v) < 1e-9 * span) v = 0.0;
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Range padded() const {
    double span = hi - lo;
    if (span <= 0.0) span = std::max(std::abs(hi), 1.0);
    return {lo - 0.05 * span, hi + 0.05 * span};
  }
};

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

}  // namespace

std::vector<PlotSeries> read_plot_csv(const std::filesystem::path& csv, const PlotSpec& spec) {
  std::ifstream in(csv);
  if (!in) fail("plot: cannot read ", csv.string());
  std::string line;
  if (!std::getline(in, line)) fail("plot: ", csv.string(), ": empty file");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail("plot: ", csv.string(), ": line 1: no column '", name, "'");
    return static_cast<int>(it - header.begin());
  };
  const int xc = column(spec.x_column);
  const int yc = column(spec.y_column);
  const int sc = spec.series_column.empty() ? -1 : column(spec.series_column);
  const int ec = spec.error_column.empty() ? -1 : column(spec.error_column);

  std::vector<PlotSeries> out;
  std::map<std::string, std::size_t> slot;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      fail("plot: ", csv.string(), ": line ", number, ": expected ", header.size(), " fields, found ", cells.size());
    }
    const std::string name = sc < 0 ? spec.y_column : cells[sc];
    auto [it, fresh] = slot.emplace(name, out.size());
    if (fresh) out.push_back({name, {}});
    PlotPoint p{parse_number(cells[xc], csv, number, spec.x_column), parse_number(cells[yc], csv, number, spec.y_column),
                ec < 0 ? 0.0 : parse_number(cells[ec], csv, number, spec.error_column)};
    out[it->second].points.push_back(p);
  }
  if (out.empty()) fail("plot: ", csv.string(), ": no data rows");
  for (auto& s : out) {
    std::stable_sort(s.points.begin(), s.points.end(), [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  if (series.empty()) fail("plot: empty series list");
  Range xr, yr;
  for (const auto& s : series) {
    if (s.points.empty()) fail("plot: series '", s.name, "' is empty");
    for (const auto& p : s.points) {
      xr.add(p.x);
      yr.add(p.y - std::abs(p.err));
      yr.add(p.y + std::abs(p.err));
    }
  }
  const Range xa = xr.padded();
  const Range ya = yr.padded();

  constexpr double W = 720, H = 440, L = 85, R = 170, T = 40, B = 55;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
  auto py = [&](double y) { return T + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" data-x-range=\"" << num(xa.lo) << ' ' << num(xa.hi) << "\" data-y-range=\"" << num(ya.lo)
      << ' ' << num(ya.hi) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << L + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
      << "</text>\n";
  svg << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xa.lo + (xa.hi - xa.lo) * i / 4.0;
    const double yv = ya.lo + (ya.hi - ya.lo) * i / 4.0;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << T + ph << "\" x2=\"" << px(xv) << "\" y2=\"" << T + ph + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << T + ph + 19 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick(xv, xa.hi - xa.lo) << "</text>\n";
    svg << "<line x1=\"" << L - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << L << "\" y2=\"" << py(yv)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << L - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << tick(yv, ya.hi - ya.lo)
        << "</text>\n";
  }
  svg << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(spec.x_label.empty() ? spec.x_column : spec.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18 " << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(spec.y_label.empty() ? spec.y_column : spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    svg << "<g class=\"series\" data-name=\"" << escape(s.name) << "\">\n<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      svg << (k ? " " : "") << num(px(s.points[k].x)) << ',' << num(py(s.points[k].y));
    }
    svg << "\"/>\n";
    for (const auto& p : s.points) {
      if (p.err != 0.0) {
        svg << "<line x1=\"" << num(px(p.x)) << "\" y1=\"" << num(py(p.y - std::abs(p.err))) << "\" x2=\""
            << num(px(p.x)) << "\" y2=\"" << num(py(p.y + std::abs(p.err))) << "\" stroke=\"" << color << "\"/>\n";
      }
      svg << "<circle cx=\"" << num(px(p.x)) << "\" cy=\"" << num(py(p.y)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    svg << "</g>\n";
    const double ly = T + 14 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 36 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << L + pw + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << escape(s.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg) {
  const std::string text = render_svg(read_plot_csv(csv, spec), spec);
  std::ofstream out(svg, std::ios::binary);
  if (!out) fail("plot: cannot write ", svg.string());
  out << text;
}

}  // namespace tomsc::exp
