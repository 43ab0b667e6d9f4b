#include "canopysr/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace canopysr {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

constexpr double kW = 640, kH = 420;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 48;

struct Range {
  double lo = 0, hi = 1;
  double map(double v, double a, double b) const {
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

// Widen to a round step so tick labels stay short.
Range nice_range(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double raw = (hi - lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
}

std::vector<double> ticks(const Range& r, int target = 6) {
  const double raw = (r.hi - r.lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag * 10;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + step * 1e-9;
       v += step)
    out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

class Canvas {
public:
  Canvas(const std::string& title, const std::string& x_label,
         const std::string& y_label) {
    svg_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
         << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
         << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    text(kW / 2, 20, escape(title), "middle", 14);
    text(kLeft + (kW - kLeft - kRight) / 2, kH - 10, escape(x_label), "middle");
    svg_ << "<text x=\"16\" y=\"" << kTop + (kH - kTop - kBottom) / 2
         << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
         << kTop + (kH - kTop - kBottom) / 2 << ")\">" << escape(y_label)
         << "</text>\n";
  }

  void axes(const Range& rx, const Range& ry) {
    rx_ = rx;
    ry_ = ry;
    for (double t : ticks(rx_)) {
      const double x = px(t);
      line(x, kTop, x, kH - kBottom, "#dddddd", 1);
      text(x, kH - kBottom + 16, fmt(t), "middle");
    }
    for (double t : ticks(ry_)) {
      const double y = py(t);
      line(kLeft, y, kW - kRight, y, "#dddddd", 1);
      text(kLeft - 6, y + 4, fmt(t), "end");
    }
    svg_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
         << kW - kLeft - kRight << "\" height=\"" << kH - kTop - kBottom
         << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  double px(double v) const { return rx_.map(v, kLeft, kW - kRight); }
  double py(double v) const { return ry_.map(v, kH - kBottom, kTop); }

  void line(double x1, double y1, double x2, double y2,
            const std::string& color, double width) {
    svg_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2
         << "\" y2=\"" << y2 << "\" stroke=\"" << color << "\" stroke-width=\""
         << width << "\"/>\n";
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color) {
    svg_ << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      svg_ << px(x[i]) << ',' << py(y[i]) << ' ';
    svg_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    svg_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
         << "\" height=\"" << h << "\" fill=\"" << fill
         << "\" stroke=\"black\"/>\n";
  }

  void text(double x, double y, const std::string& s,
            const std::string& anchor, int size = 12) {
    svg_ << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\""
         << anchor << "\" font-size=\"" << size << "\">" << s << "</text>\n";
  }

  void save(const std::string& path) {
    svg_ << "</svg>\n";
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("cannot open '" + path + "' for writing");
    out << svg_.str();
  }

private:
  std::ostringstream svg_;
  Range rx_, ry_;
};

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }

  Canvas c(title, x_label, y_label);
  c.axes(nice_range(xlo, xhi), nice_range(ylo, yhi));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color =
        s.color.empty() ? kPalette[i % std::size(kPalette)] : s.color;
    c.polyline(s.x, s.y, color);
    const double lx = kW - kRight - 150, ly = kTop + 16 + 16 * double(i);
    c.line(lx, ly - 4, lx + 20, ly - 4, color, 2);
    c.text(lx + 26, ly, escape(s.label), "start");
  }
  c.save(path);
}

void write_boxplot(const std::string& path, const std::string& title,
                   const std::string& y_label,
                   const std::vector<BinStat>& bins) {
  double ylo = 0, yhi = 0;
  for (const auto& b : bins)
    if (b.count > 0) {
      ylo = std::min(ylo, b.whisker_lo);
      yhi = std::max(yhi, b.whisker_hi);
    }

  Canvas c(title, "target height (m)", y_label);
  Range rx{0, double(bins.size())};
  c.axes(rx, nice_range(ylo, yhi));

  const double zero = c.py(0);
  c.line(kLeft, zero, kW - kRight, zero, "#888888", 1);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto& b = bins[i];
    const double cx = c.px(double(i) + 0.5);
    const double half = (c.px(1) - c.px(0)) * 0.3;
    std::ostringstream label;
    if (std::isfinite(b.hi))
      label << b.lo << "-" << b.hi;
    else
      label << "&gt;" << b.lo;
    c.text(cx, kH - kBottom + 16, label.str(), "middle");
    if (b.count == 0)
      continue;
    c.line(cx, c.py(b.whisker_lo), cx, c.py(b.q1), "black", 1);
    c.line(cx, c.py(b.q3), cx, c.py(b.whisker_hi), "black", 1);
    c.line(cx - half / 2, c.py(b.whisker_lo), cx + half / 2,
           c.py(b.whisker_lo), "black", 1);
    c.line(cx - half / 2, c.py(b.whisker_hi), cx + half / 2,
           c.py(b.whisker_hi), "black", 1);
    c.rect(cx - half, c.py(b.q3), 2 * half, c.py(b.q1) - c.py(b.q3),
           "#aec7e8");
    c.line(cx - half, c.py(b.median), cx + half, c.py(b.median), "black", 2);
  }
  c.save(path);
}

} // namespace canopysr
