// Copyright 2026 The QCBNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qcbnn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qcbnn {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

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

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::pair<double, double> padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void header(std::ostringstream& os, const PlotSpec& spec, const Frame& f, bool x_ticks = true) {
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(spec.title) << "</text>\n";
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  os << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\"" << b - t
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    if (x_ticks) {
      os << "<text x=\"" << f.px(xv) << "\" y=\"" << b + 16
         << "\" text-anchor=\"middle\" font-size=\"11\">" << xv << "</text>\n";
    }
    os << "<text x=\"" << l - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << yv << "</text>\n";
    os << "<line x1=\"" << l << "\" y1=\"" << f.py(yv) << "\" x2=\"" << r << "\" y2=\"" << f.py(yv)
       << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"" << (l + r) / 2 << "\" y=\"" << kHeight - 18
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << (t + b) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << (t + b) / 2 << ")\">" << escape(spec.y_label) << "</text>\n";
}

}  // namespace

BoxStats box_stats(std::string label, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats needs at least one value");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return BoxStats{std::move(label), values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
                  values.back(), values.size()};
}

std::string svg_line_plot(const PlotSpec& spec, std::span<const PlotSeries> series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.spread.empty() && s.spread.size() != s.y.size())) {
      throw std::invalid_argument("plot series '" + s.name + "' has mismatched lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = s.spread.empty() ? 0.0 : s.spread[i];
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i] - e);
      yhi = std::max(yhi, s.y[i] + e);
    }
  }
  const auto [x0, x1] = spec.x_range.value_or(padded(xlo, xhi));
  const auto [y0, y1] = spec.y_range.value_or(padded(ylo, yhi));
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  header(os, spec, f);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    if (!s.spread.empty() && !s.x.empty()) {
      os << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << f.px(s.x[i]) << ',' << f.py(s.y[i] + s.spread[i]) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) os << f.px(s.x[i]) << ',' << f.py(s.y[i] - s.spread[i]) << ' ';
      os << "\"/>\n";
    }
    if (s.markers_only) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << "<circle cx=\"" << f.px(s.x[i]) << "\" cy=\"" << f.py(s.y[i]) << "\" r=\"4\" fill=\""
           << colour << "\"/>\n";
      }
    } else if (!s.x.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
      os << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<rect x=\"" << kWidth - kRight + 10 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"10\" fill=\""
       << colour << "\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 27 << "\" y=\"" << ly << "\" font-size=\"10\">" << escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_box_plot(const PlotSpec& spec, std::span<const BoxStats> boxes) {
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& b : boxes) {
    ylo = std::min(ylo, b.min);
    yhi = std::max(yhi, b.max);
  }
  const double n = static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
  const auto [y0, y1] = spec.y_range.value_or(padded(ylo, yhi));
  const Frame f{0.0, n, y0, y1};
  std::ostringstream os;
  header(os, spec, f, false);
  const double w = (f.px(1.0) - f.px(0.0)) * 0.5;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const auto& b = boxes[k];
    const double cx = f.px(static_cast<double>(k) + 0.5);
    const char* colour = kPalette[k % std::size(kPalette)];
    os << "<line x1=\"" << cx << "\" y1=\"" << f.py(b.min) << "\" x2=\"" << cx << "\" y2=\"" << f.py(b.max)
       << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << cx - w / 2 << "\" y=\"" << f.py(b.q3) << "\" width=\"" << w << "\" height=\""
       << std::max(f.py(b.q1) - f.py(b.q3), 1.0) << "\" fill=\"" << colour
       << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << cx - w / 2 << "\" y1=\"" << f.py(b.median) << "\" x2=\"" << cx + w / 2
       << "\" y2=\"" << f.py(b.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<rect x=\"" << kWidth - kRight + 10 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"10\" fill=\""
       << colour << "\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 27 << "\" y=\"" << ly << "\" font-size=\"10\">" << escape(b.label)
       << " (n=" << b.n << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qcbnn
