#ifndef RELAYSIM_SVGPLOT_HPP
#define RELAYSIM_SVGPLOT_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/phasor.hpp"
#include "relaysim/relay.hpp"
#include "relaysim/textio.hpp"

namespace relaysim {

/// One impedance sample to draw, tagged with its zone classification
/// (0 = outside, 1..3 = zones).
struct PlotPoint {
  Complex z{};
  int zone = 0;
};

namespace svgdetail {

inline const char* zone_color(int zone) {
  switch (zone) {
    case 1: return "#1a7f37";  // green
    case 2: return "#1f6feb";  // blue
    case 3: return "#b08800";  // amber
    default: return "#c0392b"; // red: outside every zone
  }
}

/// Largest "nice" (1/2/5 x 10^k) step not exceeding span / min_ticks.
inline double nice_step(double span, int min_ticks) {
  const double raw = span / static_cast<double>(min_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0}) {
    if (m * mag <= raw) return m * mag;
  }
  return mag;
}

}  // namespace svgdetail

/// Deterministic R-X plane plot: the three mho circles of the settings in
/// force plus the locus of measured impedances colored by classification.
/// Fixed 800x800 canvas, equal scale on both axes, self-contained SVG.
inline std::string render_rx_svg(const ZoneSettings& settings,
                                 const std::vector<PlotPoint>& points) {
  const double canvas = 800.0;
  const double pad = 70.0;
  const double plot = canvas - 2.0 * pad;

  struct Circle {
    double cx, cy, r;
    int zone;
  };
  std::vector<Circle> circles;
  const Complex reaches[3] = {settings.z1_reach, settings.z2_reach,
                              settings.z3_reach};
  for (int i = 0; i < 3; ++i) {
    circles.push_back(Circle{reaches[i].real() / 2.0, reaches[i].imag() / 2.0,
                             std::abs(reaches[i]) / 2.0, i + 1});
  }

  double rmin = 0.0, rmax = 0.0, xmin = 0.0, xmax = 0.0;
  for (const Circle& c : circles) {
    rmin = std::min(rmin, c.cx - c.r);
    rmax = std::max(rmax, c.cx + c.r);
    xmin = std::min(xmin, c.cy - c.r);
    xmax = std::max(xmax, c.cy + c.r);
  }
  for (const PlotPoint& p : points) {
    rmin = std::min(rmin, p.z.real());
    rmax = std::max(rmax, p.z.real());
    xmin = std::min(xmin, p.z.imag());
    xmax = std::max(xmax, p.z.imag());
  }
  const double margin = 0.08 * std::max(rmax - rmin, xmax - xmin);
  rmin -= margin;
  rmax += margin;
  xmin -= margin;
  xmax += margin;

  // Equal scale: fit the larger span, center the smaller one.
  const double span = std::max(rmax - rmin, xmax - xmin);
  const double scale = plot / span;
  const double r0 = (rmin + rmax) / 2.0 - span / 2.0;
  const double x0 = (xmin + xmax) / 2.0 - span / 2.0;

  auto px = [&](double r) { return pad + (r - r0) * scale; };
  auto py = [&](double x) { return canvas - pad - (x - x0) * scale; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
       "height=\"800\" viewBox=\"0 0 800 800\">\n";
  s += "<rect width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";

  // Grid and tick labels on nice steps.
  const double step = svgdetail::nice_step(span, 6);
  const double tick0_r = std::ceil(r0 / step) * step;
  const double tick0_x = std::ceil(x0 / step) * step;
  s += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t = tick0_r; t <= r0 + span + 1e-9 * span; t += step) {
    s += "<line x1=\"" + fmt2(px(t)) + "\" y1=\"" + fmt2(py(x0)) +
         "\" x2=\"" + fmt2(px(t)) + "\" y2=\"" + fmt2(py(x0 + span)) +
         "\"/>\n";
  }
  for (double t = tick0_x; t <= x0 + span + 1e-9 * span; t += step) {
    s += "<line x1=\"" + fmt2(px(r0)) + "\" y1=\"" + fmt2(py(t)) +
         "\" x2=\"" + fmt2(px(r0 + span)) + "\" y2=\"" + fmt2(py(t)) +
         "\"/>\n";
  }
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#444444\">\n";
  for (double t = tick0_r; t <= r0 + span + 1e-9 * span; t += step) {
    s += "<text x=\"" + fmt2(px(t)) + "\" y=\"" + fmt2(canvas - pad + 18.0) +
         "\" text-anchor=\"middle\">" + fmt_tick(t) + "</text>\n";
  }
  for (double t = tick0_x; t <= x0 + span + 1e-9 * span; t += step) {
    s += "<text x=\"" + fmt2(pad - 8.0) + "\" y=\"" + fmt2(py(t) + 4.0) +
         "\" text-anchor=\"end\">" + fmt_tick(t) + "</text>\n";
  }
  s += "</g>\n";

  // Axes through the origin.
  s += "<g stroke=\"#888888\" stroke-width=\"1.5\">\n";
  s += "<line x1=\"" + fmt2(px(r0)) + "\" y1=\"" + fmt2(py(0.0)) +
       "\" x2=\"" + fmt2(px(r0 + span)) + "\" y2=\"" + fmt2(py(0.0)) +
       "\"/>\n";
  s += "<line x1=\"" + fmt2(px(0.0)) + "\" y1=\"" + fmt2(py(x0)) +
       "\" x2=\"" + fmt2(px(0.0)) + "\" y2=\"" + fmt2(py(x0 + span)) +
       "\"/>\n";
  s += "</g>\n";

  // Mho circles, outermost first so the smaller zones stay visible.
  for (int i = 2; i >= 0; --i) {
    const Circle& c = circles[static_cast<std::size_t>(i)];
    s += "<circle id=\"zone" + std::to_string(c.zone) + "-circle\" cx=\"" +
         fmt2(px(c.cx)) + "\" cy=\"" + fmt2(py(c.cy)) + "\" r=\"" +
         fmt2(c.r * scale) + "\" fill=\"none\" stroke=\"" +
         svgdetail::zone_color(c.zone) + "\" stroke-width=\"2\"/>\n";
  }

  // Impedance locus: a faint connecting path plus classified markers.
  if (points.size() > 1) {
    s += "<path fill=\"none\" stroke=\"#999999\" stroke-width=\"1\" d=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      s += (i == 0 ? "M" : " L");
      s += fmt2(px(points[i].z.real())) + " " + fmt2(py(points[i].z.imag()));
    }
    s += "\"/>\n";
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PlotPoint& p = points[i];
    s += "<circle class=\"pt zone-" + std::to_string(p.zone) + "\" cx=\"" +
         fmt2(px(p.z.real())) + "\" cy=\"" + fmt2(py(p.z.imag())) +
         "\" r=\"3\" fill=\"" + svgdetail::zone_color(p.zone) + "\"/>\n";
  }

  // Labels and legend.
  s += "<g font-family=\"sans-serif\" font-size=\"14\" fill=\"#222222\">\n";
  s += "<text x=\"" + fmt2(canvas / 2.0) + "\" y=\"" + fmt2(canvas - 20.0) +
       "\" text-anchor=\"middle\">R (&#937;)</text>\n";
  s += "<text x=\"20\" y=\"" + fmt2(canvas / 2.0) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
       fmt2(canvas / 2.0) + ")\">X (&#937;)</text>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  const char* names[4] = {"outside", "zone 1", "zone 2", "zone 3"};
  const int order[4] = {1, 2, 3, 0};
  for (int row = 0; row < 4; ++row) {
    const int zone = order[row];
    const double yy = pad + 10.0 + 18.0 * row;
    s += "<rect x=\"" + fmt2(canvas - pad - 110.0) + "\" y=\"" +
         fmt2(yy - 9.0) + "\" width=\"10\" height=\"10\" fill=\"" +
         svgdetail::zone_color(zone) + "\"/>\n";
    s += "<text x=\"" + fmt2(canvas - pad - 95.0) + "\" y=\"" + fmt2(yy) +
         "\" fill=\"#222222\">" + names[zone == 0 ? 0 : zone] + "</text>\n";
  }
  s += "</g>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace relaysim

#endif  // RELAYSIM_SVGPLOT_HPP
