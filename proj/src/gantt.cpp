#include "mcsched/gantt.hpp"

#include <algorithm>
#include <cstdio>

namespace mcsched {

namespace {

constexpr double kLeft = 56.0;
constexpr double kTop = 28.0;
constexpr double kRowHeight = 20.0;
constexpr double kBarHeight = 14.0;
constexpr double kAxisHeight = 34.0;
constexpr double kRight = 16.0;
constexpr const char* kHiColor = "#c0392b";
constexpr const char* kLoColor = "#2e86c1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
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

Tick axis_step(Tick span) {
  for (Tick step : {1, 2, 5, 10, 20, 25, 50, 100, 200, 250, 500, 1000, 2000, 5000})
    if (span / step <= 12) return step;
  return span / 10;
}

}  // namespace

std::string render_gantt_svg(const ScheduleTrace& trace) {
  std::vector<TraceEvent> events = trace.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.start < b.start; });

  Tick span = static_cast<Tick>(trace.speeds.size());
  for (const auto& e : events) span = std::max({span, e.end, e.deadline});
  span = std::max<Tick>(span, 1);

  const double scale = std::clamp(800.0 / static_cast<double>(span), 2.0, 24.0);
  const double chart_w = scale * static_cast<double>(span);
  const double chart_h = kRowHeight * static_cast<double>(std::max<std::size_t>(events.size(), 1));
  const double width = kLeft + chart_w + kRight;
  const double height = kTop + chart_h + kAxisHeight;
  auto x_of = [&](Tick t) { return kLeft + scale * static_cast<double>(t); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\" font-family=\"monospace\" font-size=\"10\">\n";
  svg += "<defs><pattern id=\"aborted\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\"><rect width=\"3\" height=\"6\" fill=\"#ffffff\" fill-opacity=\"0.55\"/>"
         "</pattern></defs>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt(kLeft) + "\" y=\"16\">" + (trace.instance_ref.empty() ? std::string("schedule") : xml_escape(trace.instance_ref)) +
         "  (HI <tspan fill=\"" + kHiColor + "\">&#9632;</tspan> LO <tspan fill=\"" + kLoColor +
         "\">&#9632;</tspan>, shaded ticks ran degraded)</text>\n";

  svg += "<g class=\"degradation\">\n";
  for (std::size_t t = 0; t < trace.speeds.size(); ++t) {
    const double s = trace.speeds[t];
    if (s >= 1.0) continue;
    svg += "<rect x=\"" + fmt(x_of(static_cast<Tick>(t))) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(scale) +
           "\" height=\"" + fmt(chart_h) + "\" fill=\"#7f8c8d\" fill-opacity=\"" + fmt(0.6 * (1.0 - s)) +
           "\"><title>t=" + std::to_string(t) + " speed=" + fmt(s) + "</title></rect>\n";
  }
  svg += "</g>\n<g class=\"jobs\">\n";
  for (std::size_t row = 0; row < events.size(); ++row) {
    const auto& e = events[row];
    const double y = kTop + kRowHeight * static_cast<double>(row) + (kRowHeight - kBarHeight) / 2.0;
    const char* color = e.criticality == Criticality::HI ? kHiColor : kLoColor;
    const double w = std::max(scale * static_cast<double>(e.end - e.start), 1.0);
    svg += "<text x=\"4\" y=\"" + fmt(y + kBarHeight - 3.0) + "\">J" + std::to_string(e.job) + " " +
           std::string(to_string(e.criticality)) + "</text>\n";
    svg += "<rect x=\"" + fmt(x_of(e.start)) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
           fmt(kBarHeight) + "\" fill=\"" + color + "\"" +
           (e.outcome == Outcome::Aborted ? " stroke=\"#000000\" stroke-dasharray=\"3,2\"" : "") + "><title>job " +
           std::to_string(e.job) + " [" + std::to_string(e.start) + ", " + std::to_string(e.end) + ") " +
           std::string(to_string(e.outcome)) + "</title></rect>\n";
    if (e.outcome == Outcome::Aborted) {
      svg += "<rect x=\"" + fmt(x_of(e.start)) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
             fmt(kBarHeight) + "\" fill=\"url(#aborted)\"/>\n";
      svg += "<text x=\"" + fmt(x_of(e.end) + 2.0) + "\" y=\"" + fmt(y + kBarHeight - 3.0) +
             "\" fill=\"#000000\">&#10005;</text>\n";
    }
    svg += "<line x1=\"" + fmt(x_of(e.deadline)) + "\" y1=\"" + fmt(y - 2.0) + "\" x2=\"" + fmt(x_of(e.deadline)) +
           "\" y2=\"" + fmt(y + kBarHeight + 2.0) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  }
  svg += "</g>\n<g class=\"axis\">\n";
  const double axis_y = kTop + chart_h + 4.0;
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(axis_y) + "\" x2=\"" + fmt(kLeft + chart_w) + "\" y2=\"" +
         fmt(axis_y) + "\" stroke=\"#000000\"/>\n";
  const Tick step = axis_step(span);
  for (Tick t = 0; t <= span; t += step) {
    svg += "<line x1=\"" + fmt(x_of(t)) + "\" y1=\"" + fmt(axis_y) + "\" x2=\"" + fmt(x_of(t)) + "\" y2=\"" +
           fmt(axis_y + 4.0) + "\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + fmt(x_of(t)) + "\" y=\"" + fmt(axis_y + 15.0) + "\" text-anchor=\"middle\">" +
           std::to_string(t) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(kLeft + chart_w) + "\" y=\"" + fmt(axis_y + 28.0) + "\" text-anchor=\"end\">time (ticks)</text>\n";
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace mcsched
