#include <gtest/gtest.h>

#include "mcsched/gantt.hpp"

using namespace mcsched;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

ScheduleTrace trace() {
  ScheduleTrace t;
  t.instance_ref = "inst <3> & co";
  t.events = {{2, 0, 3, Outcome::Completed, Criticality::HI, 4},
              {0, 3, 7, Outcome::Aborted, Criticality::LO, 7},
              {1, 8, 9, Outcome::Completed, Criticality::LO, 12}};
  t.speeds = {1, 1, 0.5, 1, 0.75, 1, 1, 1, 1};
  return t;
}

}  // namespace

TEST(Gantt, OneBarPerEventWithClassColors) {
  const auto svg = render_gantt_svg(trace());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "<text x=\"4\""), 3u);
  EXPECT_EQ(count(svg, "fill=\"#c0392b\"><title>job"), 1u);
  EXPECT_EQ(count(svg, "fill=\"#2e86c1\""), 3u);  // legend swatch + two bars
  EXPECT_LT(svg.find("J2 HI"), svg.find("J0 LO"));
}

TEST(Gantt, AbortedEventsAreHatchedAndMarked) {
  const auto svg = render_gantt_svg(trace());
  EXPECT_EQ(count(svg, "fill=\"url(#aborted)\""), 1u);
  EXPECT_EQ(count(svg, "stroke-dasharray"), 1u);
  EXPECT_EQ(count(svg, "&#10005;"), 1u);
}

TEST(Gantt, DegradedTicksShaded) {
  const auto svg = render_gantt_svg(trace());
  EXPECT_EQ(count(svg, "fill=\"#7f8c8d\""), 2u);
  EXPECT_NE(svg.find("speed=0.50"), std::string::npos);
  EXPECT_NE(svg.find("fill-opacity=\"0.30\""), std::string::npos);
}

TEST(Gantt, EscapesReferenceAndIsDeterministic) {
  const auto svg = render_gantt_svg(trace());
  EXPECT_NE(svg.find("inst &lt;3&gt; &amp; co"), std::string::npos);
  EXPECT_EQ(svg.find("<3>"), std::string::npos);
  EXPECT_EQ(svg, render_gantt_svg(trace()));
}

TEST(Gantt, EmptyTraceStillRenders) {
  const auto svg = render_gantt_svg(ScheduleTrace{});
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "<title>job"), 0u);
}
