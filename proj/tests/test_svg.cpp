#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/svg_scene.hpp"

using namespace geosvg;

namespace {

std::vector<const SvgElement*> geometric(const SvgScene& s) {
  std::vector<const SvgElement*> out;
  for (const SvgElement& e : s.elements) {
    if (e.has_geometry()) out.push_back(&e);
  }
  return out;
}

void expect_rect_near(const Rect& a, const Rect& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.h, b.h, tol);
}

}  // namespace

TEST(ParseSvg, SingleRect) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><rect x="10" y="20" width="100" height="50"/></svg>)x");
  ASSERT_TRUE(s.parse_ok);
  EXPECT_EQ(s.canvas_width, 800);
  EXPECT_EQ(s.canvas_height, 600);
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0]->kind, ElementKind::rect);
  EXPECT_EQ(g[0]->global_bbox, (Rect{10, 20, 100, 50}));
}

TEST(ParseSvg, TruncatedIsParseError) { EXPECT_THROW(parse_svg(R"x(<svg><rect x="1")x"), ParseError); }

TEST(ParseSvg, GroupTranslate) {
  const SvgScene s = parse_svg(
      R"x(<svg width="800" height="600"><g transform="translate(10,5)"><rect x="0" y="0" width="100" height="50"/></g></svg>)x");
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0]->global_bbox, (Rect{10, 5, 100, 50}));
}

TEST(ParseSvg, NestedTransformsCompose) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600">
    <g transform="translate(100 0)"><g transform="scale(2)"><rect x="1" y="2" width="3" height="4"/></g></g></svg>)x");
  EXPECT_EQ(geometric(s)[0]->global_bbox, (Rect{102, 4, 6, 8}));
}

TEST(ParseSvg, ViewBoxScalesToViewport) {
  const SvgScene s = parse_svg(
      R"x(<svg width="800" height="600" viewBox="0 0 400 300"><rect x="10" y="10" width="100" height="50"/></svg>)x");
  EXPECT_EQ(geometric(s)[0]->global_bbox, (Rect{20, 20, 200, 100}));
}

TEST(ParseSvg, MissingSizeFallsBackToViewBoxThenDefault) {
  const SvgScene vb = parse_svg(R"x(<svg viewBox="0 0 640 480"><rect width="1" height="1"/></svg>)x");
  EXPECT_EQ(vb.canvas_width, 640);
  EXPECT_EQ(vb.canvas_height, 480);
  const SvgScene none = parse_svg(R"x(<svg><rect width="1" height="1"/></svg>)x");
  EXPECT_EQ(none.canvas_width, 800);
  EXPECT_EQ(none.canvas_height, 600);
}

TEST(ParseSvg, PxSuffixAcceptedOtherUnitsRejected) {
  EXPECT_NO_THROW(parse_svg(R"x(<svg width="800px" height="600px"><rect x="1px" width="2" height="2"/></svg>)x"));
  EXPECT_THROW(parse_svg(R"x(<svg width="800" height="600"><rect x="1em" width="2" height="2"/></svg>)x"), ParseError);
  EXPECT_THROW(parse_svg(R"x(<svg width="80%" height="600"/>)x"), ParseError);
}

TEST(ParseSvg, NonSvgRootIsParseError) { EXPECT_THROW(parse_svg("<html/>"), ParseError); }

TEST(ParseSvg, LineEndpoints) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><line x1="200" y1="140" x2="350" y2="140"/></svg>)x");
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 1u);
  ASSERT_TRUE(g[0]->endpoints);
  EXPECT_EQ(g[0]->endpoints->start, (Point{200, 140}));
  EXPECT_EQ(g[0]->endpoints->end, (Point{350, 140}));
  EXPECT_EQ(g[0]->global_bbox, (Rect{200, 140, 150, 0}));
}

TEST(ParseSvg, PolylineEndpoints) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><polyline points="0,0 10,5 20,0"/></svg>)x");
  const auto g = geometric(s);
  ASSERT_TRUE(g[0]->endpoints);
  EXPECT_EQ(g[0]->endpoints->end, (Point{20, 0}));
  EXPECT_EQ(g[0]->global_bbox, (Rect{0, 0, 20, 5}));
}

TEST(ParseSvg, EndpointsOnlyOnConnectors) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><rect width="4" height="4"/><circle r="3"/>
    <path d="M0 0 L5 5"/><text x="1" y="10">hi</text></svg>)x");
  for (const SvgElement& e : s.elements) EXPECT_EQ(e.endpoints.has_value(), e.is_connector()) << e.tag;
}

TEST(ParseSvg, CircleAndEllipse) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><circle cx="50" cy="60" r="10"/>
    <ellipse cx="0" cy="0" rx="20" ry="10" transform="rotate(90)"/></svg>)x");
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0]->global_bbox, (Rect{40, 50, 20, 20}));
  expect_rect_near(g[1]->global_bbox, Rect{-10, -20, 20, 40}, 1e-9);
}

TEST(ParseSvg, TextMeasuredWithBuiltinFont) {
  const SvgScene s = parse_svg(
      R"x(<svg width="800" height="600"><text x="100" y="100" font-size="16" text-anchor="middle">AB</text></svg>)x");
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 1u);
  ASSERT_TRUE(g[0]->text_box);
  EXPECT_EQ(g[0]->text_box->bbox, (Rect{92, 87.2, 16, 16}));
  EXPECT_EQ(*g[0]->text_content, "AB");
}

TEST(ParseSvg, InheritedFontSizeAndStyle) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><g style="font-size: 10px"><text x="0" y="20">ABCD</text></g></svg>)x");
  EXPECT_EQ(geometric(s)[0]->text_box->bbox.w, 20);
}

TEST(ParseSvg, TspanFoldsIntoText) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><text x="0" y="20" font-size="10">A<tspan>BC</tspan></text></svg>)x");
  const auto g = geometric(s);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(*g[0]->text_content, "ABC");
}

TEST(ParseSvg, DefsAndMarkersSkipped) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><defs><marker id="m"><path d="M0 0 L10 5 z"/></marker>
    <rect width="999" height="999"/></defs><line x1="0" y1="0" x2="5" y2="0" marker-end="url(#m)"/></svg>)x");
  ASSERT_EQ(geometric(s).size(), 1u);
  EXPECT_EQ(geometric(s)[0]->kind, ElementKind::line);
}

TEST(ParseSvg, HiddenElementsHaveNoGeometry) {
  const SvgScene s = parse_svg(R"x(<svg width="800" height="600"><g display="none"><rect width="5" height="5"/></g>
    <rect width="5" height="5" visibility="hidden"/><rect width="5" height="5" style="display:none"/></svg>)x");
  EXPECT_TRUE(geometric(s).empty());
}

TEST(ParseSvg, UnsupportedContentFlagsScene) {
  for (const char* body : {R"x(<image href="a.png" width="5" height="5"/>)x", R"x(<rect width="5" height="5" transform="skewX(10)"/>)x",
                           R"x(<path d="M0 0 A 5 5 0 0 1 10 10"/>)x", R"x(<rect width="-5" height="5"/>)x", R"x(<use href="#a"/>)x"}) {
    const SvgScene s = parse_svg(std::string(R"x(<svg width="800" height="600">)x") + body + "</svg>");
    EXPECT_FALSE(s.geometry_ok()) << body;
    EXPECT_FALSE(s.diagnostics().empty()) << body;
  }
}

TEST(ParseTransform, FunctionsAndErrors) {
  EXPECT_EQ(parse_transform("translate(3)").apply(Point{1, 1}), (Point{4, 1}));
  EXPECT_EQ(parse_transform("scale(2, 3)").apply(Point{1, 1}), (Point{2, 3}));
  EXPECT_EQ(parse_transform("matrix(1 0 0 1 5 6)").apply(Point{0, 0}), (Point{5, 6}));
  const Point r = parse_transform("rotate(90 10 10)").apply(Point{20, 10});
  EXPECT_NEAR(r.x, 10, 1e-12);
  EXPECT_NEAR(r.y, 20, 1e-12);
  EXPECT_THROW(parse_transform("skewX(30)"), PathError);
  EXPECT_THROW(parse_transform("translate(1"), PathError);
}

// Nested group transforms resolve to the same global boxes as the equivalent flattened matrix.
TEST(ParseSvg, FlattenedRoundTripProperty) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-3, 3), pos(0, 300), size(1, 80);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AffineTransform> chain;
    for (int d = 0; d < 1 + trial % 4; ++d) {
      switch (gen() % 3) {
        case 0: chain.push_back(AffineTransform::translate(u(gen) * 10, u(gen) * 10)); break;
        case 1: chain.push_back(AffineTransform::scale(0.5 + std::abs(u(gen)), 0.5 + std::abs(u(gen)))); break;
        default: chain.push_back(AffineTransform::rotate(u(gen) * 60, {pos(gen), pos(gen)})); break;
      }
    }
    const double x = pos(gen), y = pos(gen), w = size(gen), h = size(gen);
    std::ostringstream local;
    local << "<rect x=\"" << format_number(x) << "\" y=\"" << format_number(y) << "\" width=\"" << format_number(w)
          << "\" height=\"" << format_number(h) << "\"/><line x1=\"" << format_number(x) << "\" y1=\""
          << format_number(y) << "\" x2=\"" << format_number(x + w) << "\" y2=\"" << format_number(y + h) << "\"/>";
    std::string nested = local.str();
    AffineTransform flat;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const AffineTransform& t = *it;
      nested = "<g transform=\"matrix(" + format_number(t.a) + " " + format_number(t.b) + " " + format_number(t.c) +
               " " + format_number(t.d) + " " + format_number(t.e) + " " + format_number(t.f) + ")\">" + nested + "</g>";
    }
    for (const AffineTransform& t : chain) flat = compose_transforms(flat, t);
    const std::string flat_doc = "<svg width=\"800\" height=\"600\"><g transform=\"matrix(" + format_number(flat.a) +
                                 " " + format_number(flat.b) + " " + format_number(flat.c) + " " +
                                 format_number(flat.d) + " " + format_number(flat.e) + " " + format_number(flat.f) +
                                 ")\">" + local.str() + "</g></svg>";
    const SvgScene nested_scene = parse_svg("<svg width=\"800\" height=\"600\">" + nested + "</svg>");
    const SvgScene flat_scene = parse_svg(flat_doc);
    const auto a = geometric(nested_scene);
    const auto b = geometric(flat_scene);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) expect_rect_near(a[i]->global_bbox, b[i]->global_bbox, 1e-9);
  }
}
