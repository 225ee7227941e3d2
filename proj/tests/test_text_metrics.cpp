#include <gtest/gtest.h>

#include <random>
#include <string>

#include "geosvg/errors.hpp"
#include "geosvg/text_metrics.hpp"

using namespace geosvg;

TEST(MeasureText, StartAnchor) {
  const TextBox b = measure_text("AB", 16, {100, 100}, TextAnchor::start);
  EXPECT_EQ(b.bbox, (Rect{100, 87.2, 16, 16}));
  EXPECT_EQ(b.baseline_y, 100);
}

TEST(MeasureText, EmptyTextIsZeroWidth) {
  const TextBox b = measure_text("", 16, {50, 50}, TextAnchor::start);
  EXPECT_DOUBLE_EQ(b.bbox.x, 50);
  EXPECT_DOUBLE_EQ(b.bbox.y, 37.2);
  EXPECT_DOUBLE_EQ(b.bbox.w, 0);
  EXPECT_DOUBLE_EQ(b.bbox.h, 16);
}

TEST(MeasureText, MiddleAndEndAnchors) {
  EXPECT_EQ(measure_text("AB", 16, {100, 100}, TextAnchor::middle).bbox, (Rect{92, 87.2, 16, 16}));
  EXPECT_EQ(measure_text("AB", 16, {100, 100}, TextAnchor::end).bbox, (Rect{84, 87.2, 16, 16}));
}

TEST(MeasureText, CountsCodepointsNotBytes) {
  EXPECT_DOUBLE_EQ(text_width("\xC3\xA9t\xC3\xA9", 10), 15);
}

TEST(FontModel, BuiltinConstants) {
  const FontModel& f = FontModel::builtin();
  EXPECT_EQ(f.default_advance, 0.5);
  EXPECT_EQ(f.ascent, 0.8);
  EXPECT_EQ(f.descent, 0.2);
  EXPECT_NO_THROW(FontModel::arial_like().validate());
}

TEST(FontModel, LoadOverridesAdvance) {
  const FontModel f = load_font_model(R"({"advances": {"W": 0.9}})");
  EXPECT_DOUBLE_EQ(text_width("W", 10, f), 9);
  EXPECT_DOUBLE_EQ(text_width("A", 10, f), 5);
  const FontModel g = load_font_model(R"({"units_per_em": 2048, "advances_units": {"U+0057": 1024}})");
  EXPECT_DOUBLE_EQ(text_width("W", 10, g), 5);
}

TEST(FontModel, RejectsInvalidModels) {
  EXPECT_THROW(load_font_model(R"({"ascent": -1})"), FormatError);
  EXPECT_THROW(load_font_model(R"({"ascent": 1.2, "descent": 0.2})"), FormatError);
  EXPECT_THROW(load_font_model(R"({"default_advance": 0})"), FormatError);
  EXPECT_THROW(load_font_model(R"({"advances": {"W": -0.1}})"), FormatError);
  EXPECT_THROW(load_font_model("not json"), FormatError);
  EXPECT_THROW(load_font_model(R"({"base": "comic"})"), FormatError);
}

namespace {
std::string random_text(std::mt19937_64& g, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>(' ' + g() % 95));
  return s;
}
}  // namespace

TEST(MeasureText, Properties) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> size(6, 40);
  for (const FontModel* font : {&FontModel::builtin(), &FontModel::arial_like()}) {
    for (int i = 0; i < 300; ++i) {
      const std::string s = random_text(g, g() % 20);
      const std::string longer = s + random_text(g, 1);
      const double fs = size(g);
      EXPECT_GE(text_width(longer, fs, *font), text_width(s, fs, *font));
      EXPECT_NEAR(text_width(s, 2 * fs, *font), 2 * text_width(s, fs, *font), 1e-9);
      const Point a{size(g) * 10, size(g) * 10};
      const TextBox m = measure_text(s, fs, a, TextAnchor::middle, *font);
      EXPECT_NEAR(a.x - m.bbox.left(), m.bbox.right() - a.x, 1e-9);
      if (!s.empty()) EXPECT_NEAR(m.bbox.h, (font->ascent + font->descent) * fs, 1e-9);
    }
  }
}
