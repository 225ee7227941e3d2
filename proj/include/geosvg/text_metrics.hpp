#pragma once

#include <map>
#include <string>
#include <string_view>

#include "geosvg/geometry.hpp"

namespace geosvg {

enum class TextAnchor { start, middle, end };

std::string_view to_string(TextAnchor anchor);
// Accepts the SVG text-anchor keywords; anything else yields std::nullopt semantics via `ok`.
TextAnchor parse_text_anchor(std::string_view s, bool* ok = nullptr);

// Deterministic stand-in for browser font metrics. All lengths are in em.
struct FontModel {
  double units_per_em = 1000.0;
  double default_advance = 0.5;
  std::map<char32_t, double> advances;
  double ascent = 0.8;
  double descent = 0.2;

  // Uniform 0.5 em advances, ascent 0.8, descent 0.2.
  static const FontModel& builtin();
  // Helvetica/Arial advance widths for printable ASCII on top of the builtin vertical metrics.
  static const FontModel& arial_like();

  double advance(char32_t cp) const;
  // Throws FormatError when an invariant does not hold.
  void validate() const;
};

struct TextBox {
  Rect bbox;
  double baseline_y = 0.0;
  TextAnchor anchor = TextAnchor::start;
};

// `anchor_point.y` is the baseline. Empty text yields a zero-width box at the anchor.
TextBox measure_text(std::string_view utf8, double font_size, Point anchor_point, TextAnchor anchor,
                     const FontModel& font = FontModel::builtin());

double text_width(std::string_view utf8, double font_size, const FontModel& font = FontModel::builtin());

// Reads a JSON font description. Missing fields fall back to the model named by "base"
// ("default" or "arial", default "default"). Advances may be given in em ("advances") or in
// font units ("advances_units", divided by units_per_em). Keys are single characters or "U+XXXX".
FontModel load_font_model(std::string_view json_text);

}  // namespace geosvg
