#include "geosvg/text_metrics.hpp"

#include <cmath>
#include <cstdint>
#include <json.hpp>

#include "geosvg/errors.hpp"
#include "geosvg/utf8.hpp"

namespace geosvg {
namespace {

// Advance widths in 1/1000 em for U+0020..U+007E (standard Helvetica metrics, shared by Arial).
constexpr int kHelveticaWidths[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,  //  !"#$%&'()*+,-./
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,  // 0-9 :;<=>?
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // @A-O
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,  // P-Z [\]^_
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,  // `a-o
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584,       // p-z {|}~
};

char32_t parse_codepoint_key(const std::string& key) {
  if (key.size() > 2 && (key.starts_with("U+") || key.starts_with("u+"))) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(key.substr(2), &used, 16);
    } catch (const std::exception&) {
      throw FormatError("font model: bad codepoint key '" + key + "'");
    }
    if (used != key.size() - 2 || v > 0x10FFFF) throw FormatError("font model: bad codepoint key '" + key + "'");
    return static_cast<char32_t>(v);
  }
  const std::u32string cps = decode_utf8(key);
  if (cps.size() != 1) throw FormatError("font model: advance key must be one character: '" + key + "'");
  return cps.front();
}

double read_number(const nlohmann::json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number()) throw FormatError(std::string("font model: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::string_view to_string(TextAnchor anchor) {
  switch (anchor) {
    case TextAnchor::start: return "start";
    case TextAnchor::middle: return "middle";
    case TextAnchor::end: return "end";
  }
  return "start";
}

TextAnchor parse_text_anchor(std::string_view s, bool* ok) {
  if (ok) *ok = true;
  if (s == "middle") return TextAnchor::middle;
  if (s == "end") return TextAnchor::end;
  if (s != "start" && ok) *ok = false;
  return TextAnchor::start;
}

const FontModel& FontModel::builtin() {
  static const FontModel model{};
  return model;
}

const FontModel& FontModel::arial_like() {
  static const FontModel model = [] {
    FontModel m;
    for (int i = 0; i < 95; ++i) m.advances[static_cast<char32_t>(0x20 + i)] = kHelveticaWidths[i] / 1000.0;
    return m;
  }();
  return model;
}

double FontModel::advance(char32_t cp) const {
  const auto it = advances.find(cp);
  return it == advances.end() ? default_advance : it->second;
}

void FontModel::validate() const {
  if (!(units_per_em > 0)) throw FormatError("font model: units_per_em must be positive");
  if (!(ascent > 0)) throw FormatError("font model: ascent must be positive");
  if (!(descent >= 0)) throw FormatError("font model: descent must be non-negative");
  if (!(ascent + descent <= 1.25)) throw FormatError("font model: ascent + descent exceeds 1.25 em");
  if (!(default_advance > 0 && default_advance <= 1)) throw FormatError("font model: default_advance must lie in (0, 1]");
  for (const auto& [cp, adv] : advances) {
    if (!(adv >= 0) || !std::isfinite(adv)) {
      throw FormatError("font model: negative or non-finite advance for U+" + std::to_string(cp));
    }
  }
}

double text_width(std::string_view utf8, double font_size, const FontModel& font) {
  double em = 0.0;
  for (char32_t cp : decode_utf8(utf8)) em += font.advance(cp);
  return em * font_size;
}

TextBox measure_text(std::string_view utf8, double font_size, Point anchor_point, TextAnchor anchor,
                     const FontModel& font) {
  const double width = text_width(utf8, font_size, font);
  double left = anchor_point.x;
  if (anchor == TextAnchor::middle) left -= width / 2.0;
  if (anchor == TextAnchor::end) left -= width;
  const double top = anchor_point.y - font.ascent * font_size;
  return {Rect{left, top, width, (font.ascent + font.descent) * font_size}, anchor_point.y, anchor};
}

FontModel load_font_model(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("font model: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("font model: document must be an object");

  const std::string base = doc.value("base", std::string("default"));
  FontModel model;
  if (base == "arial") {
    model = FontModel::arial_like();
  } else if (base != "default") {
    throw FormatError("font model: unknown base '" + base + "'");
  }
  model.units_per_em = read_number(doc, "units_per_em", model.units_per_em);
  model.default_advance = read_number(doc, "default_advance", model.default_advance);
  model.ascent = read_number(doc, "ascent", model.ascent);
  model.descent = read_number(doc, "descent", model.descent);

  const auto read_table = [&](const char* key, double scale) {
    if (!doc.contains(key)) return;
    const auto& table = doc.at(key);
    if (!table.is_object()) throw FormatError(std::string("font model: '") + key + "' must be an object");
    for (const auto& [k, v] : table.items()) {
      if (!v.is_number()) throw FormatError("font model: advance for '" + k + "' must be a number");
      model.advances[parse_codepoint_key(k)] = v.get<double>() * scale;
    }
  };
  read_table("advances", 1.0);
  if (!(model.units_per_em > 0)) throw FormatError("font model: units_per_em must be positive");
  read_table("advances_units", 1.0 / model.units_per_em);

  model.validate();
  return model;
}

}  // namespace geosvg
