#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geosvg::xml {

// Element node of a parsed document. Character data is kept per element as `text`
// (direct children only, entities decoded); comments and processing instructions are dropped.
struct Element {
  std::string name;  // qualified name as written, e.g. "svg:rect"
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;

  std::string_view local_name() const;
  std::optional<std::string_view> attribute(std::string_view key) const;
  // Concatenated character data of this element and all descendants, in document order.
  std::string all_text() const;
};

// Parses a complete document and returns its root element. Throws ParseError on
// malformed input, including trailing content after the root.
Element parse(std::string_view document);

}  // namespace geosvg::xml
