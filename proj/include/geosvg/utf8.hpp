#pragma once

#include <string>
#include <string_view>

namespace geosvg {

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode_utf8(std::string_view s);

}  // namespace geosvg
