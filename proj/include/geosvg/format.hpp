#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace geosvg {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

std::string xml_escape(std::string_view s);

// Writes to a sibling temporary file and renames it into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace geosvg
