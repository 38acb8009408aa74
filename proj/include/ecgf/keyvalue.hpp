#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ecgf {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses line-oriented `key = value` text. Blank lines and lines starting
/// with '#' are skipped; anything else without '=' is a malformed_row.
KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

double parse_double(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);
std::vector<double> parse_double_list(const std::string& key, const std::string& value);

}  // namespace ecgf
