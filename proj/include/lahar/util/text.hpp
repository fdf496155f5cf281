#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lahar::util {

std::string trim(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

std::string to_lower(std::string_view s);

/// Replaces every "{{name}}" with its value; unknown placeholders are left
/// untouched so template typos surface in the rendered text.
std::string render_template(std::string_view tpl,
                            const std::vector<std::pair<std::string, std::string>>& values);

} // namespace lahar::util
