#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lahar::util {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe a truncated file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Files in `dir` whose name matches a glob with `*` and `?` wildcards,
/// sorted by the first integer embedded in the filename (then by name).
std::vector<std::filesystem::path> list_matching(const std::filesystem::path& dir,
                                                 const std::string& glob);

bool glob_match(const std::string& pattern, const std::string& name);

} // namespace lahar::util
