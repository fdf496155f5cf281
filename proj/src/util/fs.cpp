#include "lahar/util/fs.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lahar/core/errors.hpp"

namespace lahar::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write file: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error("short write: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

bool glob_match(const std::string& pattern, const std::string& name) {
    // iterative * / ? matcher
    std::size_t p = 0, n = 0;
    std::size_t star = std::string::npos, star_n = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_n = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++star_n;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

namespace {

long long first_number(const std::string& name) {
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(name[i]))) {
            long long v = 0;
            while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
                v = v * 10 + (name[i] - '0');
                ++i;
            }
            return v;
        }
    }
    return -1;
}

} // namespace

std::vector<fs::path> list_matching(const fs::path& dir, const std::string& glob) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string name = entry.path().filename().string();
        if (glob_match(glob, name)) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        const std::string an = a.filename().string();
        const std::string bn = b.filename().string();
        long long ai = first_number(an);
        long long bi = first_number(bn);
        if (ai != bi) {
            return ai < bi;
        }
        return an < bn;
    });
    return out;
}

} // namespace lahar::util
