// Copyright 2026-present the trinity project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trinity/text_io.h"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trinity/common.h"

namespace trinity::text {

std::string
format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string
format_vector(std::span<const double> values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        out += format_double(values[i]);
    }
    return out;
}

std::vector<std::string_view>
split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(line.substr(start));
            return parts;
        }
        parts.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

int64_t
parse_int(std::string_view token, const std::string& what) {
    int64_t value = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
        throw_error(ErrorCode::PARSE, what + ": expected integer, got '" + std::string(token) + "'");
    }
    return value;
}

double
parse_double(std::string_view token, const std::string& what) {
    double value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
        throw_error(ErrorCode::PARSE, what + ": expected number, got '" + std::string(token) + "'");
    }
    return value;
}

std::vector<double>
parse_vector(std::string_view token, const std::string& what) {
    std::vector<double> out;
    for (auto part : split(token, ',')) {
        out.push_back(parse_double(part, what));
    }
    return out;
}

std::vector<std::string>
read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw_error(ErrorCode::IO, "cannot open '" + path + "' for reading");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    if (in.bad()) {
        throw_error(ErrorCode::IO, "read failure on '" + path + "'");
    }
    return lines;
}

void
write_file_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw_error(ErrorCode::IO, "cannot open '" + tmp.string() + "' for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw_error(ErrorCode::IO, "write failure on '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        throw_error(ErrorCode::IO, "cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
    }
}

uint64_t
fnv1a64(std::string_view data) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace trinity::text
