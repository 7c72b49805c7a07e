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

#include "trinity/kv_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trinity/text_io.h"

namespace trinity {

namespace {

std::string
trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void
bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw_error(ErrorCode::USAGE, "config field '" + key + "': expected " + expected + ", got '" +
                                      value + "'");
}

}  // namespace

KeyValueConfig
KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw_error(ErrorCode::USAGE, origin + ":" + std::to_string(line_no) +
                                              ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw_error(ErrorCode::USAGE, origin + ":" + std::to_string(line_no) + ": empty key");
        }
        if (cfg.values_.contains(key)) {
            throw_error(ErrorCode::USAGE, origin + ":" + std::to_string(line_no) +
                                              ": duplicate key '" + key + "'");
        }
        cfg.values_[key] = value;
        cfg.lines_[key] = line_no;
    }
    return cfg;
}

KeyValueConfig
KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_error(ErrorCode::USAGE, "cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const std::string*
KeyValueConfig::lookup(const std::string& key) const {
    consumed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string>
KeyValueConfig::get_string(const std::string& key) const {
    if (const auto* v = lookup(key)) {
        return *v;
    }
    return std::nullopt;
}

void
KeyValueConfig::read(const std::string& key, size_t& out) const {
    if (const auto* v = lookup(key)) {
        uint64_t parsed = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
        if (ec != std::errc() || ptr != v->data() + v->size() || v->empty()) {
            bad_value(key, *v, "a non-negative integer");
        }
        out = static_cast<size_t>(parsed);
    }
}

void
KeyValueConfig::read(const std::string& key, int64_t& out) const {
    if (const auto* v = lookup(key)) {
        int64_t parsed = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
        if (ec != std::errc() || ptr != v->data() + v->size() || v->empty()) {
            bad_value(key, *v, "an integer");
        }
        out = parsed;
    }
}

void
KeyValueConfig::read(const std::string& key, double& out) const {
    if (const auto* v = lookup(key)) {
        double parsed = 0.0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
        if (ec != std::errc() || ptr != v->data() + v->size() || v->empty() ||
            !std::isfinite(parsed)) {
            bad_value(key, *v, "a finite number");
        }
        out = parsed;
    }
}

void
KeyValueConfig::read(const std::string& key, bool& out) const {
    if (const auto* v = lookup(key)) {
        if (*v == "true" || *v == "1") {
            out = true;
        } else if (*v == "false" || *v == "0") {
            out = false;
        } else {
            bad_value(key, *v, "true or false");
        }
    }
}

void
KeyValueConfig::read(const std::string& key, std::string& out) const {
    if (const auto* v = lookup(key)) {
        out = *v;
    }
}

void
KeyValueConfig::reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.contains(key)) {
            unknown += (unknown.empty() ? "" : ", ") + key + " (line " +
                       std::to_string(lines_.contains(key) ? lines_.at(key) : 0) + ")";
        }
    }
    if (!unknown.empty()) {
        throw_error(ErrorCode::USAGE, origin_ + ": unknown config field(s): " + unknown);
    }
}

std::string
KeyValueConfig::canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key + "=" + value + "\n";
    }
    return out;
}

}  // namespace trinity
