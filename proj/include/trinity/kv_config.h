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

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "trinity/common.h"

namespace trinity {

/// Flat `key = value` configuration. Blank lines and `#` comments are
/// ignored. Bad values and unknown keys raise USAGE errors that name the key.
class KeyValueConfig {
public:
    static KeyValueConfig
    parse(const std::string& text, const std::string& origin);

    /// Throws USAGE naming the path when the file cannot be read.
    static KeyValueConfig
    load(const std::string& path);

    bool
    contains(const std::string& key) const {
        return values_.contains(key);
    }

    void
    set(const std::string& key, const std::string& value) {
        values_[key] = value;
    }

    std::optional<std::string>
    get_string(const std::string& key) const;

    void
    read(const std::string& key, size_t& out) const;
    void
    read(const std::string& key, int64_t& out) const;
    void
    read(const std::string& key, double& out) const;
    void
    read(const std::string& key, bool& out) const;
    void
    read(const std::string& key, std::string& out) const;

    /// Throws USAGE listing every key never passed to read/get_string.
    void
    reject_unknown() const;

    /// Canonical `key=value` lines in key order.
    std::string
    canonical() const;

    const std::string&
    origin() const {
        return origin_;
    }

private:
    const std::string*
    lookup(const std::string& key) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::string origin_;
    mutable std::set<std::string> consumed_;
};

}  // namespace trinity
