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

#include "trinity/assignment_store.h"

#include "trinity/text_io.h"

namespace trinity {

void
AssignmentStore::set(ItemId item, Assignment assignment) {
    if (assignment.primary < 0 || assignment.secondary < 0) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "negative cluster id for item " + std::to_string(item));
    }
    entries_[item] = assignment;
}

std::optional<Assignment>
AssignmentStore::find(ItemId item) const {
    auto it = entries_.find(item);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void
AssignmentStore::validate(size_t num_primary, size_t num_secondary) const {
    for (const auto& [item, a] : entries_) {
        if (static_cast<size_t>(a.primary) >= num_primary ||
            static_cast<size_t>(a.secondary) >= num_secondary) {
            throw_error(ErrorCode::INVALID_INPUT,
                        "item " + std::to_string(item) + " maps to out-of-range cluster (" +
                            std::to_string(a.primary) + ", " + std::to_string(a.secondary) + ")");
        }
    }
}

std::map<ClusterId, std::vector<ItemId>>
AssignmentStore::items_by_secondary() const {
    std::map<ClusterId, std::vector<ItemId>> groups;
    for (const auto& [item, a] : entries_) {
        groups[a.secondary].push_back(item);
    }
    return groups;
}

std::map<ClusterId, size_t>
AssignmentStore::secondary_sizes() const {
    std::map<ClusterId, size_t> sizes;
    for (const auto& [item, a] : entries_) {
        ++sizes[a.secondary];
    }
    return sizes;
}

void
AssignmentStore::save(const std::string& path) const {
    std::string out = std::string(kHeader) + "\n";
    for (const auto& [item, a] : entries_) {
        out += std::to_string(item) + "\t" + std::to_string(a.primary) + "\t" +
               std::to_string(a.secondary) + "\n";
    }
    text::write_file_atomic(path, out);
}

AssignmentStore
AssignmentStore::load(const std::string& path) {
    auto lines = text::read_lines(path);
    if (lines.empty() || lines[0] != kHeader) {
        throw_error(ErrorCode::PARSE, path + ":1: expected header '" + std::string(kHeader) + "'");
    }
    AssignmentStore store;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        std::string what = path + ":" + std::to_string(i + 1);
        auto parts = text::split(lines[i], '\t');
        if (parts.size() != 3) {
            throw_error(ErrorCode::PARSE, what + ": expected 3 tab-separated fields");
        }
        ItemId item = text::parse_int(parts[0], what);
        auto primary = text::parse_int(parts[1], what);
        auto secondary = text::parse_int(parts[2], what);
        if (primary < 0 || secondary < 0) {
            throw_error(ErrorCode::PARSE, what + ": negative cluster id");
        }
        if (store.entries_.contains(item)) {
            throw_error(ErrorCode::PARSE, what + ": duplicate item " + std::to_string(item));
        }
        store.entries_[item] = {static_cast<ClusterId>(primary), static_cast<ClusterId>(secondary)};
    }
    return store;
}

void
persist_assignments(const AssignmentStore& store, const std::string& path) {
    store.save(path);
}

AssignmentStore
load_assignments(const std::string& path) {
    return AssignmentStore::load(path);
}

}  // namespace trinity
