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
#include <string>
#include <vector>

#include "trinity/codebook.h"

namespace trinity {

/// Key-value view of the clustering: item id -> (primary, secondary).
/// Every item holds exactly one pair.
class AssignmentStore {
public:
    static constexpr const char* kHeader = "#trinity-assignments v1";

    void
    set(ItemId item, Assignment assignment);

    std::optional<Assignment>
    find(ItemId item) const;

    size_t
    size() const {
        return entries_.size();
    }
    bool
    empty() const {
        return entries_.empty();
    }

    const std::map<ItemId, Assignment>&
    entries() const {
        return entries_;
    }

    /// Throws INVALID_INPUT if any stored id falls outside [0,J) x [0,K).
    void
    validate(size_t num_primary, size_t num_secondary) const;

    /// Items grouped by secondary cluster, ascending item id within a group.
    std::map<ClusterId, std::vector<ItemId>>
    items_by_secondary() const;

    /// Number of items per secondary cluster.
    std::map<ClusterId, size_t>
    secondary_sizes() const;

    void
    save(const std::string& path) const;
    static AssignmentStore
    load(const std::string& path);

    bool
    operator==(const AssignmentStore&) const = default;

private:
    std::map<ItemId, Assignment> entries_;
};

void
persist_assignments(const AssignmentStore& store, const std::string& path);

AssignmentStore
load_assignments(const std::string& path);

}  // namespace trinity
