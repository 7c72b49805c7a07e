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
#include <span>
#include <utility>
#include <vector>

#include "trinity/assignment_store.h"
#include "trinity/behavior.h"

namespace trinity {

/// primary id -> (secondary id -> count). The same secondary may appear under
/// several primaries; each (primary, secondary) pair is counted separately.
using StructuralTree = std::map<ClusterId, std::map<ClusterId, int64_t>>;

struct InterestHistogram {
    std::vector<int64_t> h1;
    std::vector<int64_t> h2;
    StructuralTree tree;
    int64_t resolved_events = 0;
    int64_t skipped_events = 0;

    InterestHistogram() = default;
    InterestHistogram(size_t num_primary, size_t num_secondary)
        : h1(num_primary, 0), h2(num_secondary, 0) {
    }

    void
    add(Assignment a);

    bool
    operator==(const InterestHistogram&) const = default;
};

/// Projects every sequence entry through the store. Items the store does not
/// know are skipped and counted in `skipped_events`.
InterestHistogram
build_histogram(const BehaviorSequence& seq,
                const AssignmentStore& store,
                size_t num_primary,
                size_t num_secondary);

/// (cluster id, count) pairs by descending count, ascending id on ties.
std::vector<std::pair<ClusterId, int64_t>>
sorted_view(std::span<const int64_t> counts);

/// Sum over primaries of a tree's counts for each secondary.
std::map<ClusterId, int64_t>
secondary_totals(const StructuralTree& tree);

}  // namespace trinity
