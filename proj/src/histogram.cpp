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

#include "trinity/histogram.h"

#include <algorithm>

namespace trinity {

void
InterestHistogram::add(Assignment a) {
    if (a.primary < 0 || static_cast<size_t>(a.primary) >= h1.size() || a.secondary < 0 ||
        static_cast<size_t>(a.secondary) >= h2.size()) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "assignment (" + std::to_string(a.primary) + ", " + std::to_string(a.secondary) +
                        ") outside histogram range");
    }
    ++h1[a.primary];
    ++h2[a.secondary];
    ++tree[a.primary][a.secondary];
    ++resolved_events;
}

InterestHistogram
build_histogram(const BehaviorSequence& seq,
                const AssignmentStore& store,
                size_t num_primary,
                size_t num_secondary) {
    InterestHistogram hist(num_primary, num_secondary);
    for (const auto& entry : seq.entries()) {
        auto a = store.find(entry.item_id);
        if (!a) {
            ++hist.skipped_events;
            continue;
        }
        hist.add(*a);
    }
    return hist;
}

std::vector<std::pair<ClusterId, int64_t>>
sorted_view(std::span<const int64_t> counts) {
    std::vector<std::pair<ClusterId, int64_t>> view;
    view.reserve(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        view.emplace_back(static_cast<ClusterId>(i), counts[i]);
    }
    std::stable_sort(view.begin(), view.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return view;
}

std::map<ClusterId, int64_t>
secondary_totals(const StructuralTree& tree) {
    std::map<ClusterId, int64_t> totals;
    for (const auto& [primary, children] : tree) {
        for (const auto& [secondary, count] : children) {
            totals[secondary] += count;
        }
    }
    return totals;
}

}  // namespace trinity
