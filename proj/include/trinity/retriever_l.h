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

#include <limits>
#include <set>
#include <span>
#include <vector>

#include "trinity/assignment_store.h"
#include "trinity/behavior.h"
#include "trinity/embedding_table.h"

namespace trinity {

struct TrinityLConfig {
    size_t per_cluster_cap = 3;  // T_c
    size_t pool_size = 200;      // N_s
    size_t seed_count = 20;      // N_L
    size_t neighbors = 50;       // k_nn
    uint64_t rng_seed = 0;

    static constexpr size_t kUncapped = std::numeric_limits<size_t>::max();

    void
    validate() const;
};

struct ScoredItem {
    ItemId item = 0;
    double score = 0.0;
    EventIndex last_seen = 0;

    bool
    operator==(const ScoredItem&) const = default;
};

/// Scores each distinct sequence item with the pre-rank two-tower model
/// (user = mean of all sequence rows). Descending score; newer items first
/// on ties. `last_seen` is the item's latest event index in the sequence.
std::vector<ScoredItem>
prerank_seeds(const BehaviorSequence& seq, const ItemEmbeddingTable& scorer);

struct SeedSelection {
    std::vector<ScoredItem> pool;  // dispersed top-N_s, ranked order
    std::vector<ScoredItem> seeds;
    size_t unassigned = 0;  // ranked items missing from the store
};

/// Walks the ranked list keeping at most T_c items per secondary cluster
/// until N_s are kept, then draws N_L seeds uniformly from that pool.
SeedSelection
disperse_and_sample(std::span<const ScoredItem> ranked,
                    const AssignmentStore& store,
                    const TrinityLConfig& cfg);

struct NeighborResult {
    std::vector<ScoredItem> candidates;  // descending best similarity, ascending id on ties
    size_t missing_seeds = 0;
};

/// Exhaustive inner-product search: for each seed, the k_nn best corpus items
/// other than the seed and the `exclude` set. Results are merged keeping each
/// item's best similarity.
NeighborResult
i2i_search(std::span<const ItemId> seeds,
           const ItemEmbeddingTable& embeddings,
           std::span<const ItemId> corpus,
           size_t neighbors,
           const std::set<ItemId>& exclude);

}  // namespace trinity
