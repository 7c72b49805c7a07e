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

#include "trinity/retriever_l.h"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "trinity/trainer.h"

namespace trinity {

void
TrinityLConfig::validate() const {
    if (per_cluster_cap < 1 || neighbors < 1) {
        throw_error(ErrorCode::INVALID_INPUT, "T_c and k_nn must be >= 1");
    }
    if (seed_count > pool_size) {
        throw_error(ErrorCode::INVALID_INPUT, "N_L must not exceed N_s");
    }
}

std::vector<ScoredItem>
prerank_seeds(const BehaviorSequence& seq, const ItemEmbeddingTable& scorer) {
    std::vector<ScoredItem> ranked;
    if (seq.empty()) {
        return ranked;
    }
    std::vector<std::span<const double>> rows;
    rows.reserve(seq.size());
    std::unordered_map<ItemId, EventIndex> latest;
    for (const auto& entry : seq.entries()) {
        rows.push_back(scorer.row(entry.item_id));
        latest[entry.item_id] = entry.event_index;
    }
    Vector user = pool_user_representation(rows);
    ranked.reserve(latest.size());
    for (const auto& [item, index] : latest) {
        ranked.push_back({item, dot(user, scorer.row(item)), index});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        if (a.last_seen != b.last_seen) {
            return a.last_seen > b.last_seen;
        }
        return a.item < b.item;
    });
    return ranked;
}

SeedSelection
disperse_and_sample(std::span<const ScoredItem> ranked,
                    const AssignmentStore& store,
                    const TrinityLConfig& cfg) {
    cfg.validate();
    SeedSelection out;
    std::map<ClusterId, size_t> per_cluster;
    for (const auto& item : ranked) {
        if (out.pool.size() >= cfg.pool_size) {
            break;
        }
        auto a = store.find(item.item);
        if (!a) {
            ++out.unassigned;
            continue;
        }
        auto& used = per_cluster[a->secondary];
        if (used >= cfg.per_cluster_cap) {
            continue;
        }
        ++used;
        out.pool.push_back(item);
    }
    Rng rng(cfg.rng_seed);
    out.seeds = random_choose(out.pool, cfg.seed_count, rng);
    return out;
}

NeighborResult
i2i_search(std::span<const ItemId> seeds,
           const ItemEmbeddingTable& embeddings,
           std::span<const ItemId> corpus,
           size_t neighbors,
           const std::set<ItemId>& exclude) {
    NeighborResult result;
    if (neighbors == 0) {
        return result;
    }
    auto better = [](const ScoredItem& a, const ScoredItem& b) {
        return a.score != b.score ? a.score > b.score : a.item < b.item;
    };
    std::vector<size_t> corpus_pos;
    std::vector<ItemId> corpus_ids;
    for (ItemId item : corpus) {
        size_t pos = embeddings.position(item);
        if (pos != ItemEmbeddingTable::npos && !exclude.contains(item)) {
            corpus_pos.push_back(pos);
            corpus_ids.push_back(item);
        }
    }
    std::map<ItemId, double> best;
    std::vector<ScoredItem> scored;
    for (ItemId seed : seeds) {
        size_t seed_pos = embeddings.position(seed);
        if (seed_pos == ItemEmbeddingTable::npos) {
            ++result.missing_seeds;
            continue;
        }
        auto query = embeddings.row_at(seed_pos);
        scored.clear();
        for (size_t i = 0; i < corpus_pos.size(); ++i) {
            if (corpus_ids[i] == seed) {
                continue;
            }
            scored.push_back({corpus_ids[i], dot(query, embeddings.row_at(corpus_pos[i])), 0});
        }
        size_t k = std::min(neighbors, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                          scored.end(), better);
        for (size_t i = 0; i < k; ++i) {
            auto [it, inserted] = best.emplace(scored[i].item, scored[i].score);
            if (!inserted && scored[i].score > it->second) {
                it->second = scored[i].score;
            }
        }
    }
    for (const auto& [item, score] : best) {
        result.candidates.push_back({item, score, 0});
    }
    std::sort(result.candidates.begin(), result.candidates.end(), better);
    return result;
}

}  // namespace trinity
