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

#include "trinity/rerank.h"

#include <algorithm>
#include <cmath>
#include <map>

namespace trinity {

double
stay_time_weight(double playtime_s) {
    if (playtime_s < kShortPlayS) {
        return 0.0;
    }
    return std::min(playtime_s, kMaxPlayWeightS);
}

SoftmaxResult
weighted_inbatch_softmax_loss_and_gradient(std::span<const Vector> users,
                                           std::span<const Vector> items,
                                           std::span<const double> weights) {
    const size_t n = users.size();
    if (n < 2) {
        throw_error(ErrorCode::INVALID_INPUT, "in-batch softmax needs at least two rows");
    }
    if (items.size() != n || weights.size() != n) {
        throw_error(ErrorCode::INVALID_INPUT, "users, items and weights differ in length");
    }
    const size_t dim = users[0].size();
    SoftmaxResult res;
    res.grad_users.assign(n, Vector(dim, 0.0));
    res.grad_items.assign(n, Vector(dim, 0.0));
    std::vector<double> logits(n);
    for (size_t p = 0; p < n; ++p) {
        if (weights[p] == 0.0) {
            continue;
        }
        double max_logit = -std::numeric_limits<double>::infinity();
        for (size_t q = 0; q < n; ++q) {
            logits[q] = dot(users[p], items[q]);
            max_logit = std::max(max_logit, logits[q]);
        }
        double denom = 0.0;
        for (size_t q = 0; q < n; ++q) {
            denom += std::exp(logits[q] - max_logit);
        }
        double log_denom = max_logit + std::log(denom);
        res.loss -= weights[p] * (logits[p] - log_denom);
        for (size_t q = 0; q < n; ++q) {
            double prob = std::exp(logits[q] - log_denom);
            double ds = weights[p] * (prob - (p == q ? 1.0 : 0.0));
            for (size_t i = 0; i < dim; ++i) {
                res.grad_users[p][i] += ds * items[q][i];
                res.grad_items[q][i] += ds * users[p][i];
            }
        }
    }
    if (!std::isfinite(res.loss)) {
        throw_error(ErrorCode::INVALID_INPUT, "non-finite softmax loss");
    }
    return res;
}

double
weighted_inbatch_softmax_loss(std::span<const Vector> users,
                              std::span<const Vector> items,
                              std::span<const double> weights) {
    return weighted_inbatch_softmax_loss_and_gradient(users, items, weights).loss;
}

std::vector<ScoredItem>
rerank(std::span<const double> user,
       std::span<const ItemId> candidates,
       const ItemEmbeddingTable& embeddings,
       size_t budget) {
    std::vector<ScoredItem> scored;
    scored.reserve(candidates.size());
    for (ItemId item : candidates) {
        size_t pos = embeddings.position(item);
        if (pos == ItemEmbeddingTable::npos) {
            continue;
        }
        scored.push_back({item, dot(user, embeddings.row_at(pos)), 0});
    }
    size_t keep = std::min(budget, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), [](const ScoredItem& a, const ScoredItem& b) {
                          return a.score != b.score ? a.score > b.score : a.item < b.item;
                      });
    scored.resize(keep);
    return scored;
}

Vector
user_vector(const ItemEmbeddingTable& embeddings, const BehaviorSequence& seq) {
    if (seq.empty()) {
        return {};
    }
    std::vector<std::span<const double>> rows;
    rows.reserve(seq.size());
    for (const auto& entry : seq.entries()) {
        size_t pos = embeddings.position(entry.item_id);
        if (pos != ItemEmbeddingTable::npos) {
            rows.push_back(embeddings.row_at(pos));
        }
    }
    if (rows.empty()) {
        return {};
    }
    return pool_user_representation(rows);
}

std::vector<double>
train_stay_time_epoch(const std::vector<BehaviorEvent>& events,
                      ItemEmbeddingTable& table,
                      const StayTimeConfig& cfg,
                      uint64_t epoch) {
    EventSampleSource source(events, cfg.window, cfg.max_behaviors, cfg.seed + 7919 * epoch);
    std::vector<double> losses;
    std::vector<TrainingSample> batch;
    const size_t dim = table.dim();

    auto step = [&] {
        if (batch.size() < 2) {
            batch.clear();
            return;
        }
        std::vector<Vector> users;
        std::vector<Vector> items;
        std::vector<double> weights;
        std::vector<std::vector<size_t>> behavior_pos;
        for (const auto& s : batch) {
            std::vector<std::span<const double>> rows;
            std::vector<size_t> positions;
            for (ItemId b : s.behavior_items) {
                positions.push_back(table.position(b));
                rows.push_back(table.row(b));
            }
            users.push_back(pool_user_representation(rows));
            auto x = table.row(s.target_item);
            items.emplace_back(x.begin(), x.end());
            weights.push_back(stay_time_weight(s.playtime_s));
            behavior_pos.push_back(std::move(positions));
        }
        auto res = weighted_inbatch_softmax_loss_and_gradient(users, items, weights);
        losses.push_back(res.loss / static_cast<double>(batch.size()));

        std::map<size_t, Vector> grads;
        auto grad_for = [&](size_t pos) -> Vector& {
            auto& g = grads[pos];
            if (g.empty()) {
                g.assign(dim, 0.0);
            }
            return g;
        };
        for (size_t p = 0; p < batch.size(); ++p) {
            auto& gx = grad_for(table.position(batch[p].target_item));
            for (size_t i = 0; i < dim; ++i) {
                gx[i] += res.grad_items[p][i];
            }
            const double share = 1.0 / static_cast<double>(behavior_pos[p].size());
            for (size_t pos : behavior_pos[p]) {
                auto& gb = grad_for(pos);
                for (size_t i = 0; i < dim; ++i) {
                    gb[i] += share * res.grad_users[p][i];
                }
            }
        }
        for (auto& [pos, g] : grads) {
            auto row = table.mutable_row_at(pos);
            for (size_t i = 0; i < dim; ++i) {
                row[i] -= cfg.learning_rate * g[i];
            }
        }
        batch.clear();
    };

    TrainingSample sample;
    while (source.next(sample)) {
        batch.push_back(sample);
        if (batch.size() >= cfg.batch_size) {
            step();
        }
    }
    step();
    return losses;
}

}  // namespace trinity
