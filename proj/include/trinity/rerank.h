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

#include <span>
#include <vector>

#include "trinity/behavior.h"
#include "trinity/embedding_table.h"
#include "trinity/retriever_l.h"
#include "trinity/trainer.h"

namespace trinity {

/// Plays shorter than this are negatives for the stay-time model.
inline constexpr double kShortPlayS = 2.0;
/// Positive weights are play time clipped to five minutes.
inline constexpr double kMaxPlayWeightS = 300.0;

/// Softmax weight of a view: 0 for short plays, else min(playtime, 300).
double
stay_time_weight(double playtime_s);

struct SoftmaxResult {
    double loss = 0.0;
    std::vector<Vector> grad_users;
    std::vector<Vector> grad_items;
};

/// -sum_p w_p * log(exp(u_p.v_p) / sum_q exp(u_p.v_q)), q ranging over every
/// item in the batch. Rows with zero weight still act as in-batch columns.
/// Throws INVALID_INPUT for batches smaller than two.
SoftmaxResult
weighted_inbatch_softmax_loss_and_gradient(std::span<const Vector> users,
                                           std::span<const Vector> items,
                                           std::span<const double> weights);

double
weighted_inbatch_softmax_loss(std::span<const Vector> users,
                              std::span<const Vector> items,
                              std::span<const double> weights);

/// Top `budget` candidates by inner product with `user`, descending, ties by
/// ascending item id. Candidates without an embedding are dropped.
std::vector<ScoredItem>
rerank(std::span<const double> user,
       std::span<const ItemId> candidates,
       const ItemEmbeddingTable& embeddings,
       size_t budget = 1000);

/// Mean row of every sequence item; empty vector for an empty sequence.
Vector
user_vector(const ItemEmbeddingTable& embeddings, const BehaviorSequence& seq);

struct StayTimeConfig {
    double learning_rate = 2e-4;
    size_t batch_size = 128;
    size_t max_behaviors = 64;
    size_t window = BehaviorSequence::kDefaultCapacity;
    size_t epochs = 2;
    uint64_t seed = 0;
};

/// Trains a two-tower stay-time scorer with the weighted in-batch softmax.
/// Returns the mean per-row loss of every batch.
std::vector<double>
train_stay_time_epoch(const std::vector<BehaviorEvent>& events,
                      ItemEmbeddingTable& table,
                      const StayTimeConfig& cfg,
                      uint64_t epoch);

}  // namespace trinity
