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
#include <string>
#include <vector>

#include "trinity/assignment_store.h"
#include "trinity/behavior.h"
#include "trinity/codebook.h"
#include "trinity/embedding_table.h"

namespace trinity {

struct TrainerConfig {
    size_t dim = ItemEmbeddingTable::kDefaultDim;
    double learning_rate = 0.05;
    size_t negatives_per_positive = 4;
    size_t batch_size = 256;
    size_t max_behaviors = 64;  // N_b, behaviors sampled per training sample
    size_t window = BehaviorSequence::kDefaultCapacity;
    size_t epochs = 5;
    uint64_t seed = 0;
    /// Adds the (user, primary centroid) and (user, secondary centroid)
    /// terms. Disabled for plain two-tower scorers.
    bool use_cluster_terms = true;
    size_t num_primary = ClusterCodebook::kDefaultPrimary;
    size_t num_secondary = ClusterCodebook::kDefaultSecondary;
    double ema_decay = ClusterCodebook::kDefaultEmaDecay;

    void
    validate() const;
};

struct TrainingSample {
    UserId user_id = 0;
    ItemId target_item = 0;
    std::vector<ItemId> behavior_items;
    int label = 0;
    double weight = 1.0;
    double playtime_s = 0.0;
};

/// Mean of the behavior embeddings. Throws INVALID_INPUT on an empty list.
Vector
pool_user_representation(std::span<const std::span<const double>> behaviors);

struct BceResult {
    double loss = 0.0;
    Vector grad_user;
    std::vector<Vector> grad_targets;
};

/// Sum over targets A of softplus(b.A) - y * (b.A), i.e. the binary
/// cross-entropy of sigmoid(b.A) against y, with gradients.
BceResult
bce_loss_and_gradient(std::span<const double> user,
                      std::span<const std::span<const double>> targets,
                      double label);

double
bce_loss(std::span<const double> user,
         std::span<const std::span<const double>> targets,
         double label);

double
sigmoid(double z);

class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual bool
    next(TrainingSample& out) = 0;
};

class VectorSampleSource : public SampleSource {
public:
    explicit VectorSampleSource(std::vector<TrainingSample> samples)
        : samples_(std::move(samples)) {
    }
    bool
    next(TrainingSample& out) override;

private:
    std::vector<TrainingSample> samples_;
    size_t pos_ = 0;
};

/// Replays an event log in order. Every event whose user already has a
/// qualifying history yields one sample: the label is the qualifying rule
/// and the behaviors are a uniform draw of at most N_b items from the
/// user's capped history before the event.
class EventSampleSource : public SampleSource {
public:
    EventSampleSource(const std::vector<BehaviorEvent>& events,
                      size_t window,
                      size_t max_behaviors,
                      uint64_t seed);
    bool
    next(TrainingSample& out) override;

private:
    const std::vector<BehaviorEvent>& events_;
    size_t window_;
    size_t max_behaviors_;
    Rng rng_;
    size_t pos_ = 0;
    std::map<UserId, BehaviorSequence> history_;
};

struct EpochMetrics {
    std::vector<double> batch_losses;  // mean per-sample loss of each batch
    size_t samples = 0;
    size_t reseeded_clusters = 0;
};

/// SGD trainer for the shared item embedding table. With cluster terms on,
/// each target is routed to its nearest centroids. Centroid-term gradients
/// train the pooled behaviors only; the codebook moves by moving average
/// after every batch.
class TwoTowerTrainer {
public:
    /// `codebook` and `store` may be null only when cluster terms are off.
    TwoTowerTrainer(ItemEmbeddingTable& table,
                    ClusterCodebook* codebook,
                    AssignmentStore* store,
                    TrainerConfig cfg);

    /// Seeds every centroid from random item rows.
    void
    initialize_codebook();

    /// Summed loss of the batch under the current parameters.
    double
    batch_loss(std::span<const TrainingSample> batch) const;

    /// One gradient step on the summed batch loss, then the codebook update.
    /// Returns the pre-step summed loss.
    double
    train_step(std::span<const TrainingSample> batch);

    /// Consumes the source, adding random negatives for every positive.
    /// Throws INVALID_INPUT if the source yields nothing.
    EpochMetrics
    train_epoch(SampleSource& source);

    /// Reassigns every item in the table (full corpus pass).
    void
    refresh_assignments();

    const TrainerConfig&
    config() const {
        return cfg_;
    }

private:
    void
    append_with_negatives(const TrainingSample& sample, std::vector<TrainingSample>& batch);

    ItemEmbeddingTable& table_;
    ClusterCodebook* codebook_;
    AssignmentStore* store_;
    TrainerConfig cfg_;
    Rng rng_;
    // dense per-row gradient accumulator reused across steps
    std::vector<double> grad_;
    std::vector<char> touched_flag_;
    std::vector<size_t> touched_;
    std::vector<Assignment> last_assignment_;  // scan hints, by table row
};

/// Convenience wrapper: one epoch with a trainer seeded from `cfg.seed`.
EpochMetrics
train_epoch(SampleSource& source,
            ItemEmbeddingTable& table,
            ClusterCodebook& codebook,
            AssignmentStore& store,
            const TrainerConfig& cfg);

/// Dot-product scorer over a trained table: user = mean of behavior rows.
double
two_tower_score(const ItemEmbeddingTable& table,
                std::span<const ItemId> behaviors,
                ItemId item);

}  // namespace trinity
