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
#include <string>
#include <vector>

#include "trinity/codebook.h"
#include "trinity/kv_config.h"
#include "trinity/rerank.h"
#include "trinity/retriever_l.h"
#include "trinity/retriever_lt.h"
#include "trinity/retriever_m.h"
#include "trinity/simharness.h"
#include "trinity/trainer.h"

namespace trinity {

struct PipelineConfig {
    uint64_t seed = 0;
    sim::WorldConfig world;
    TrainerConfig trainer;
    size_t prerank_epochs = 2;
    double prerank_learning_rate = 0.05;
    StayTimeConfig stay_time;
    TrinityMConfig m;
    LongTailConfig lt;
    size_t sketch_buckets = 4096;
    double sketch_alpha = IntervalSketch::kDefaultAlpha;
    TrinityLConfig l;
    size_t baseline_k = 50;         // items from the pooled-user baseline
    size_t items_per_cluster = 5;   // items delivered per retrieved cluster
    size_t impressions = 100;       // final reranked list length
    sim::EvalOptions eval;

    void
    validate() const;

    /// Overwrites fields present in `kv`; unknown keys are rejected.
    void
    apply(const KeyValueConfig& kv);

    /// Derived per-stage seeds, keyed by stage name.
    std::map<std::string, uint64_t>
    stage_seeds() const;
};

/// Deterministic 64-bit mix of a base seed and a salt.
uint64_t
derive_seed(uint64_t base, uint64_t salt);

struct TrainedModels {
    ItemEmbeddingTable embeddings;  // shared table trained with cluster terms
    ClusterCodebook codebook{ItemEmbeddingTable::kDefaultDim};
    AssignmentStore store;
    ItemEmbeddingTable prerank;     // plain two-tower scorer for seed preranking
    ItemEmbeddingTable stay_time;   // reranker / baseline scorer
    std::vector<EpochMetrics> epochs;
    bool trained = false;
};

/// Trains all three tables over `items`. With no usable samples the tables
/// keep their random initialization and `trained` stays false.
TrainedModels
train_models(const std::vector<BehaviorEvent>& events,
             const std::vector<ItemId>& items,
             const PipelineConfig& cfg);

/// Replays qualifying events through the store into an interval sketch.
IntervalSketch
build_sketch(const std::vector<BehaviorEvent>& events,
             const AssignmentStore& store,
             const PipelineConfig& cfg);

/// Runs every retriever and the reranker for each user in `users`.
sim::RetrievalOutputs
retrieve_all(const std::vector<UserId>& users,
             const std::vector<BehaviorEvent>& events,
             const TrainedModels& models,
             const IntervalSketch& sketch,
             const PipelineConfig& cfg);

struct PipelineResult {
    sim::World world;
    std::vector<BehaviorEvent> events;
    TrainedModels models;
    IntervalSketch sketch{1};
    sim::RetrievalOutputs outputs;
    sim::EvalReport report;
};

/// generate -> simulate -> train -> retrieve -> rerank -> evaluate. Errors
/// are rethrown with the failing stage's name prefixed.
PipelineResult
run_pipeline(const PipelineConfig& cfg);

/// Runs `fn`, prefixing any library error with "stage <name>: ".
template <typename Fn>
auto
run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), "stage " + name + ": " + e.what());
    }
}

}  // namespace trinity
