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

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trinity/assignment_store.h"
#include "trinity/behavior.h"

namespace trinity::sim {

using TopicId = int32_t;

/// Marks the exploration component of a mixture: items drawn from global
/// topic popularity instead of a planted topic.
inline constexpr TopicId kExploreTopic = -1;

struct WorldConfig {
    size_t n_items = 4000;
    size_t n_topics = 32;
    size_t n_users = 200;
    double zipf = 1.0;             // topic-size exponent
    double popularity_zipf = 1.5;  // topic-popularity exponent
    size_t dominant_topics = 2;
    size_t niche_topics = 2;
    double dominant_mass = 0.7;
    double niche_mass = 0.2;
    double dormant_prob = 0.5;
    double dormant_mass = 0.3;
    double dormant_window = 0.3;  // dormant topics are active over this leading share of the horizon
    size_t session_len = 20;
    size_t horizon = 600;  // events per user
    uint64_t seed = 0;

    void
    validate() const;
};

enum class InterestKind { DOMINANT, NICHE, DORMANT, EXPLORE };

/// One mixture component, active for per-user event positions in
/// [active_from, active_to).
struct InterestComponent {
    TopicId topic = kExploreTopic;
    double weight = 0.0;
    InterestKind kind = InterestKind::DOMINANT;
    size_t active_from = 0;
    size_t active_to = static_cast<size_t>(-1);
};

struct UserProfile {
    UserId id = 0;
    std::vector<InterestComponent> mixture;

    std::set<TopicId>
    planted_topics() const;
    std::set<TopicId>
    topics_of(InterestKind kind) const;
    bool
    has_dormant() const;
};

struct World {
    WorldConfig config;
    std::vector<TopicId> item_topic;  // indexed by item id
    std::vector<std::vector<ItemId>> topic_items;
    std::vector<double> topic_popularity;  // sums to 1
    std::vector<UserProfile> users;

    std::vector<ItemId>
    all_items() const;
};

World
generate_world(const WorldConfig& cfg);

/// Per-user streams are interleaved session by session; event indices are
/// global and strictly increasing. Each user emits `horizon` events.
std::vector<BehaviorEvent>
simulate_stream(const World& world, size_t horizon);

/// Majority latent topic of each secondary cluster's member items (lowest
/// topic id on ties).
std::map<ClusterId, TopicId>
cluster_topics(const World& world, const AssignmentStore& store);

/// Mean over non-empty secondary clusters of the majority-topic share.
double
topic_purity(const World& world, const AssignmentStore& store);

/// Least-viewed topics whose combined view share stays within `share`.
std::set<TopicId>
longtail_topics(const World& world, const std::vector<BehaviorEvent>& events, double share);

/// Everything the evaluator needs from one user's retrieval run.
struct UserRetrieval {
    std::vector<ClusterId> m_clusters;
    std::vector<ClusterId> lt_clusters;
    std::vector<ClusterId> lt_uniform_clusters;  // same candidates, uniform sampler
    std::vector<ItemId> baseline_items;
    std::vector<ItemId> m_items;
    std::vector<ItemId> lt_items;
    std::vector<ItemId> l_items;
    std::vector<ItemId> impressions_with_lt;  // final reranked lists
    std::vector<ItemId> impressions_without_lt;
    std::vector<double> l_seed_ages_days;
    std::vector<double> recency_seed_ages_days;
};

using RetrievalOutputs = std::map<UserId, UserRetrieval>;

inline constexpr size_t kRetrieverCount = 4;
inline constexpr std::array<const char*, kRetrieverCount> kRetrieverNames = {
    "baseline", "trinity_m", "trinity_lt", "trinity_l"};

/// Seed-age bucket edges in days: [0,1) [1,7) [7,15) [15,30) [30,inf).
inline constexpr std::array<double, 4> kSeedAgeEdgesDays = {1.0, 7.0, 15.0, 30.0};

struct SeedAgeHistogram {
    std::vector<double> trinity_l;  // fraction per bucket
    std::vector<double> recency;
    double median_trinity_l = 0.0;
    double median_recency = 0.0;
    double dormant_median_trinity_l = 0.0;
    double dormant_median_recency = 0.0;
};

struct EvalReport {
    std::map<std::string, double> interest_coverage;
    std::map<std::string, double> niche_coverage;
    double longtail_share_with_lt = 0.0;
    double longtail_share_without_lt = 0.0;
    double longtail_share_delta = 0.0;
    double longtail_coverage_weighted = 0.0;
    double longtail_coverage_uniform = 0.0;
    std::vector<std::vector<double>> overlap_matrix;
    double uniqueness = 0.0;
    SeedAgeHistogram seed_age_histogram;
    size_t users = 0;

    std::string
    to_json() const;
};

struct EvalOptions {
    double longtail_topic_share = 0.25;
    int64_t consumed_threshold = 3;  // qualifying views that make a topic "consumed"
};

/// Scores retrieval outputs against the planted ground truth. Throws
/// INVALID_INPUT naming every world user missing from `outputs`.
EvalReport
evaluate(const World& world,
         const AssignmentStore& store,
         const std::vector<BehaviorEvent>& events,
         const RetrievalOutputs& outputs,
         const EvalOptions& options = {});

/// Event indices per simulated day (one session per user).
double
events_per_day(const WorldConfig& cfg);

}  // namespace trinity::sim
