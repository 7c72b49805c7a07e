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

#include "trinity/pipeline.h"

#include <algorithm>
#include <set>

#include "trinity/histogram.h"

namespace trinity {

namespace {

enum Salt : uint64_t {
    kWorldSalt = 1,
    kTrainerSalt = 2,
    kPrerankSalt = 3,
    kStaySalt = 4,
    kEmbeddingInitSalt = 5,
    kPrerankInitSalt = 6,
    kStayInitSalt = 7,
    kMSalt = 11,
    kLtSalt = 12,
    kLSalt = 13,
};

bool
has_training_samples(const std::vector<BehaviorEvent>& events) {
    std::set<UserId> with_history;
    for (const auto& e : events) {
        if (with_history.contains(e.user_id)) {
            return true;
        }
        if (is_qualifying(e)) {
            with_history.insert(e.user_id);
        }
    }
    return false;
}

// Best `count` items of `members` by inner product with `user`, ascending id
// on ties, skipping `exclude`.
std::vector<ItemId>
top_items(std::span<const double> user,
          const std::vector<ItemId>& members,
          const ItemEmbeddingTable& table,
          size_t count,
          const std::set<ItemId>& exclude) {
    std::vector<ItemId> pool;
    for (ItemId item : members) {
        if (!exclude.contains(item)) {
            pool.push_back(item);
        }
    }
    std::vector<ItemId> out;
    for (const auto& scored : rerank(user, pool, table, count)) {
        out.push_back(scored.item);
    }
    return out;
}

std::vector<ItemId>
union_of(std::initializer_list<const std::vector<ItemId>*> lists) {
    std::set<ItemId> merged;
    for (const auto* list : lists) {
        merged.insert(list->begin(), list->end());
    }
    return {merged.begin(), merged.end()};
}

}  // namespace

uint64_t
derive_seed(uint64_t base, uint64_t salt) {
    // splitmix64 finalizer
    uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void
PipelineConfig::validate() const {
    world.validate();
    trainer.validate();
    m.validate();
    lt.validate();
    l.validate();
    if (trainer.num_primary == 0 || trainer.num_secondary == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "codebook sizes must be positive");
    }
    if (sketch_buckets == 0 || !(sketch_alpha > 0.0 && sketch_alpha <= 1.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "sketch needs buckets > 0 and alpha in (0, 1]");
    }
    if (stay_time.batch_size < 2 || stay_time.max_behaviors == 0 || stay_time.learning_rate < 0.0) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "stay-time model needs batch_size >= 2, max_behaviors > 0, learning_rate >= 0");
    }
    if (prerank_learning_rate < 0.0) {
        throw_error(ErrorCode::INVALID_INPUT, "prerank learning rate must be non-negative");
    }
    if (impressions == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "impressions must be positive");
    }
    if (!(eval.longtail_topic_share >= 0.0 && eval.longtail_topic_share <= 1.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "eval.longtail_topic_share must lie in [0, 1]");
    }
}

void
PipelineConfig::apply(const KeyValueConfig& kv) {
    kv.read("seed", seed);

    kv.read("world.n_items", world.n_items);
    kv.read("world.n_topics", world.n_topics);
    kv.read("world.n_users", world.n_users);
    kv.read("world.zipf", world.zipf);
    kv.read("world.popularity_zipf", world.popularity_zipf);
    kv.read("world.dominant_topics", world.dominant_topics);
    kv.read("world.niche_topics", world.niche_topics);
    kv.read("world.dominant_mass", world.dominant_mass);
    kv.read("world.niche_mass", world.niche_mass);
    kv.read("world.dormant_prob", world.dormant_prob);
    kv.read("world.dormant_mass", world.dormant_mass);
    kv.read("world.dormant_window", world.dormant_window);
    kv.read("world.session_len", world.session_len);
    kv.read("world.horizon", world.horizon);

    kv.read("trainer.dim", trainer.dim);
    kv.read("trainer.learning_rate", trainer.learning_rate);
    kv.read("trainer.negatives", trainer.negatives_per_positive);
    kv.read("trainer.batch_size", trainer.batch_size);
    kv.read("trainer.max_behaviors", trainer.max_behaviors);
    kv.read("trainer.window", trainer.window);
    kv.read("trainer.epochs", trainer.epochs);
    kv.read("trainer.num_primary", trainer.num_primary);
    kv.read("trainer.num_secondary", trainer.num_secondary);
    kv.read("trainer.ema_decay", trainer.ema_decay);

    kv.read("prerank.epochs", prerank_epochs);
    kv.read("prerank.learning_rate", prerank_learning_rate);

    kv.read("stay.learning_rate", stay_time.learning_rate);
    kv.read("stay.batch_size", stay_time.batch_size);
    kv.read("stay.max_behaviors", stay_time.max_behaviors);
    kv.read("stay.epochs", stay_time.epochs);

    kv.read("m.primary_threshold", m.primary_threshold);
    kv.read("m.secondary_threshold", m.secondary_threshold);
    kv.read("m.output_size", m.output_size);
    kv.read("m.require_all_children", m.require_all_children);

    kv.read("lt.item_threshold", lt.item_threshold);
    kv.read("lt.response_threshold", lt.response_threshold);
    kv.read("lt.longtail_size", lt.longtail_size);
    kv.read("lt.sample_size", lt.sample_size);
    kv.read("lt.alpha", lt.alpha);
    kv.read("lt.beta", lt.beta);
    kv.read("sketch.buckets", sketch_buckets);
    kv.read("sketch.alpha", sketch_alpha);

    kv.read("l.per_cluster_cap", l.per_cluster_cap);
    kv.read("l.pool_size", l.pool_size);
    kv.read("l.seed_count", l.seed_count);
    kv.read("l.neighbors", l.neighbors);

    kv.read("baseline.k", baseline_k);
    kv.read("retrieve.items_per_cluster", items_per_cluster);
    kv.read("rerank.impressions", impressions);
    kv.read("eval.longtail_topic_share", eval.longtail_topic_share);
    kv.read("eval.consumed_threshold", eval.consumed_threshold);

    kv.reject_unknown();
    try {
        validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::USAGE, kv.origin() + ": " + e.what());
    }
}

std::map<std::string, uint64_t>
PipelineConfig::stage_seeds() const {
    return {{"world", derive_seed(seed, kWorldSalt)},
            {"trainer", derive_seed(seed, kTrainerSalt)},
            {"prerank", derive_seed(seed, kPrerankSalt)},
            {"stay_time", derive_seed(seed, kStaySalt)},
            {"embedding_init", derive_seed(seed, kEmbeddingInitSalt)},
            {"prerank_init", derive_seed(seed, kPrerankInitSalt)},
            {"stay_time_init", derive_seed(seed, kStayInitSalt)},
            {"trinity_m", derive_seed(seed, kMSalt)},
            {"trinity_lt", derive_seed(seed, kLtSalt)},
            {"trinity_l", derive_seed(seed, kLSalt)}};
}

TrainedModels
train_models(const std::vector<BehaviorEvent>& events,
             const std::vector<ItemId>& items,
             const PipelineConfig& cfg) {
    cfg.validate();
    auto seeds = cfg.stage_seeds();
    const size_t dim = cfg.trainer.dim;
    TrainedModels models;
    models.embeddings = ItemEmbeddingTable::random(items, dim, seeds["embedding_init"]);
    models.codebook = ClusterCodebook(dim, cfg.trainer.num_primary, cfg.trainer.num_secondary,
                                      cfg.trainer.ema_decay);
    models.prerank = ItemEmbeddingTable::random(items, dim, seeds["prerank_init"]);
    models.stay_time = ItemEmbeddingTable::random(items, dim, seeds["stay_time_init"]);
    if (items.empty()) {
        return models;
    }

    TrainerConfig tc = cfg.trainer;
    tc.seed = seeds["trainer"];
    tc.use_cluster_terms = true;
    TwoTowerTrainer trainer(models.embeddings, &models.codebook, &models.store, tc);
    trainer.initialize_codebook();
    models.trained = has_training_samples(events);
    if (!models.trained) {
        trainer.refresh_assignments();
        return models;
    }
    for (size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        EventSampleSource source(events, tc.window, tc.max_behaviors, derive_seed(tc.seed, epoch));
        models.epochs.push_back(trainer.train_epoch(source));
    }
    if (tc.epochs == 0) {
        trainer.refresh_assignments();
    }

    TrainerConfig pc = cfg.trainer;
    pc.seed = seeds["prerank"];
    pc.use_cluster_terms = false;
    pc.learning_rate = cfg.prerank_learning_rate;
    TwoTowerTrainer prerank(models.prerank, nullptr, nullptr, pc);
    for (size_t epoch = 0; epoch < cfg.prerank_epochs; ++epoch) {
        EventSampleSource source(events, pc.window, pc.max_behaviors, derive_seed(pc.seed, epoch));
        prerank.train_epoch(source);
    }

    StayTimeConfig sc = cfg.stay_time;
    sc.seed = seeds["stay_time"];
    sc.window = cfg.trainer.window;
    for (size_t epoch = 0; epoch < sc.epochs; ++epoch) {
        train_stay_time_epoch(events, models.stay_time, sc, epoch);
    }
    return models;
}

IntervalSketch
build_sketch(const std::vector<BehaviorEvent>& events,
             const AssignmentStore& store,
             const PipelineConfig& cfg) {
    IntervalSketch sketch(cfg.sketch_buckets, cfg.sketch_alpha);
    for (const auto& e : events) {
        if (!is_qualifying(e)) {
            continue;
        }
        if (auto a = store.find(e.item_id)) {
            sketch.update(a->secondary, e.event_index);
        }
    }
    return sketch;
}

sim::RetrievalOutputs
retrieve_all(const std::vector<UserId>& users,
             const std::vector<BehaviorEvent>& events,
             const TrainedModels& models,
             const IntervalSketch& sketch,
             const PipelineConfig& cfg) {
    auto seeds = cfg.stage_seeds();
    auto sequences = build_sequences(events, cfg.trainer.window);
    auto members = models.store.items_by_secondary();
    auto longtail = longtail_set(sketch, models.store.secondary_sizes(), cfg.lt);
    const auto& corpus = models.embeddings.items();
    const EventIndex now = events.empty() ? 0 : events.back().event_index + 1;
    const double per_day = sim::events_per_day(cfg.world);
    auto age_days = [&](EventIndex t) { return static_cast<double>(now - t) / per_day; };

    sim::RetrievalOutputs outputs;
    for (UserId user : users) {
        auto& out = outputs[user];
        auto it = sequences.find(user);
        if (it == sequences.end() || it->second.empty()) {
            continue;
        }
        const auto& seq = it->second;
        std::set<ItemId> consumed;
        for (const auto& entry : seq.entries()) {
            consumed.insert(entry.item_id);
        }
        const auto seed_of = [&](const char* stage) {
            return derive_seed(seeds[stage], static_cast<uint64_t>(user));
        };

        auto hist = build_histogram(seq, models.store, cfg.trainer.num_primary,
                                    cfg.trainer.num_secondary);
        TrinityMConfig mc = cfg.m;
        mc.rng_seed = seed_of("trinity_m");
        out.m_clusters = select_multi_interest(hist.tree, mc);

        std::set<ClusterId> exclude(out.m_clusters.begin(), out.m_clusters.end());
        LongTailConfig lc = cfg.lt;
        lc.rng_seed = seed_of("trinity_lt");
        out.lt_clusters = select_longtail(hist.h2, longtail, exclude, lc);
        lc.alpha = 0.0;
        out.lt_uniform_clusters = select_longtail(hist.h2, longtail, exclude, lc);

        Vector user_vec = user_vector(models.embeddings, seq);
        auto deliver = [&](const std::vector<ClusterId>& clusters) {
            std::vector<ItemId> items;
            for (ClusterId c : clusters) {
                auto found = members.find(c);
                if (found == members.end()) {
                    continue;
                }
                auto top = top_items(user_vec, found->second, models.embeddings,
                                     cfg.items_per_cluster, consumed);
                items.insert(items.end(), top.begin(), top.end());
            }
            return items;
        };
        out.m_items = deliver(out.m_clusters);
        out.lt_items = deliver(out.lt_clusters);

        TrinityLConfig l = cfg.l;
        l.rng_seed = seed_of("trinity_l");
        auto ranked = prerank_seeds(seq, models.prerank);
        auto selection = disperse_and_sample(ranked, models.store, l);
        std::vector<ItemId> seed_items;
        for (const auto& s : selection.seeds) {
            seed_items.push_back(s.item);
            out.l_seed_ages_days.push_back(age_days(s.last_seen));
        }
        for (const auto& c :
             i2i_search(seed_items, models.embeddings, corpus, l.neighbors, consumed).candidates) {
            out.l_items.push_back(c.item);
        }

        // recency rule: the N_L most recently consumed distinct items
        std::set<ItemId> recent;
        for (auto e = seq.entries().rbegin();
             e != seq.entries().rend() && recent.size() < l.seed_count; ++e) {
            if (recent.insert(e->item_id).second) {
                out.recency_seed_ages_days.push_back(age_days(e->event_index));
            }
        }

        Vector stay_vec = user_vector(models.stay_time, seq);
        out.baseline_items = top_items(stay_vec, corpus, models.stay_time, cfg.baseline_k, consumed);

        auto finalize = [&](const std::vector<ItemId>& pool) {
            std::vector<ItemId> shown;
            for (const auto& s : rerank(stay_vec, pool, models.stay_time, cfg.impressions)) {
                shown.push_back(s.item);
            }
            return shown;
        };
        out.impressions_without_lt =
            finalize(union_of({&out.baseline_items, &out.m_items, &out.l_items}));
        out.impressions_with_lt =
            finalize(union_of({&out.baseline_items, &out.m_items, &out.l_items, &out.lt_items}));
    }
    return outputs;
}

PipelineResult
run_pipeline(const PipelineConfig& cfg) {
    run_stage("config", [&] { cfg.validate(); });
    auto seeds = cfg.stage_seeds();
    PipelineResult result;
    result.world = run_stage("generate", [&] {
        sim::WorldConfig wc = cfg.world;
        wc.seed = seeds["world"];
        return sim::generate_world(wc);
    });
    result.events = run_stage("simulate", [&] {
        return sim::simulate_stream(result.world, result.world.config.horizon);
    });
    result.models = run_stage("train", [&] {
        return train_models(result.events, result.world.all_items(), cfg);
    });
    result.sketch = run_stage("sketch", [&] {
        return build_sketch(result.events, result.models.store, cfg);
    });
    std::vector<UserId> users;
    for (const auto& u : result.world.users) {
        users.push_back(u.id);
    }
    result.outputs = run_stage("retrieve", [&] {
        return retrieve_all(users, result.events, result.models, result.sketch, cfg);
    });
    result.report = run_stage("evaluate", [&] {
        return sim::evaluate(result.world, result.models.store, result.events, result.outputs,
                             cfg.eval);
    });
    return result;
}

}  // namespace trinity
