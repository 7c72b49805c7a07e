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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <map>

#include "test_util.h"
#include "trinity/simharness.h"
#include "trinity/trainer.h"

namespace trinity {

namespace {

using HighPrecision = boost::multiprecision::cpp_dec_float_50;

// Term-by-term -[y log s + (1-y) log(1-s)] in 50-digit arithmetic.
double
bce_oracle(const Vector& b, const std::vector<Vector>& targets, int y) {
    HighPrecision total = 0;
    for (const auto& a : targets) {
        HighPrecision z = 0;
        for (size_t i = 0; i < b.size(); ++i) {
            z += HighPrecision(b[i]) * HighPrecision(a[i]);
        }
        HighPrecision s = 1 / (1 + boost::multiprecision::exp(-z));
        HighPrecision p = y == 1 ? s : HighPrecision(1 - s);
        total -= boost::multiprecision::log(p);
    }
    return total.convert_to<double>();
}

std::vector<std::span<const double>>
spans(const std::vector<Vector>& vs) {
    return {vs.begin(), vs.end()};
}

// Four equally sized topics; every user watches exactly one of them.
sim::World
planted_world(uint64_t seed) {
    sim::WorldConfig wc;
    wc.n_items = 100;
    wc.n_topics = 4;
    wc.n_users = 40;
    wc.zipf = 0.0;
    wc.popularity_zipf = 0.0;
    wc.dominant_topics = 1;
    wc.niche_topics = 0;
    wc.dominant_mass = 1.0;
    wc.niche_mass = 0.0;
    wc.dormant_prob = 0.0;
    wc.horizon = 1000;
    wc.seed = seed;
    return sim::generate_world(wc);
}

TrainerConfig
planted_config() {
    TrainerConfig cfg;
    cfg.num_primary = 4;
    cfg.num_secondary = 4;
    cfg.batch_size = 64;
    cfg.learning_rate = 0.02;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST(PoolUserRepresentation, SingletonIsIdentity) {
    Vector v{0.25, -3.0, 7.5};
    std::vector<Vector> rows{v};
    EXPECT_EQ(pool_user_representation(spans(rows)), v);
}

TEST(PoolUserRepresentation, TwoAxesAverage) {
    std::vector<Vector> rows{{1, 0}, {0, 1}};
    EXPECT_EQ(pool_user_representation(spans(rows)), (Vector{0.5, 0.5}));
}

TEST(PoolUserRepresentation, MatchesSummationOracle) {
    Rng rng(3);
    std::vector<Vector> rows;
    for (int i = 0; i < 100; ++i) {
        rows.push_back(test::random_vector(16, rng, 3.0));
    }
    auto pooled = pool_user_representation(spans(rows));
    for (size_t d = 0; d < 16; ++d) {
        long double sum = 0;
        for (const auto& r : rows) {
            sum += r[d];
        }
        EXPECT_NEAR(pooled[d], static_cast<double>(sum / 100), 1e-6);
    }
}

TEST(PoolUserRepresentation, EmptyIsInvalidInput) {
    EXPECT_EQ(test::error_code_of([] { pool_user_representation({}); }), ErrorCode::INVALID_INPUT);
}

TEST(BceLoss, ZeroLogitsGiveThreeLogTwo) {
    Vector b{0, 0, 0};
    std::vector<Vector> targets{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    EXPECT_NEAR(bce_loss(b, spans(targets), 1), 3.0 * std::log(2.0), 1e-12);
}

TEST(BceLoss, SaturatesToZero) {
    Vector b{100, 100};
    std::vector<Vector> targets{{5, 5}, {6, 6}, {7, 7}};
    double loss = bce_loss(b, spans(targets), 1);
    EXPECT_GE(loss, 0.0);
    EXPECT_LT(loss, 1e-12);
    EXPECT_TRUE(std::isfinite(bce_loss(b, spans(targets), 0)));
}

TEST(BceLoss, MatchesHighPrecisionOracle) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        auto b = test::random_vector(8, rng, 1.5);
        std::vector<Vector> targets{test::random_vector(8, rng, 1.5), test::random_vector(8, rng, 1.5),
                                    test::random_vector(8, rng, 1.5)};
        int y = trial % 4 == 0 ? 1 : 0;
        double loss = bce_loss(b, spans(targets), y);
        EXPECT_NEAR(loss, bce_oracle(b, targets, y), 1e-8);
        EXPECT_GE(loss, 0.0);
    }
}

TEST(BceLoss, NonFiniteInputIsRejected) {
    Vector b{std::nan(""), 0};
    std::vector<Vector> targets{{1, 1}};
    EXPECT_EQ(test::error_code_of([&] { bce_loss(b, spans(targets), 1); }),
              ErrorCode::INVALID_INPUT);
}

TEST(BceLoss, GradientMatchesCentralDifferences) {
    Rng rng(77);
    const double h = 1e-6;
    for (int trial = 0; trial < 25; ++trial) {
        auto b = test::random_vector(6, rng);
        std::vector<Vector> targets{test::random_vector(6, rng), test::random_vector(6, rng),
                                    test::random_vector(6, rng)};
        int y = trial % 2;
        auto res = bce_loss_and_gradient(b, spans(targets), y);
        for (size_t i = 0; i < b.size(); ++i) {
            Vector up = b, down = b;
            up[i] += h;
            down[i] -= h;
            double fd = (bce_loss(up, spans(targets), y) - bce_loss(down, spans(targets), y)) / (2 * h);
            EXPECT_NEAR(res.grad_user[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
        }
        for (size_t t = 0; t < targets.size(); ++t) {
            for (size_t i = 0; i < b.size(); ++i) {
                auto up = targets, down = targets;
                up[t][i] += h;
                down[t][i] -= h;
                double fd = (bce_loss(b, spans(up), y) - bce_loss(b, spans(down), y)) / (2 * h);
                EXPECT_NEAR(res.grad_targets[t][i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST(Sigmoid, StableAtExtremes) {
    EXPECT_EQ(sigmoid(800.0), 1.0);
    EXPECT_EQ(sigmoid(-800.0), 0.0);
    EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
}

TEST(LabelRule, QualifyingEvents) {
    BehaviorEvent e;
    e.playtime_s = 9.99;
    EXPECT_FALSE(is_qualifying(e));
    e.playtime_s = 10.0;
    EXPECT_TRUE(is_qualifying(e));
    e.playtime_s = 1.0;
    e.finished = true;
    EXPECT_TRUE(is_qualifying(e));
    e.finished = false;
    e.interacted = true;
    EXPECT_TRUE(is_qualifying(e));
}

TEST(EventSampleSource, EmitsOnlyWithPriorQualifyingHistory) {
    std::vector<BehaviorEvent> events{
        {1, 10, 0, 30.0, false, false},  // first qualifying event: history only
        {1, 11, 1, 1.0, false, false},   // negative sample, history {10}
        {2, 12, 2, 1.0, false, false},   // user 2 has no history
        {1, 12, 3, 12.0, false, false},  // positive, history {10}
    };
    EventSampleSource source(events, 100, 64, 1);
    TrainingSample s;
    ASSERT_TRUE(source.next(s));
    EXPECT_EQ(s.target_item, 11);
    EXPECT_EQ(s.label, 0);
    EXPECT_EQ(s.behavior_items, (std::vector<ItemId>{10}));
    ASSERT_TRUE(source.next(s));
    EXPECT_EQ(s.target_item, 12);
    EXPECT_EQ(s.label, 1);
    EXPECT_EQ(s.user_id, 1);
    EXPECT_FALSE(source.next(s));
}

TEST(EventSampleSource, BehaviorsAreDistinctHistoryPositions) {
    std::vector<BehaviorEvent> events;
    for (int i = 0; i < 300; ++i) {
        events.push_back({5, i, i, 20.0, false, false});
    }
    EventSampleSource source(events, 100, 16, 9);
    TrainingSample s;
    size_t n = 0;
    while (source.next(s)) {
        ++n;
        EXPECT_LE(s.behavior_items.size(), 16u);
        std::set<ItemId> unique(s.behavior_items.begin(), s.behavior_items.end());
        EXPECT_EQ(unique.size(), s.behavior_items.size());
        for (ItemId b : s.behavior_items) {
            EXPECT_LT(b, s.target_item);
            EXPECT_GE(b, s.target_item - 100);
        }
    }
    EXPECT_EQ(n, 299u);
}

TEST(TwoTowerTrainer, ZeroLearningRateKeepsEmbeddings) {
    auto world = planted_world(1);
    auto events = sim::simulate_stream(world, 50);
    auto table = ItemEmbeddingTable::random(world.all_items(), 8, 4);
    auto before = table;
    ClusterCodebook codebook(8, 4, 4);
    AssignmentStore store;
    auto cfg = planted_config();
    cfg.dim = 8;
    cfg.learning_rate = 0.0;
    TwoTowerTrainer trainer(table, &codebook, &store, cfg);
    trainer.initialize_codebook();
    EventSampleSource source(events, cfg.window, cfg.max_behaviors, 1);
    trainer.train_epoch(source);
    EXPECT_EQ(table, before);
    EXPECT_EQ(store.size(), table.size());
}

TEST(TwoTowerTrainer, SinglePositivePairLearns) {
    ItemEmbeddingTable table = ItemEmbeddingTable::random({0, 1}, 32, 5);
    TrainerConfig cfg;
    cfg.use_cluster_terms = false;
    cfg.negatives_per_positive = 0;
    TwoTowerTrainer trainer(table, nullptr, nullptr, cfg);
    TrainingSample s;
    s.target_item = 1;
    s.behavior_items = {0};
    s.label = 1;
    std::vector<TrainingSample> batch{s};
    double previous = trainer.batch_loss(batch);
    for (int step = 0; step < 200; ++step) {
        trainer.train_step(batch);
        double now = trainer.batch_loss(batch);
        EXPECT_LE(now, previous);
        previous = now;
    }
    EXPECT_GE(sigmoid(dot(table.row(0), table.row(1))), 0.9);
}

TEST(TwoTowerTrainer, EmptyStreamIsInvalidInput) {
    auto table = ItemEmbeddingTable::random({0, 1, 2}, 4, 1);
    ClusterCodebook codebook(4, 2, 2);
    AssignmentStore store;
    TrainerConfig cfg;
    cfg.dim = 4;
    TwoTowerTrainer trainer(table, &codebook, &store, cfg);
    VectorSampleSource empty({});
    EXPECT_EQ(test::error_code_of([&] { trainer.train_epoch(empty); }), ErrorCode::INVALID_INPUT);
}

TEST(TwoTowerTrainer, SmallStepLossIsNonIncreasing) {
    auto world = planted_world(2);
    auto events = sim::simulate_stream(world, 100);
    auto table = ItemEmbeddingTable::random(world.all_items(), 32, 8);
    auto cfg = planted_config();
    cfg.learning_rate = 1e-3;
    cfg.use_cluster_terms = false;
    TwoTowerTrainer trainer(table, nullptr, nullptr, cfg);
    EventSampleSource source(events, cfg.window, cfg.max_behaviors, 3);
    std::vector<TrainingSample> batch;
    TrainingSample s;
    while (batch.size() < 256 && source.next(s)) {
        batch.push_back(s);
    }
    double previous = trainer.batch_loss(batch);
    for (int step = 0; step < 10; ++step) {
        trainer.train_step(batch);
        double now = trainer.batch_loss(batch);
        EXPECT_LE(now, previous) << "step " << step;
        previous = now;
    }
}

TEST(TwoTowerTrainer, SameSeedSameTables) {
    auto world = planted_world(3);
    auto events = sim::simulate_stream(world, 60);
    auto run = [&] {
        auto table = ItemEmbeddingTable::random(world.all_items(), 8, 2);
        ClusterCodebook codebook(8, 4, 4);
        AssignmentStore store;
        auto cfg = planted_config();
        cfg.dim = 8;
        TwoTowerTrainer trainer(table, &codebook, &store, cfg);
        trainer.initialize_codebook();
        for (uint64_t epoch = 0; epoch < 2; ++epoch) {
            EventSampleSource source(events, cfg.window, cfg.max_behaviors, epoch);
            trainer.train_epoch(source);
        }
        return std::make_tuple(table, codebook, store);
    };
    auto a = run();
    auto b = run();
    EXPECT_EQ(std::get<0>(a), std::get<0>(b));
    EXPECT_EQ(std::get<1>(a), std::get<1>(b));
    EXPECT_EQ(std::get<2>(a), std::get<2>(b));
}

TEST(TwoTowerTrainer, PlantedTopicsShareSecondaryClusters) {
    auto world = planted_world(4);
    auto events = sim::simulate_stream(world, world.config.horizon);
    auto table = ItemEmbeddingTable::random(world.all_items(), 32, 6);
    auto cfg = planted_config();
    ClusterCodebook codebook(cfg.dim, cfg.num_primary, cfg.num_secondary, cfg.ema_decay);
    AssignmentStore store;
    TwoTowerTrainer trainer(table, &codebook, &store, cfg);
    trainer.initialize_codebook();
    for (uint64_t epoch = 0; epoch < 5; ++epoch) {
        EventSampleSource source(events, cfg.window, cfg.max_behaviors, epoch);
        trainer.train_epoch(source);
    }
    for (size_t t = 0; t < world.topic_items.size(); ++t) {
        std::map<ClusterId, size_t> clusters;
        for (ItemId item : world.topic_items[t]) {
            ++clusters[store.find(item)->secondary];
        }
        size_t modal = 0;
        for (const auto& [c, n] : clusters) {
            modal = std::max(modal, n);
        }
        double share = static_cast<double>(modal) / static_cast<double>(world.topic_items[t].size());
        EXPECT_GE(share, 0.95) << "topic " << t;
    }
}

}  // namespace trinity
