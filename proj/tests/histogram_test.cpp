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

#include <algorithm>
#include <numeric>

#include "test_util.h"
#include "trinity/behavior.h"
#include "trinity/histogram.h"

namespace trinity {

namespace {

struct Fixture {
    AssignmentStore store;
    BehaviorSequence seq{1};
};

Fixture
random_fixture(uint64_t seed, size_t events, size_t items, size_t j, size_t k) {
    Rng rng(seed);
    Fixture f;
    std::uniform_int_distribution<ClusterId> pj(0, static_cast<ClusterId>(j) - 1);
    std::uniform_int_distribution<ClusterId> pk(0, static_cast<ClusterId>(k) - 1);
    // a tenth of the items stay unassigned
    for (ItemId item = 0; item < static_cast<ItemId>(items); ++item) {
        if (item % 10 != 9) {
            f.store.set(item, {pj(rng), pk(rng)});
        }
    }
    std::uniform_int_distribution<ItemId> pick(0, static_cast<ItemId>(items) - 1);
    for (size_t e = 0; e < events; ++e) {
        f.seq.push(pick(rng), static_cast<EventIndex>(e));
    }
    return f;
}

}  // namespace

TEST(BehaviorSequence, EvictsOldestBeyondCapacity) {
    BehaviorSequence seq(3, 3);
    for (int i = 0; i < 5; ++i) {
        seq.push(100 + i, i);
    }
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq[0].item_id, 102);
    EXPECT_EQ(seq[2].item_id, 104);
}

TEST(BehaviorSequence, KeepsOnlyQualifyingEvents) {
    BehaviorSequence seq(1);
    seq.observe({1, 5, 0, 3.0, false, false});
    seq.observe({1, 6, 1, 11.0, false, false});
    seq.observe({1, 7, 2, 0.5, true, false});
    seq.observe({1, 8, 3, 0.5, false, true});
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq[0].item_id, 6);
}

TEST(BehaviorSequence, RejectsOutOfOrderEvents) {
    BehaviorSequence seq(1);
    seq.push(1, 10);
    EXPECT_EQ(test::error_code_of([&] { seq.push(2, 9); }), ErrorCode::INVALID_INPUT);
}

TEST(EventLog, JsonLinesRoundTrip) {
    test::TempDir dir;
    std::vector<BehaviorEvent> events{{1, 2, 0, 12.5, false, true}, {3, 4, 1, 0.1, true, false}};
    write_event_log(dir.file("e.jsonl"), events);
    EXPECT_EQ(read_event_log(dir.file("e.jsonl")), events);
    auto first = test::slurp(dir.file("e.jsonl")).substr(0, 20);
    EXPECT_EQ(first, "{\"user_id\":1,\"item_i");
}

TEST(EventLog, MalformedLineNamesLine) {
    test::TempDir dir;
    test::spit(dir.file("e.jsonl"),
               "{\"user_id\":1,\"item_id\":2,\"event_index\":0,\"playtime_s\":1,\"finished\":false,"
               "\"interacted\":false}\n{oops\n");
    try {
        read_event_log(dir.file("e.jsonl"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PARSE);
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}

TEST(BuildHistogram, EmptySequence) {
    AssignmentStore store;
    auto h = build_histogram(BehaviorSequence(1), store, 4, 8);
    EXPECT_EQ(h.h1, std::vector<int64_t>(4, 0));
    EXPECT_EQ(h.h2, std::vector<int64_t>(8, 0));
    EXPECT_TRUE(h.tree.empty());
}

TEST(BuildHistogram, Multiplicity) {
    AssignmentStore store;
    store.set(42, {7, 300});
    BehaviorSequence seq(1);
    for (int i = 0; i < 3; ++i) {
        seq.push(42, i);
    }
    auto h = build_histogram(seq, store, 128, 1024);
    EXPECT_EQ(h.h1[7], 3);
    EXPECT_EQ(h.h2[300], 3);
    EXPECT_EQ(h.tree, (StructuralTree{{7, {{300, 3}}}}));
}

TEST(BuildHistogram, MatchesNaiveRecount) {
    auto f = random_fixture(5, 2500, 400, 16, 64);
    auto h = build_histogram(f.seq, f.store, 16, 64);
    std::vector<int64_t> h1(16, 0), h2(64, 0);
    std::map<std::pair<ClusterId, ClusterId>, int64_t> pairs;
    int64_t skipped = 0;
    for (const auto& e : f.seq.entries()) {
        bool found = false;
        for (const auto& [item, a] : f.store.entries()) {
            if (item == e.item_id) {
                ++h1[a.primary];
                ++h2[a.secondary];
                ++pairs[{a.primary, a.secondary}];
                found = true;
            }
        }
        skipped += found ? 0 : 1;
    }
    EXPECT_EQ(h.h1, h1);
    EXPECT_EQ(h.h2, h2);
    EXPECT_EQ(h.skipped_events, skipped);
    EXPECT_GT(skipped, 0);
    std::map<std::pair<ClusterId, ClusterId>, int64_t> from_tree;
    for (const auto& [j, children] : h.tree) {
        for (const auto& [k, n] : children) {
            from_tree[{j, k}] = n;
        }
    }
    EXPECT_EQ(from_tree, pairs);
}

TEST(BuildHistogram, ConservationAndOrderInvariance) {
    auto f = random_fixture(6, 800, 100, 8, 32);
    auto h = build_histogram(f.seq, f.store, 8, 32);
    int64_t tree_total = 0;
    for (const auto& [j, children] : h.tree) {
        int64_t sum = 0;
        for (const auto& [k, n] : children) {
            sum += n;
        }
        EXPECT_EQ(sum, h.h1[j]);
        tree_total += sum;
    }
    EXPECT_EQ(std::accumulate(h.h1.begin(), h.h1.end(), int64_t{0}), h.resolved_events);
    EXPECT_EQ(tree_total, h.resolved_events);
    EXPECT_EQ(h.resolved_events + h.skipped_events, 800);

    std::vector<SequenceEntry> entries(f.seq.entries().begin(), f.seq.entries().end());
    Rng rng(1);
    std::shuffle(entries.begin(), entries.end(), rng);
    BehaviorSequence shuffled(1);
    for (size_t i = 0; i < entries.size(); ++i) {
        shuffled.push(entries[i].item_id, static_cast<EventIndex>(i));
    }
    EXPECT_EQ(build_histogram(shuffled, f.store, 8, 32), h);
}

TEST(BuildHistogram, IncrementalConsistency) {
    auto f = random_fixture(7, 300, 60, 4, 16);
    BehaviorSequence prefix(1);
    for (size_t i = 0; i + 1 < f.seq.size(); ++i) {
        prefix.push(f.seq[i].item_id, f.seq[i].event_index);
    }
    auto h = build_histogram(prefix, f.store, 4, 16);
    if (auto a = f.store.find(f.seq[f.seq.size() - 1].item_id)) {
        h.add(*a);
        ++h.resolved_events;
    } else {
        ++h.skipped_events;
    }
    EXPECT_EQ(h, build_histogram(f.seq, f.store, 4, 16));
}

TEST(BuildHistogram, OutOfRangeStoreEntryIsRejected) {
    AssignmentStore store;
    store.set(1, {9, 0});
    BehaviorSequence seq(1);
    seq.push(1, 0);
    EXPECT_EQ(test::error_code_of([&] { build_histogram(seq, store, 4, 4); }),
              ErrorCode::INVALID_INPUT);
}

TEST(SortedView, MajorInterestComesFirst) {
    std::vector<int64_t> counts(128, 0);
    const std::vector<ClusterId> ids{10, 33, 100, 91, 62};
    const std::vector<int64_t> values{50, 20, 20, 4, 2};
    for (size_t i = 0; i < ids.size(); ++i) {
        counts[ids[i]] = values[i];
    }
    auto view = sorted_view(counts);
    for (size_t i = 0; i < ids.size(); ++i) {
        EXPECT_EQ(view[i].first, ids[i]);
        EXPECT_EQ(view[i].second, values[i]);
    }
    EXPECT_EQ(view.front().first, 10);
}

TEST(SortedView, AllZeroIsAscendingIds) {
    auto view = sorted_view(std::vector<int64_t>(6, 0));
    for (size_t i = 0; i < view.size(); ++i) {
        EXPECT_EQ(view[i], (std::pair<ClusterId, int64_t>{static_cast<ClusterId>(i), 0}));
    }
}

TEST(SortedView, MatchesComparisonSort) {
    Rng rng(4);
    std::uniform_int_distribution<int64_t> count(0, 9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int64_t> h(200);
        for (auto& c : h) {
            c = count(rng);
        }
        std::vector<std::pair<ClusterId, int64_t>> oracle;
        for (size_t i = 0; i < h.size(); ++i) {
            oracle.emplace_back(static_cast<ClusterId>(i), h[i]);
        }
        std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
            return std::tie(b.second, a.first) < std::tie(a.second, b.first);
        });
        EXPECT_EQ(sorted_view(h), oracle);
    }
}

}  // namespace trinity
