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

#include "trinity/simharness.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace trinity::sim {

namespace {

constexpr uint64_t kStreamSalt = 0x5bd1e9955bd1e995ULL;

// Interest views play longer than exploration views.
constexpr double kMatchedMeanPlayS = 30.0;
constexpr double kExploreMeanPlayS = 4.0;
constexpr double kMatchedFinishProb = 0.25;
constexpr double kExploreFinishProb = 0.03;
constexpr double kMatchedInteractProb = 0.05;
constexpr double kExploreInteractProb = 0.01;

std::vector<double>
zipf_weights(size_t n, double exponent) {
    std::vector<double> w(n);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        w[i] = std::pow(static_cast<double>(i + 1), -exponent);
        total += w[i];
    }
    for (auto& v : w) {
        v /= total;
    }
    return w;
}

// Largest-remainder apportionment of `total` with at least one per slot.
std::vector<size_t>
apportion(size_t total, const std::vector<double>& weights) {
    const size_t n = weights.size();
    std::vector<size_t> sizes(n, 1);
    size_t rest = total - n;
    std::vector<std::pair<double, size_t>> remainders;
    size_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        double quota = static_cast<double>(rest) * weights[i];
        auto whole = static_cast<size_t>(std::floor(quota));
        sizes[i] += whole;
        assigned += whole;
        remainders.emplace_back(quota - static_cast<double>(whole), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t i = 0; assigned < rest; ++i, ++assigned) {
        ++sizes[remainders[i % n].second];
    }
    return sizes;
}

size_t
draw_weighted(const std::vector<double>& weights, Rng& rng) {
    std::discrete_distribution<size_t> dist(weights.begin(), weights.end());
    return dist(rng);
}

double
median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<double>
age_fractions(const std::vector<double>& ages) {
    std::vector<double> counts(kSeedAgeEdgesDays.size() + 1, 0.0);
    for (double age : ages) {
        size_t bucket = 0;
        while (bucket < kSeedAgeEdgesDays.size() && age >= kSeedAgeEdgesDays[bucket]) {
            ++bucket;
        }
        counts[bucket] += 1.0;
    }
    if (!ages.empty()) {
        for (auto& c : counts) {
            c /= static_cast<double>(ages.size());
        }
    }
    return counts;
}

double
covered_fraction(const std::set<TopicId>& covered, const std::set<TopicId>& truth) {
    if (truth.empty()) {
        return 0.0;
    }
    size_t hit = 0;
    for (TopicId t : truth) {
        hit += covered.contains(t) ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double
jaccard(const std::vector<ItemId>& a, const std::vector<ItemId>& b) {
    std::set<ItemId> sa(a.begin(), a.end());
    std::set<ItemId> sb(b.begin(), b.end());
    size_t inter = 0;
    for (ItemId x : sa) {
        inter += sb.contains(x) ? 1 : 0;
    }
    size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

void
WorldConfig::validate() const {
    if (n_topics == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "n_topics must be at least 1");
    }
    if (n_items < n_topics) {
        throw_error(ErrorCode::INVALID_INPUT, "n_items (" + std::to_string(n_items) +
                                                  ") must be at least n_topics (" +
                                                  std::to_string(n_topics) + ")");
    }
    if (session_len == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "session_len must be positive");
    }
    if (zipf < 0.0 || popularity_zipf < 0.0) {
        throw_error(ErrorCode::INVALID_INPUT, "zipf exponents must be non-negative");
    }
    if (dominant_mass < 0.0 || niche_mass < 0.0 || dormant_mass < 0.0 ||
        dominant_mass + niche_mass > 1.0 + 1e-12) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "interest masses must be non-negative with dominant + niche <= 1");
    }
    if (dormant_prob < 0.0 || dormant_prob > 1.0 || dormant_window < 0.0 || dormant_window > 1.0) {
        throw_error(ErrorCode::INVALID_INPUT, "dormant_prob and dormant_window must lie in [0, 1]");
    }
}

std::set<TopicId>
UserProfile::planted_topics() const {
    std::set<TopicId> out;
    for (const auto& c : mixture) {
        if (c.kind != InterestKind::EXPLORE) {
            out.insert(c.topic);
        }
    }
    return out;
}

std::set<TopicId>
UserProfile::topics_of(InterestKind kind) const {
    std::set<TopicId> out;
    for (const auto& c : mixture) {
        if (c.kind == kind) {
            out.insert(c.topic);
        }
    }
    return out;
}

bool
UserProfile::has_dormant() const {
    return std::any_of(mixture.begin(), mixture.end(),
                       [](const auto& c) { return c.kind == InterestKind::DORMANT; });
}

std::vector<ItemId>
World::all_items() const {
    std::vector<ItemId> items(item_topic.size());
    std::iota(items.begin(), items.end(), ItemId{0});
    return items;
}

double
events_per_day(const WorldConfig& cfg) {
    return static_cast<double>(std::max<size_t>(cfg.n_users, 1) * cfg.session_len);
}

World
generate_world(const WorldConfig& cfg) {
    cfg.validate();
    World world;
    world.config = cfg;
    Rng rng(cfg.seed);

    auto sizes = apportion(cfg.n_items, zipf_weights(cfg.n_topics, cfg.zipf));
    auto order = random_choose_indices(cfg.n_items, cfg.n_items, rng);
    world.item_topic.assign(cfg.n_items, 0);
    world.topic_items.assign(cfg.n_topics, {});
    size_t cursor = 0;
    for (size_t t = 0; t < cfg.n_topics; ++t) {
        for (size_t i = 0; i < sizes[t]; ++i) {
            auto item = static_cast<ItemId>(order[cursor++]);
            world.item_topic[item] = static_cast<TopicId>(t);
            world.topic_items[t].push_back(item);
        }
        std::sort(world.topic_items[t].begin(), world.topic_items[t].end());
    }
    world.topic_popularity = zipf_weights(cfg.n_topics, cfg.popularity_zipf);

    const size_t horizon_cut =
        static_cast<size_t>(std::floor(cfg.dormant_window * static_cast<double>(cfg.horizon)));
    std::bernoulli_distribution has_dormant(cfg.dormant_prob);
    for (size_t u = 0; u < cfg.n_users; ++u) {
        UserProfile profile;
        profile.id = static_cast<UserId>(u);
        std::set<TopicId> used;

        std::vector<double> weights = world.topic_popularity;
        size_t n_dominant = std::min(cfg.dominant_topics, cfg.n_topics);
        for (size_t k = 0; k < n_dominant; ++k) {
            auto t = static_cast<TopicId>(draw_weighted(weights, rng));
            weights[t] = 0.0;
            used.insert(t);
            profile.mixture.push_back({t, cfg.dominant_mass / static_cast<double>(n_dominant),
                                       InterestKind::DOMINANT});
        }

        // niche interests come from the less popular half when possible
        std::vector<TopicId> tail;
        std::vector<TopicId> head;
        for (size_t t = 0; t < cfg.n_topics; ++t) {
            if (used.contains(static_cast<TopicId>(t))) {
                continue;
            }
            (t >= cfg.n_topics / 2 ? tail : head).push_back(static_cast<TopicId>(t));
        }
        auto niche_pool = tail;
        size_t n_niche = std::min(cfg.niche_topics, tail.size() + head.size());
        if (niche_pool.size() < n_niche) {
            niche_pool.insert(niche_pool.end(), head.begin(), head.end());
        }
        auto niche = random_choose(niche_pool, n_niche, rng);
        for (TopicId t : niche) {
            used.insert(t);
            profile.mixture.push_back(
                {t, cfg.niche_mass / static_cast<double>(n_niche), InterestKind::NICHE});
        }

        if (has_dormant(rng)) {
            std::vector<TopicId> rest;
            for (size_t t = 0; t < cfg.n_topics; ++t) {
                if (!used.contains(static_cast<TopicId>(t))) {
                    rest.push_back(static_cast<TopicId>(t));
                }
            }
            if (!rest.empty() && horizon_cut > 0) {
                std::uniform_int_distribution<size_t> pick(0, rest.size() - 1);
                profile.mixture.push_back(
                    {rest[pick(rng)], cfg.dormant_mass, InterestKind::DORMANT, 0, horizon_cut});
            }
        }

        double explore = 1.0 - cfg.dominant_mass - cfg.niche_mass;
        if (explore > 1e-12) {
            profile.mixture.push_back({kExploreTopic, explore, InterestKind::EXPLORE});
        }
        world.users.push_back(std::move(profile));
    }
    return world;
}

std::vector<BehaviorEvent>
simulate_stream(const World& world, size_t horizon) {
    std::vector<BehaviorEvent> events;
    if (horizon == 0 || world.users.empty()) {
        return events;
    }
    const auto& cfg = world.config;
    Rng rng(cfg.seed ^ kStreamSalt);
    std::discrete_distribution<size_t> popularity(world.topic_popularity.begin(),
                                                  world.topic_popularity.end());
    std::vector<size_t> position(world.users.size(), 0);
    EventIndex next_index = 0;
    std::vector<double> weights;

    bool pending = true;
    while (pending) {
        pending = false;
        for (size_t u = 0; u < world.users.size(); ++u) {
            const auto& profile = world.users[u];
            for (size_t s = 0; s < cfg.session_len && position[u] < horizon; ++s) {
                size_t pos = position[u]++;
                weights.clear();
                std::set<TopicId> active;
                for (const auto& c : profile.mixture) {
                    bool on = pos >= c.active_from && pos < c.active_to;
                    weights.push_back(on ? c.weight : 0.0);
                    if (on && c.kind != InterestKind::EXPLORE) {
                        active.insert(c.topic);
                    }
                }
                const auto& comp = profile.mixture[draw_weighted(weights, rng)];
                TopicId topic = comp.topic;
                if (topic == kExploreTopic) {
                    topic = static_cast<TopicId>(popularity(rng));
                }
                const auto& pool = world.topic_items[topic];
                std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
                bool matched = active.contains(topic);

                BehaviorEvent e;
                e.user_id = profile.id;
                e.item_id = pool[pick(rng)];
                e.event_index = next_index++;
                std::exponential_distribution<double> play(
                    1.0 / (matched ? kMatchedMeanPlayS : kExploreMeanPlayS));
                e.playtime_s = std::round(play(rng) * 10.0) / 10.0;
                e.finished = std::bernoulli_distribution(
                    matched ? kMatchedFinishProb : kExploreFinishProb)(rng);
                e.interacted = std::bernoulli_distribution(
                    matched ? kMatchedInteractProb : kExploreInteractProb)(rng);
                events.push_back(e);
            }
            pending = pending || position[u] < horizon;
        }
    }
    return events;
}

std::map<ClusterId, TopicId>
cluster_topics(const World& world, const AssignmentStore& store) {
    std::map<ClusterId, std::map<TopicId, size_t>> votes;
    for (const auto& [item, a] : store.entries()) {
        if (item < 0 || static_cast<size_t>(item) >= world.item_topic.size()) {
            continue;
        }
        ++votes[a.secondary][world.item_topic[item]];
    }
    std::map<ClusterId, TopicId> out;
    for (const auto& [cluster, counts] : votes) {
        TopicId best = counts.begin()->first;
        size_t best_count = 0;
        for (const auto& [topic, count] : counts) {
            if (count > best_count) {
                best = topic;
                best_count = count;
            }
        }
        out[cluster] = best;
    }
    return out;
}

double
topic_purity(const World& world, const AssignmentStore& store) {
    std::map<ClusterId, std::map<TopicId, size_t>> votes;
    for (const auto& [item, a] : store.entries()) {
        if (item < 0 || static_cast<size_t>(item) >= world.item_topic.size()) {
            continue;
        }
        ++votes[a.secondary][world.item_topic[item]];
    }
    if (votes.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [cluster, counts] : votes) {
        size_t total = 0;
        size_t best = 0;
        for (const auto& [topic, count] : counts) {
            total += count;
            best = std::max(best, count);
        }
        sum += static_cast<double>(best) / static_cast<double>(total);
    }
    return sum / static_cast<double>(votes.size());
}

std::set<TopicId>
longtail_topics(const World& world, const std::vector<BehaviorEvent>& events, double share) {
    std::vector<size_t> views(world.topic_items.size(), 0);
    for (const auto& e : events) {
        if (e.item_id >= 0 && static_cast<size_t>(e.item_id) < world.item_topic.size()) {
            ++views[world.item_topic[e.item_id]];
        }
    }
    size_t total = std::accumulate(views.begin(), views.end(), size_t{0});
    std::vector<TopicId> order(views.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](TopicId a, TopicId b) { return views[a] < views[b]; });
    std::set<TopicId> out;
    double budget = share * static_cast<double>(total);
    double used = 0.0;
    for (TopicId t : order) {
        if (used + static_cast<double>(views[t]) > budget) {
            break;
        }
        used += static_cast<double>(views[t]);
        out.insert(t);
    }
    return out;
}

EvalReport
evaluate(const World& world,
         const AssignmentStore& store,
         const std::vector<BehaviorEvent>& events,
         const RetrievalOutputs& outputs,
         const EvalOptions& options) {
    std::string missing;
    for (const auto& profile : world.users) {
        if (!outputs.contains(profile.id)) {
            missing += (missing.empty() ? "" : ", ") + std::to_string(profile.id);
        }
    }
    if (!missing.empty()) {
        throw_error(ErrorCode::INVALID_INPUT, "retrieval outputs missing for users: " + missing);
    }

    auto majority = cluster_topics(world, store);
    auto tail_topics = longtail_topics(world, events, options.longtail_topic_share);
    auto topic_of_item = [&](ItemId item) {
        return world.item_topic.at(static_cast<size_t>(item));
    };
    auto cluster_topic_set = [&](const std::vector<ClusterId>& clusters) {
        std::set<TopicId> out;
        for (ClusterId c : clusters) {
            if (auto it = majority.find(c); it != majority.end()) {
                out.insert(it->second);
            }
        }
        return out;
    };
    auto item_topic_set = [&](const std::vector<ItemId>& items) {
        std::set<TopicId> out;
        for (ItemId item : items) {
            out.insert(topic_of_item(item));
        }
        return out;
    };

    // per-user qualifying views per topic, for the consumed long-tail set
    std::map<UserId, std::map<TopicId, int64_t>> consumed_counts;
    for (const auto& e : events) {
        if (is_qualifying(e)) {
            ++consumed_counts[e.user_id][topic_of_item(e.item_id)];
        }
    }

    EvalReport report;
    report.users = world.users.size();
    std::map<std::string, double> coverage_sum;
    std::map<std::string, double> niche_sum;
    size_t coverage_users = 0;
    size_t niche_users = 0;
    double uniqueness_sum = 0.0;
    size_t uniqueness_users = 0;
    double weighted_sum = 0.0;
    double uniform_sum = 0.0;
    size_t lt_users = 0;
    std::vector<std::vector<double>> overlap_sum(kRetrieverCount,
                                                 std::vector<double>(kRetrieverCount, 0.0));
    std::vector<std::vector<size_t>> overlap_n(kRetrieverCount,
                                               std::vector<size_t>(kRetrieverCount, 0));
    size_t tail_with = 0, total_with = 0, tail_without = 0, total_without = 0;
    std::vector<double> l_ages, recency_ages, dormant_l_ages, dormant_recency_ages;

    for (const auto& profile : world.users) {
        const auto& out = outputs.at(profile.id);
        std::map<std::string, std::set<TopicId>> topics;
        topics["baseline"] = item_topic_set(out.baseline_items);
        topics["trinity_m"] = cluster_topic_set(out.m_clusters);
        topics["trinity_lt"] = cluster_topic_set(out.lt_clusters);
        topics["trinity_l"] = item_topic_set(out.l_items);
        topics["m_union_baseline"] = topics["baseline"];
        topics["m_union_baseline"].insert(topics["trinity_m"].begin(), topics["trinity_m"].end());
        for (const char* name : kRetrieverNames) {
            topics["all"].insert(topics[name].begin(), topics[name].end());
        }

        auto planted = profile.planted_topics();
        if (!planted.empty()) {
            ++coverage_users;
            for (const auto& [name, covered] : topics) {
                coverage_sum[name] += covered_fraction(covered, planted);
            }
        }
        auto niche = profile.topics_of(InterestKind::NICHE);
        if (!niche.empty()) {
            ++niche_users;
            for (const auto& [name, covered] : topics) {
                niche_sum[name] += covered_fraction(covered, niche);
            }
        }

        if (!out.m_clusters.empty()) {
            std::set<ClusterId> baseline_clusters;
            for (ItemId item : out.baseline_items) {
                if (auto a = store.find(item)) {
                    baseline_clusters.insert(a->secondary);
                }
            }
            size_t fresh = 0;
            for (ClusterId c : out.m_clusters) {
                fresh += baseline_clusters.contains(c) ? 0 : 1;
            }
            uniqueness_sum += static_cast<double>(fresh) / static_cast<double>(out.m_clusters.size());
            ++uniqueness_users;
        }

        std::set<TopicId> consumed_tail;
        if (auto it = consumed_counts.find(profile.id); it != consumed_counts.end()) {
            for (const auto& [topic, count] : it->second) {
                if (count >= options.consumed_threshold && tail_topics.contains(topic)) {
                    consumed_tail.insert(topic);
                }
            }
        }
        if (!consumed_tail.empty()) {
            ++lt_users;
            weighted_sum += covered_fraction(cluster_topic_set(out.lt_clusters), consumed_tail);
            uniform_sum += covered_fraction(cluster_topic_set(out.lt_uniform_clusters), consumed_tail);
        }

        const std::array<const std::vector<ItemId>*, kRetrieverCount> lists = {
            &out.baseline_items, &out.m_items, &out.lt_items, &out.l_items};
        for (size_t a = 0; a < kRetrieverCount; ++a) {
            for (size_t b = a + 1; b < kRetrieverCount; ++b) {
                if (lists[a]->empty() && lists[b]->empty()) {
                    continue;
                }
                overlap_sum[a][b] += jaccard(*lists[a], *lists[b]);
                ++overlap_n[a][b];
            }
        }

        for (ItemId item : out.impressions_without_lt) {
            ++total_without;
            tail_without += tail_topics.contains(topic_of_item(item)) ? 1 : 0;
        }
        for (ItemId item : out.impressions_with_lt) {
            ++total_with;
            tail_with += tail_topics.contains(topic_of_item(item)) ? 1 : 0;
        }

        l_ages.insert(l_ages.end(), out.l_seed_ages_days.begin(), out.l_seed_ages_days.end());
        recency_ages.insert(recency_ages.end(), out.recency_seed_ages_days.begin(),
                            out.recency_seed_ages_days.end());
        if (profile.has_dormant()) {
            dormant_l_ages.insert(dormant_l_ages.end(), out.l_seed_ages_days.begin(),
                                  out.l_seed_ages_days.end());
            dormant_recency_ages.insert(dormant_recency_ages.end(),
                                        out.recency_seed_ages_days.begin(),
                                        out.recency_seed_ages_days.end());
        }
    }

    for (const char* name :
         {"baseline", "trinity_m", "trinity_lt", "trinity_l", "m_union_baseline", "all"}) {
        report.interest_coverage[name] =
            coverage_users == 0 ? 0.0 : coverage_sum[name] / static_cast<double>(coverage_users);
        report.niche_coverage[name] =
            niche_users == 0 ? 0.0 : niche_sum[name] / static_cast<double>(niche_users);
    }
    report.uniqueness =
        uniqueness_users == 0 ? 0.0 : uniqueness_sum / static_cast<double>(uniqueness_users);
    report.longtail_coverage_weighted = lt_users == 0 ? 0.0 : weighted_sum / static_cast<double>(lt_users);
    report.longtail_coverage_uniform = lt_users == 0 ? 0.0 : uniform_sum / static_cast<double>(lt_users);
    report.longtail_share_with_lt =
        total_with == 0 ? 0.0 : static_cast<double>(tail_with) / static_cast<double>(total_with);
    report.longtail_share_without_lt =
        total_without == 0 ? 0.0 : static_cast<double>(tail_without) / static_cast<double>(total_without);
    report.longtail_share_delta = report.longtail_share_with_lt - report.longtail_share_without_lt;

    report.overlap_matrix.assign(kRetrieverCount, std::vector<double>(kRetrieverCount, 0.0));
    for (size_t a = 0; a < kRetrieverCount; ++a) {
        report.overlap_matrix[a][a] = 1.0;
        for (size_t b = a + 1; b < kRetrieverCount; ++b) {
            double v = overlap_n[a][b] == 0 ? 0.0 : overlap_sum[a][b] / static_cast<double>(overlap_n[a][b]);
            report.overlap_matrix[a][b] = v;
            report.overlap_matrix[b][a] = v;
        }
    }

    auto& ages = report.seed_age_histogram;
    ages.trinity_l = age_fractions(l_ages);
    ages.recency = age_fractions(recency_ages);
    ages.median_trinity_l = median(l_ages);
    ages.median_recency = median(recency_ages);
    ages.dormant_median_trinity_l = median(dormant_l_ages);
    ages.dormant_median_recency = median(dormant_recency_ages);
    return report;
}

std::string
EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["interest_coverage"] = nlohmann::ordered_json(interest_coverage);
    j["niche_coverage"] = nlohmann::ordered_json(niche_coverage);
    j["longtail_share_delta"] = longtail_share_delta;
    j["longtail_share"] = {{"with_lt", longtail_share_with_lt},
                           {"without_lt", longtail_share_without_lt}};
    j["longtail_sampler_coverage"] = {{"weighted", longtail_coverage_weighted},
                                      {"uniform", longtail_coverage_uniform}};
    j["overlap_matrix"] = {
        {"retrievers", std::vector<std::string>(kRetrieverNames.begin(), kRetrieverNames.end())},
        {"values", overlap_matrix}};
    j["uniqueness"] = uniqueness;
    j["seed_age_histogram"] = {
        {"edges_days", std::vector<double>(kSeedAgeEdgesDays.begin(), kSeedAgeEdgesDays.end())},
        {"trinity_l", seed_age_histogram.trinity_l},
        {"recency", seed_age_histogram.recency},
        {"median_days",
         {{"trinity_l", seed_age_histogram.median_trinity_l},
          {"recency", seed_age_histogram.median_recency}}},
        {"dormant_median_days",
         {{"trinity_l", seed_age_histogram.dormant_median_trinity_l},
          {"recency", seed_age_histogram.dormant_median_recency}}}};
    j["users"] = users;
    return j.dump(2) + "\n";
}

}  // namespace trinity::sim
