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

#include "trinity/retriever_lt.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "trinity/text_io.h"

namespace trinity {

namespace {

constexpr uint64_t kGoldenRatio64 = 0x9E3779B97F4A7C15ULL;
constexpr const char* kSketchHeader = "#trinity-sketch v1";

}  // namespace

IntervalSketch::IntervalSketch(size_t num_buckets, double alpha, SketchHash hash)
    : alpha_(alpha), hash_(hash), last_seen_(num_buckets, kNever), interval_(num_buckets, 0.0) {
    if (num_buckets == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "sketch needs at least one bucket");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "sketch alpha must lie in (0, 1]");
    }
}

size_t
IntervalSketch::bucket(ClusterId cluster) const {
    auto key = static_cast<uint64_t>(static_cast<int64_t>(cluster));
    if (hash_ == SketchHash::IDENTITY) {
        return key % last_seen_.size();
    }
    return ((key * kGoldenRatio64) >> 32) % last_seen_.size();
}

void
IntervalSketch::update(ClusterId cluster, EventIndex t) {
    size_t b = bucket(cluster);
    if (last_seen_[b] == kNever) {
        if (t < 0) {
            throw_error(ErrorCode::INVALID_INPUT, "event index must be non-negative");
        }
        last_seen_[b] = t;
        return;
    }
    if (t < last_seen_[b]) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "event index " + std::to_string(t) + " precedes last occurrence " +
                        std::to_string(last_seen_[b]) + " of cluster " + std::to_string(cluster));
    }
    interval_[b] = (1.0 - alpha_) * interval_[b] + alpha_ * static_cast<double>(t - last_seen_[b]);
    last_seen_[b] = t;
}

std::optional<double>
IntervalSketch::interval(ClusterId cluster) const {
    size_t b = bucket(cluster);
    // gaps are >= 1 once two distinct events landed here
    if (last_seen_[b] == kNever || interval_[b] <= 0.0) {
        return std::nullopt;
    }
    return interval_[b];
}

void
IntervalSketch::set_bucket(size_t b, EventIndex last_seen, double interval) {
    if (b >= last_seen_.size()) {
        throw_error(ErrorCode::INVALID_INPUT, "bucket out of range");
    }
    if (interval < 0.0 || !std::isfinite(interval)) {
        throw_error(ErrorCode::INVALID_INPUT, "interval must be finite and non-negative");
    }
    last_seen_[b] = last_seen;
    interval_[b] = interval;
}

double
IntervalSketch::collision_rate(std::span<const ClusterId> clusters) const {
    if (clusters.empty()) {
        return 0.0;
    }
    std::unordered_map<size_t, size_t> load;
    for (ClusterId c : clusters) {
        ++load[bucket(c)];
    }
    size_t colliding = 0;
    for (ClusterId c : clusters) {
        if (load[bucket(c)] > 1) {
            ++colliding;
        }
    }
    return static_cast<double>(colliding) / static_cast<double>(clusters.size());
}

void
IntervalSketch::save(const std::string& path) const {
    std::string out = std::string(kSketchHeader) + " buckets=" + std::to_string(num_buckets()) +
                      " alpha=" + text::format_double(alpha_) +
                      " hash=" + (hash_ == SketchHash::IDENTITY ? "identity" : "multiplicative") +
                      "\n";
    for (size_t b = 0; b < last_seen_.size(); ++b) {
        if (last_seen_[b] == kNever) {
            continue;
        }
        out += std::to_string(b) + "\t" + std::to_string(last_seen_[b]) + "\t" +
               text::format_double(interval_[b]) + "\n";
    }
    text::write_file_atomic(path, out);
}

IntervalSketch
IntervalSketch::load(const std::string& path) {
    auto lines = text::read_lines(path);
    if (lines.empty() || !lines[0].starts_with(kSketchHeader)) {
        throw_error(ErrorCode::PARSE, path + ":1: missing sketch header");
    }
    size_t buckets = 0;
    double alpha = kDefaultAlpha;
    SketchHash hash = SketchHash::MULTIPLICATIVE;
    for (auto field : text::split(lines[0], ' ')) {
        auto kv = text::split(field, '=');
        if (kv.size() != 2) {
            continue;
        }
        if (kv[0] == "buckets") {
            buckets = static_cast<size_t>(text::parse_int(kv[1], path + ":1"));
        } else if (kv[0] == "alpha") {
            alpha = text::parse_double(kv[1], path + ":1");
        } else if (kv[0] == "hash") {
            hash = kv[1] == "identity" ? SketchHash::IDENTITY : SketchHash::MULTIPLICATIVE;
        }
    }
    IntervalSketch sketch(buckets, alpha, hash);
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        std::string what = path + ":" + std::to_string(i + 1);
        auto parts = text::split(lines[i], '\t');
        if (parts.size() != 3) {
            throw_error(ErrorCode::PARSE, what + ": expected bucket<TAB>A<TAB>B");
        }
        auto b = text::parse_int(parts[0], what);
        if (b < 0 || static_cast<size_t>(b) >= buckets) {
            throw_error(ErrorCode::PARSE, what + ": bucket out of range");
        }
        try {
            sketch.set_bucket(static_cast<size_t>(b), text::parse_int(parts[1], what),
                              text::parse_double(parts[2], what));
        } catch (const Error& e) {
            throw_error(ErrorCode::PARSE, what + ": " + e.what());
        }
    }
    return sketch;
}

IntervalSketch
sketch_update(IntervalSketch sketch, ClusterId cluster, EventIndex t) {
    sketch.update(cluster, t);
    return sketch;
}

void
LongTailConfig::validate() const {
    if (item_threshold < 1 || response_threshold < 1 || longtail_size < 1 || sample_size < 1) {
        throw_error(ErrorCode::INVALID_INPUT, "long-tail thresholds and sizes must be >= 1");
    }
    if (alpha < 0.0 || !(beta > 0.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "sampler needs alpha >= 0 and beta > 0");
    }
}

std::vector<ClusterId>
longtail_set(const IntervalSketch& sketch,
             const std::map<ClusterId, size_t>& items_per_cluster,
             const LongTailConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<ClusterId, double>> ranked;
    for (const auto& [cluster, items] : items_per_cluster) {
        if (static_cast<int64_t>(items) < cfg.item_threshold) {
            continue;
        }
        if (auto interval = sketch.interval(cluster)) {
            ranked.emplace_back(cluster, *interval);
        }
    }
    // map order gives ascending ids, stable sort keeps them on ties
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > cfg.longtail_size) {
        ranked.resize(cfg.longtail_size);
    }
    std::vector<ClusterId> out;
    out.reserve(ranked.size());
    for (const auto& [cluster, interval] : ranked) {
        out.push_back(cluster);
    }
    return out;
}

std::vector<ClusterId>
sample_clusters(std::span<const std::pair<ClusterId, int64_t>> candidates,
                size_t count,
                double alpha,
                double beta,
                Rng& rng) {
    std::vector<ClusterId> out;
    if (candidates.size() <= count) {
        for (const auto& [cluster, h] : candidates) {
            out.push_back(cluster);
        }
        return out;
    }
    std::vector<double> weights;
    weights.reserve(candidates.size());
    for (const auto& [cluster, h] : candidates) {
        if (h < 0) {
            throw_error(ErrorCode::INVALID_INPUT, "negative response count for cluster " +
                                                      std::to_string(cluster));
        }
        weights.push_back(std::pow(beta + static_cast<double>(h), alpha));
    }
    std::vector<bool> taken(candidates.size(), false);
    for (size_t draw = 0; draw < count; ++draw) {
        double total = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (!taken[i]) {
                total += weights[i];
            }
        }
        std::uniform_real_distribution<double> uniform(0.0, total);
        double u = uniform(rng);
        size_t chosen = candidates.size();
        size_t last_open = candidates.size();
        for (size_t i = 0; i < weights.size(); ++i) {
            if (taken[i]) {
                continue;
            }
            last_open = i;
            if (u < weights[i]) {
                chosen = i;
                break;
            }
            u -= weights[i];
        }
        if (chosen == candidates.size()) {
            // rounding pushed u past the final bucket
            chosen = last_open;
        }
        taken[chosen] = true;
        out.push_back(candidates[chosen].first);
    }
    return out;
}

std::vector<ClusterId>
sample_clusters(std::span<const std::pair<ClusterId, int64_t>> candidates,
                const LongTailConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.rng_seed);
    return sample_clusters(candidates, cfg.sample_size, cfg.alpha, cfg.beta, rng);
}

std::vector<ClusterId>
select_longtail(std::span<const int64_t> h2,
                const std::vector<ClusterId>& longtail,
                const std::set<ClusterId>& exclude,
                const LongTailConfig& cfg) {
    std::set<ClusterId> members(longtail.begin(), longtail.end());
    std::vector<std::pair<ClusterId, int64_t>> candidates;
    for (ClusterId c : members) {
        if (c < 0 || static_cast<size_t>(c) >= h2.size() || exclude.contains(c)) {
            continue;
        }
        if (h2[c] >= cfg.response_threshold) {
            candidates.emplace_back(c, h2[c]);
        }
    }
    return sample_clusters(candidates, cfg);
}

}  // namespace trinity
