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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trinity/common.h"

namespace trinity {

enum class SketchHash {
    MULTIPLICATIVE,
    IDENTITY,  // test mode: bucket = id mod buckets, injective when ids < buckets
};

/// Hashed streaming estimate of how long a cluster goes unseen between
/// occurrences. Per bucket, `last_seen` holds the latest occurrence index and
/// `interval` the moving average of gaps:
///
///   interval <- (1 - alpha) * interval + alpha * (t - last_seen)
///
/// The first occurrence only records `last_seen`; a bucket has an interval
/// estimate from its second occurrence on.
class IntervalSketch {
public:
    static constexpr double kDefaultAlpha = 0.1;
    static constexpr EventIndex kNever = -1;

    explicit IntervalSketch(size_t num_buckets,
                            double alpha = kDefaultAlpha,
                            SketchHash hash = SketchHash::MULTIPLICATIVE);

    size_t
    num_buckets() const {
        return last_seen_.size();
    }
    double
    alpha() const {
        return alpha_;
    }
    SketchHash
    hash_mode() const {
        return hash_;
    }

    size_t
    bucket(ClusterId cluster) const;

    /// Records an occurrence of `cluster` at stream position `t`. Throws
    /// INVALID_INPUT if `t` precedes the bucket's last occurrence.
    void
    update(ClusterId cluster, EventIndex t);

    EventIndex
    last_seen(ClusterId cluster) const {
        return last_seen_[bucket(cluster)];
    }
    double
    raw_interval(ClusterId cluster) const {
        return interval_[bucket(cluster)];
    }

    /// Interval estimate, or nullopt until the bucket has seen two
    /// occurrences.
    std::optional<double>
    interval(ClusterId cluster) const;

    /// Direct state injection, used by snapshot loading and tests.
    void
    set_bucket(size_t bucket, EventIndex last_seen, double interval);

    /// Fraction of `clusters` that share a bucket with another member.
    double
    collision_rate(std::span<const ClusterId> clusters) const;

    void
    save(const std::string& path) const;
    static IntervalSketch
    load(const std::string& path);

    bool
    operator==(const IntervalSketch&) const = default;

private:
    double alpha_;
    SketchHash hash_;
    std::vector<EventIndex> last_seen_;
    std::vector<double> interval_;
};

/// Value-returning form of IntervalSketch::update.
IntervalSketch
sketch_update(IntervalSketch sketch, ClusterId cluster, EventIndex t);

struct LongTailConfig {
    int64_t item_threshold = 3;      // T_i
    int64_t response_threshold = 3;  // T_l
    size_t longtail_size = 600;      // N_C
    size_t sample_size = 20;         // N_LT
    double alpha = 0.75;             // sampler exponent
    double beta = 0.1;               // sampler smoothing
    uint64_t rng_seed = 0;

    void
    validate() const;
};

/// Global long-tail clusters: clusters holding at least T_i items, ranked by
/// interval descending (ascending id on ties), first N_C kept. Clusters
/// without an interval estimate are not ranked.
std::vector<ClusterId>
longtail_set(const IntervalSketch& sketch,
             const std::map<ClusterId, size_t>& items_per_cluster,
             const LongTailConfig& cfg);

/// Draws up to N_LT distinct clusters. Each draw picks a remaining candidate
/// with probability proportional to (beta + h)^alpha. With N_LT or fewer
/// candidates, all are returned in input order.
std::vector<ClusterId>
sample_clusters(std::span<const std::pair<ClusterId, int64_t>> candidates,
                const LongTailConfig& cfg);

/// Same sampler driven by a caller-owned engine.
std::vector<ClusterId>
sample_clusters(std::span<const std::pair<ClusterId, int64_t>> candidates,
                size_t count,
                double alpha,
                double beta,
                Rng& rng);

/// Candidates are long-tail clusters with user response h2 >= T_l that are
/// not in `exclude`; the sampler then picks N_LT of them.
std::vector<ClusterId>
select_longtail(std::span<const int64_t> h2,
                const std::vector<ClusterId>& longtail,
                const std::set<ClusterId>& exclude,
                const LongTailConfig& cfg);

}  // namespace trinity
