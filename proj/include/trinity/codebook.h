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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trinity/common.h"

namespace trinity {

struct Assignment {
    ClusterId primary = 0;
    ClusterId secondary = 0;

    bool
    operator==(const Assignment&) const = default;
};

/// One embedding routed to a (primary, secondary) pair, as consumed by the
/// moving-average update.
struct CodebookUpdate {
    std::span<const double> embedding;
    ClusterId primary = 0;
    ClusterId secondary = 0;
};

/// Two-level vector-quantization codebook. Both levels are searched
/// independently; the levels are only related through the items they share.
class ClusterCodebook {
public:
    static constexpr size_t kDefaultPrimary = 128;
    static constexpr size_t kDefaultSecondary = 1024;
    static constexpr double kDefaultEmaDecay = 0.99;

    ClusterCodebook(size_t dim,
                    size_t num_primary = kDefaultPrimary,
                    size_t num_secondary = kDefaultSecondary,
                    double ema_decay = kDefaultEmaDecay);

    size_t
    dim() const {
        return dim_;
    }
    size_t
    num_primary() const {
        return num_primary_;
    }
    size_t
    num_secondary() const {
        return num_secondary_;
    }
    double
    ema_decay() const {
        return ema_decay_;
    }

    std::span<const double>
    primary(ClusterId j) const;
    std::span<const double>
    secondary(ClusterId k) const;
    std::span<double>
    mutable_primary(ClusterId j);
    std::span<double>
    mutable_secondary(ClusterId k);

    double
    primary_count(ClusterId j) const {
        return primary_counts_.at(j);
    }
    double
    secondary_count(ClusterId k) const {
        return secondary_counts_.at(k);
    }

    /// Nearest centroid at each level by squared Euclidean distance; the
    /// lowest index wins ties.
    Assignment
    assign(std::span<const double> embedding) const;

    /// Same result as assign(); the scan starts from `hint`, which only
    /// speeds it up.
    Assignment
    assign(std::span<const double> embedding, Assignment hint) const;

    ClusterId
    nearest_primary(std::span<const double> embedding) const;
    ClusterId
    nearest_secondary(std::span<const double> embedding) const;

    /// Moves every touched centroid toward the mean of the embeddings routed
    /// to it: c <- decay * c + (1 - decay) * mean. Counts follow the same
    /// recurrence with the batch member count. Untouched clusters are left
    /// bit-identical.
    void
    update_ema(std::span<const CodebookUpdate> updates);

    /// Clears the per-epoch usage flags used for dead-cluster detection.
    void
    begin_epoch();

    /// Re-seeds every cluster that received no update since begin_epoch() to
    /// a randomly picked row of `candidates`. Returns the number re-seeded.
    size_t
    reseed_dead_clusters(const std::vector<std::span<const double>>& candidates, Rng& rng);

    /// Initializes all centroids from randomly picked candidate rows.
    void
    init_from(const std::vector<std::span<const double>>& candidates, Rng& rng);

    void
    save(const std::string& path) const;
    static ClusterCodebook
    load(const std::string& path);

    /// Compares centroids, counts and decay; per-epoch usage flags are
    /// transient and ignored.
    bool
    operator==(const ClusterCodebook& other) const;

private:
    ClusterId
    nearest(std::span<const double> embedding,
            const std::vector<double>& centroids,
            size_t count,
            size_t start = 0) const;
    void
    check_dim(std::span<const double> embedding) const;

    size_t dim_;
    size_t num_primary_;
    size_t num_secondary_;
    double ema_decay_;
    std::vector<double> primary_centroids_;
    std::vector<double> secondary_centroids_;
    std::vector<double> primary_counts_;
    std::vector<double> secondary_counts_;
    std::vector<bool> primary_used_;
    std::vector<bool> secondary_used_;
};

using CodebookSnapshot = std::shared_ptr<const ClusterCodebook>;

/// Free-function form of ClusterCodebook::assign.
Assignment
assign_item(std::span<const double> embedding, const ClusterCodebook& codebook);

/// Value-returning form of ClusterCodebook::update_ema.
ClusterCodebook
update_codebook_ema(ClusterCodebook codebook, std::span<const CodebookUpdate> updates);

}  // namespace trinity
