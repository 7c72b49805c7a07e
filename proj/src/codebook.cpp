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

#include "trinity/codebook.h"

#include <limits>
#include <map>

#include "trinity/text_io.h"

namespace trinity {

namespace {

constexpr const char* kCodebookHeader = "#trinity-codebook v1";

}  // namespace

ClusterCodebook::ClusterCodebook(size_t dim,
                                 size_t num_primary,
                                 size_t num_secondary,
                                 double ema_decay)
    : dim_(dim),
      num_primary_(num_primary),
      num_secondary_(num_secondary),
      ema_decay_(ema_decay),
      primary_centroids_(dim * num_primary, 0.0),
      secondary_centroids_(dim * num_secondary, 0.0),
      primary_counts_(num_primary, 0.0),
      secondary_counts_(num_secondary, 0.0),
      primary_used_(num_primary, false),
      secondary_used_(num_secondary, false) {
    if (dim == 0 || num_primary == 0 || num_secondary == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "codebook dimensions must be positive");
    }
    if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "ema_decay must lie in [0, 1)");
    }
}

std::span<const double>
ClusterCodebook::primary(ClusterId j) const {
    return {primary_centroids_.data() + static_cast<size_t>(j) * dim_, dim_};
}

std::span<const double>
ClusterCodebook::secondary(ClusterId k) const {
    return {secondary_centroids_.data() + static_cast<size_t>(k) * dim_, dim_};
}

std::span<double>
ClusterCodebook::mutable_primary(ClusterId j) {
    return {primary_centroids_.data() + static_cast<size_t>(j) * dim_, dim_};
}

std::span<double>
ClusterCodebook::mutable_secondary(ClusterId k) {
    return {secondary_centroids_.data() + static_cast<size_t>(k) * dim_, dim_};
}

void
ClusterCodebook::check_dim(std::span<const double> embedding) const {
    if (embedding.size() != dim_) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "embedding dimension " + std::to_string(embedding.size()) +
                        " does not match codebook dimension " + std::to_string(dim_));
    }
}

ClusterId
ClusterCodebook::nearest(std::span<const double> embedding,
                         const std::vector<double>& centroids,
                         size_t count,
                         size_t start) const {
    const double* x = embedding.data();
    // Same summation order as squared_distance. Partial sums of non-negative
    // terms never decrease, so a partial sum above the best distance cannot
    // win. A start index close to the answer makes that cut-off bite early.
    auto distance_below = [&](size_t c, double bound, double& dist) {
        const double* p = centroids.data() + c * dim_;
        dist = 0.0;
        for (size_t i = 0; i < dim_; ++i) {
            const double diff = x[i] - p[i];
            dist += diff * diff;
            if ((i & 7) == 7 && dist > bound) {
                return false;
            }
        }
        return dist <= bound;
    };
    if (start >= count) {
        start = 0;
    }
    size_t best = start;
    double best_dist = std::numeric_limits<double>::infinity();
    distance_below(start, best_dist, best_dist);
    for (size_t c = 0; c < count; ++c) {
        double dist = 0.0;
        if (c == start || !distance_below(c, best_dist, dist)) {
            continue;
        }
        // the lowest index wins ties
        if (dist < best_dist || c < best) {
            best_dist = dist;
            best = c;
        }
    }
    return static_cast<ClusterId>(best);
}

ClusterId
ClusterCodebook::nearest_primary(std::span<const double> embedding) const {
    check_dim(embedding);
    return nearest(embedding, primary_centroids_, num_primary_);
}

ClusterId
ClusterCodebook::nearest_secondary(std::span<const double> embedding) const {
    check_dim(embedding);
    return nearest(embedding, secondary_centroids_, num_secondary_);
}

Assignment
ClusterCodebook::assign(std::span<const double> embedding) const {
    check_dim(embedding);
    return {nearest(embedding, primary_centroids_, num_primary_),
            nearest(embedding, secondary_centroids_, num_secondary_)};
}

Assignment
ClusterCodebook::assign(std::span<const double> embedding, Assignment hint) const {
    check_dim(embedding);
    return {nearest(embedding, primary_centroids_, num_primary_,
                    static_cast<size_t>(std::max<ClusterId>(hint.primary, 0))),
            nearest(embedding, secondary_centroids_, num_secondary_,
                    static_cast<size_t>(std::max<ClusterId>(hint.secondary, 0)))};
}

void
ClusterCodebook::update_ema(std::span<const CodebookUpdate> updates) {
    // Accumulate per-cluster sums first so every touched centroid moves
    // once per call toward the batch mean.
    std::map<ClusterId, std::pair<std::vector<double>, size_t>> primary_sums;
    std::map<ClusterId, std::pair<std::vector<double>, size_t>> secondary_sums;
    auto accumulate = [this](auto& sums, ClusterId id, std::span<const double> v) {
        auto& [sum, n] = sums[id];
        if (sum.empty()) {
            sum.assign(dim_, 0.0);
        }
        for (size_t i = 0; i < dim_; ++i) {
            sum[i] += v[i];
        }
        ++n;
    };
    for (const auto& u : updates) {
        check_dim(u.embedding);
        if (u.primary < 0 || static_cast<size_t>(u.primary) >= num_primary_ || u.secondary < 0 ||
            static_cast<size_t>(u.secondary) >= num_secondary_) {
            throw_error(ErrorCode::INVALID_INPUT,
                        "cluster id out of range: (" + std::to_string(u.primary) + ", " +
                            std::to_string(u.secondary) + ")");
        }
        accumulate(primary_sums, u.primary, u.embedding);
        accumulate(secondary_sums, u.secondary, u.embedding);
    }

    const double keep = ema_decay_;
    const double take = 1.0 - ema_decay_;
    auto apply = [&](auto& sums, std::vector<double>& centroids, std::vector<double>& counts,
                     std::vector<bool>& used) {
        for (auto& [id, entry] : sums) {
            auto& [sum, n] = entry;
            double* c = centroids.data() + static_cast<size_t>(id) * dim_;
            for (size_t i = 0; i < dim_; ++i) {
                c[i] = keep * c[i] + take * (sum[i] / static_cast<double>(n));
            }
            counts[id] = keep * counts[id] + take * static_cast<double>(n);
            used[id] = true;
        }
    };
    apply(primary_sums, primary_centroids_, primary_counts_, primary_used_);
    apply(secondary_sums, secondary_centroids_, secondary_counts_, secondary_used_);
}

void
ClusterCodebook::begin_epoch() {
    std::fill(primary_used_.begin(), primary_used_.end(), false);
    std::fill(secondary_used_.begin(), secondary_used_.end(), false);
}

size_t
ClusterCodebook::reseed_dead_clusters(const std::vector<std::span<const double>>& candidates,
                                      Rng& rng) {
    if (candidates.empty()) {
        return 0;
    }
    std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
    size_t reseeded = 0;
    auto reseed = [&](std::vector<double>& centroids, std::vector<double>& counts,
                      const std::vector<bool>& used, size_t count) {
        for (size_t c = 0; c < count; ++c) {
            if (used[c]) {
                continue;
            }
            auto src = candidates[pick(rng)];
            check_dim(src);
            std::copy(src.begin(), src.end(), centroids.begin() + c * dim_);
            counts[c] = 0.0;
            ++reseeded;
        }
    };
    reseed(primary_centroids_, primary_counts_, primary_used_, num_primary_);
    reseed(secondary_centroids_, secondary_counts_, secondary_used_, num_secondary_);
    return reseeded;
}

void
ClusterCodebook::init_from(const std::vector<std::span<const double>>& candidates, Rng& rng) {
    if (candidates.empty()) {
        throw_error(ErrorCode::INVALID_INPUT, "cannot initialize codebook from zero embeddings");
    }
    auto fill = [&](std::vector<double>& centroids, size_t count) {
        // distinct rows while they last, then with repetition
        auto order = random_choose_indices(candidates.size(), count, rng);
        std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
        for (size_t c = 0; c < count; ++c) {
            auto src = candidates[c < order.size() ? order[c] : pick(rng)];
            check_dim(src);
            std::copy(src.begin(), src.end(), centroids.begin() + c * dim_);
        }
    };
    fill(primary_centroids_, num_primary_);
    fill(secondary_centroids_, num_secondary_);
    std::fill(primary_counts_.begin(), primary_counts_.end(), 0.0);
    std::fill(secondary_counts_.begin(), secondary_counts_.end(), 0.0);
}

void
ClusterCodebook::save(const std::string& path) const {
    std::string out = std::string(kCodebookHeader) + " d=" + std::to_string(dim_) +
                      " J=" + std::to_string(num_primary_) + " K=" + std::to_string(num_secondary_) +
                      " decay=" + text::format_double(ema_decay_) + "\n";
    for (size_t j = 0; j < num_primary_; ++j) {
        out += "p\t" + std::to_string(j) + "\t" + text::format_double(primary_counts_[j]) + "\t" +
               text::format_vector(primary(static_cast<ClusterId>(j))) + "\n";
    }
    for (size_t k = 0; k < num_secondary_; ++k) {
        out += "s\t" + std::to_string(k) + "\t" + text::format_double(secondary_counts_[k]) + "\t" +
               text::format_vector(secondary(static_cast<ClusterId>(k))) + "\n";
    }
    text::write_file_atomic(path, out);
}

ClusterCodebook
ClusterCodebook::load(const std::string& path) {
    auto lines = text::read_lines(path);
    if (lines.empty() || !lines[0].starts_with(kCodebookHeader)) {
        throw_error(ErrorCode::PARSE, path + ":1: missing codebook header");
    }
    size_t dim = 0, num_primary = 0, num_secondary = 0;
    double decay = kDefaultEmaDecay;
    for (auto field : text::split(lines[0], ' ')) {
        auto kv = text::split(field, '=');
        if (kv.size() != 2) {
            continue;
        }
        std::string what = path + ":1";
        if (kv[0] == "d") {
            dim = static_cast<size_t>(text::parse_int(kv[1], what));
        } else if (kv[0] == "J") {
            num_primary = static_cast<size_t>(text::parse_int(kv[1], what));
        } else if (kv[0] == "K") {
            num_secondary = static_cast<size_t>(text::parse_int(kv[1], what));
        } else if (kv[0] == "decay") {
            decay = text::parse_double(kv[1], what);
        }
    }
    ClusterCodebook codebook(dim, num_primary, num_secondary, decay);
    size_t seen = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        std::string what = path + ":" + std::to_string(i + 1);
        auto parts = text::split(lines[i], '\t');
        if (parts.size() != 4 || (parts[0] != "p" && parts[0] != "s")) {
            throw_error(ErrorCode::PARSE, what + ": malformed codebook record");
        }
        bool is_primary = parts[0] == "p";
        auto id = text::parse_int(parts[1], what);
        size_t limit = is_primary ? num_primary : num_secondary;
        if (id < 0 || static_cast<size_t>(id) >= limit) {
            throw_error(ErrorCode::PARSE, what + ": cluster id out of range");
        }
        auto values = text::parse_vector(parts[3], what);
        if (values.size() != dim) {
            throw_error(ErrorCode::PARSE, what + ": centroid dimension mismatch");
        }
        auto target = is_primary ? codebook.mutable_primary(static_cast<ClusterId>(id))
                                 : codebook.mutable_secondary(static_cast<ClusterId>(id));
        std::copy(values.begin(), values.end(), target.begin());
        (is_primary ? codebook.primary_counts_ : codebook.secondary_counts_)[id] =
            text::parse_double(parts[2], what);
        ++seen;
    }
    if (seen != num_primary + num_secondary) {
        throw_error(ErrorCode::PARSE, path + ": expected " + std::to_string(num_primary + num_secondary) +
                                          " centroids, found " + std::to_string(seen));
    }
    return codebook;
}

bool
ClusterCodebook::operator==(const ClusterCodebook& other) const {
    return dim_ == other.dim_ && num_primary_ == other.num_primary_ &&
           num_secondary_ == other.num_secondary_ && ema_decay_ == other.ema_decay_ &&
           primary_centroids_ == other.primary_centroids_ &&
           secondary_centroids_ == other.secondary_centroids_ &&
           primary_counts_ == other.primary_counts_ && secondary_counts_ == other.secondary_counts_;
}

Assignment
assign_item(std::span<const double> embedding, const ClusterCodebook& codebook) {
    return codebook.assign(embedding);
}

ClusterCodebook
update_codebook_ema(ClusterCodebook codebook, std::span<const CodebookUpdate> updates) {
    codebook.update_ema(updates);
    return codebook;
}

}  // namespace trinity
