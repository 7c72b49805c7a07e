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

#include "trinity/trainer.h"

#include <algorithm>
#include <cmath>

namespace trinity {

namespace {

// log(1 + exp(z)) without overflow
double
softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Floyd's algorithm: `k` distinct positions from [0, n), ascending.
std::vector<size_t>
sample_positions(size_t n, size_t k, Rng& rng) {
    std::vector<size_t> out;
    if (k >= n) {
        out.resize(n);
        for (size_t i = 0; i < n; ++i) {
            out[i] = i;
        }
        return out;
    }
    out.reserve(k);
    for (size_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<size_t> pick(0, j);
        size_t t = pick(rng);
        if (std::find(out.begin(), out.end(), t) != out.end()) {
            out.push_back(j);
        } else {
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

void
TrainerConfig::validate() const {
    if (dim == 0 || batch_size == 0 || max_behaviors == 0 || window == 0) {
        throw_error(ErrorCode::INVALID_INPUT,
                    "dim, batch_size, max_behaviors and window must be positive");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw_error(ErrorCode::INVALID_INPUT, "learning_rate must be finite and non-negative");
    }
    if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
        throw_error(ErrorCode::INVALID_INPUT, "ema_decay must lie in [0, 1)");
    }
}

double
sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

Vector
pool_user_representation(std::span<const std::span<const double>> behaviors) {
    if (behaviors.empty()) {
        throw_error(ErrorCode::INVALID_INPUT, "cannot pool an empty behavior list");
    }
    const size_t dim = behaviors.front().size();
    Vector pooled(dim, 0.0);
    for (const auto& b : behaviors) {
        if (b.size() != dim) {
            throw_error(ErrorCode::INVALID_INPUT, "behavior embeddings differ in dimension");
        }
        for (size_t i = 0; i < dim; ++i) {
            pooled[i] += b[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(behaviors.size());
    for (auto& v : pooled) {
        v *= inv;
    }
    return pooled;
}

BceResult
bce_loss_and_gradient(std::span<const double> user,
                      std::span<const std::span<const double>> targets,
                      double label) {
    if (!all_finite(user) || !std::isfinite(label)) {
        throw_error(ErrorCode::INVALID_INPUT, "non-finite input to bce loss");
    }
    BceResult res;
    res.grad_user.assign(user.size(), 0.0);
    for (const auto& target : targets) {
        if (target.size() != user.size()) {
            throw_error(ErrorCode::INVALID_INPUT, "bce operands differ in dimension");
        }
        if (!all_finite(target)) {
            throw_error(ErrorCode::INVALID_INPUT, "non-finite input to bce loss");
        }
        double z = dot(user, target);
        res.loss += softplus(z) - label * z;
        double dz = sigmoid(z) - label;
        Vector grad_target(user.size());
        for (size_t i = 0; i < user.size(); ++i) {
            res.grad_user[i] += dz * target[i];
            grad_target[i] = dz * user[i];
        }
        res.grad_targets.push_back(std::move(grad_target));
    }
    return res;
}

double
bce_loss(std::span<const double> user,
         std::span<const std::span<const double>> targets,
         double label) {
    return bce_loss_and_gradient(user, targets, label).loss;
}

bool
VectorSampleSource::next(TrainingSample& out) {
    if (pos_ >= samples_.size()) {
        return false;
    }
    out = samples_[pos_++];
    return true;
}

EventSampleSource::EventSampleSource(const std::vector<BehaviorEvent>& events,
                                     size_t window,
                                     size_t max_behaviors,
                                     uint64_t seed)
    : events_(events), window_(window), max_behaviors_(max_behaviors), rng_(seed) {
}

bool
EventSampleSource::next(TrainingSample& out) {
    while (pos_ < events_.size()) {
        const auto& e = events_[pos_++];
        auto it = history_.find(e.user_id);
        if (it == history_.end()) {
            it = history_.emplace(e.user_id, BehaviorSequence(e.user_id, window_)).first;
        }
        auto& seq = it->second;
        bool emitted = false;
        if (!seq.empty()) {
            out.user_id = e.user_id;
            out.target_item = e.item_id;
            out.label = is_qualifying(e) ? 1 : 0;
            out.weight = 1.0;
            out.playtime_s = e.playtime_s;
            out.behavior_items.clear();
            for (size_t p : sample_positions(seq.size(), max_behaviors_, rng_)) {
                out.behavior_items.push_back(seq[p].item_id);
            }
            emitted = true;
        }
        seq.observe(e);
        if (emitted) {
            return true;
        }
    }
    return false;
}

TwoTowerTrainer::TwoTowerTrainer(ItemEmbeddingTable& table,
                                 ClusterCodebook* codebook,
                                 AssignmentStore* store,
                                 TrainerConfig cfg)
    : table_(table), codebook_(codebook), store_(store), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    if (cfg_.use_cluster_terms) {
        if (codebook_ == nullptr || store_ == nullptr) {
            throw_error(ErrorCode::INVALID_INPUT, "cluster terms need a codebook and a store");
        }
        if (codebook_->dim() != table_.dim()) {
            throw_error(ErrorCode::INVALID_INPUT, "codebook and table dimensions differ");
        }
    }
}

void
TwoTowerTrainer::initialize_codebook() {
    std::vector<std::span<const double>> rows;
    rows.reserve(table_.size());
    for (size_t i = 0; i < table_.size(); ++i) {
        rows.push_back(table_.row_at(i));
    }
    codebook_->init_from(rows, rng_);
}

double
TwoTowerTrainer::batch_loss(std::span<const TrainingSample> batch) const {
    double total = 0.0;
    std::vector<std::span<const double>> behaviors;
    for (const auto& s : batch) {
        behaviors.clear();
        for (ItemId b : s.behavior_items) {
            behaviors.push_back(table_.row(b));
        }
        Vector user = pool_user_representation(behaviors);
        auto x = table_.row(s.target_item);
        std::vector<std::span<const double>> targets{x};
        if (cfg_.use_cluster_terms) {
            auto a = codebook_->assign(x);
            targets.push_back(codebook_->primary(a.primary));
            targets.push_back(codebook_->secondary(a.secondary));
        }
        total += s.weight * bce_loss(user, targets, s.label);
    }
    return total;
}

double
TwoTowerTrainer::train_step(std::span<const TrainingSample> batch) {
    const size_t dim = table_.dim();
    if (grad_.size() != table_.size() * dim) {
        grad_.assign(table_.size() * dim, 0.0);
        touched_flag_.assign(table_.size(), 0);
        last_assignment_.assign(table_.size(), Assignment{});
    }
    auto grad_for = [&](size_t pos) {
        if (!touched_flag_[pos]) {
            touched_flag_[pos] = 1;
            touched_.push_back(pos);
        }
        return grad_.data() + pos * dim;
    };
    std::map<size_t, Assignment> routed;
    double total = 0.0;
    std::vector<std::span<const double>> behaviors;
    std::vector<size_t> behavior_pos;
    const std::vector<ItemId>* pooled_from = nullptr;
    Vector user;
    Vector user_grad(dim, 0.0);  // weighted sum over samples sharing `user`

    // behaviors get the mean-pooling share of the summed user gradient
    auto spread_user_grad = [&] {
        if (pooled_from == nullptr) {
            return;
        }
        const double share = 1.0 / static_cast<double>(behavior_pos.size());
        for (size_t pos : behavior_pos) {
            double* gb = grad_for(pos);
            for (size_t i = 0; i < dim; ++i) {
                gb[i] += share * user_grad[i];
            }
        }
        std::fill(user_grad.begin(), user_grad.end(), 0.0);
    };

    for (const auto& s : batch) {
        // negatives are copies of their positive, so the pooled user is reused
        if (pooled_from == nullptr || *pooled_from != s.behavior_items) {
            spread_user_grad();
            behaviors.clear();
            behavior_pos.clear();
            for (ItemId b : s.behavior_items) {
                size_t pos = table_.position(b);
                if (pos == ItemEmbeddingTable::npos) {
                    throw_error(ErrorCode::INVALID_INPUT, "no embedding for behavior item " +
                                                              std::to_string(b));
                }
                behavior_pos.push_back(pos);
                behaviors.push_back(table_.row_at(pos));
            }
            user = pool_user_representation(behaviors);
            pooled_from = &s.behavior_items;
        }
        size_t target_pos = table_.position(s.target_item);
        if (target_pos == ItemEmbeddingTable::npos) {
            throw_error(ErrorCode::INVALID_INPUT, "no embedding for target item " +
                                                      std::to_string(s.target_item));
        }
        auto x = table_.row_at(target_pos);
        std::vector<std::span<const double>> targets{x};
        if (cfg_.use_cluster_terms) {
            auto found = routed.find(target_pos);
            Assignment a = found != routed.end()
                               ? found->second
                               : codebook_->assign(x, last_assignment_[target_pos]);
            last_assignment_[target_pos] = a;
            targets.push_back(codebook_->primary(a.primary));
            targets.push_back(codebook_->secondary(a.secondary));
            routed.emplace(target_pos, a);
        }
        auto res = bce_loss_and_gradient(user, targets, s.label);
        total += s.weight * res.loss;

        // centroid gradients are discarded; the codebook moves by EMA only
        double* gx = grad_for(target_pos);
        for (size_t i = 0; i < dim; ++i) {
            gx[i] += s.weight * res.grad_targets.front()[i];
        }
        for (size_t i = 0; i < dim; ++i) {
            user_grad[i] += s.weight * res.grad_user[i];
        }
    }
    spread_user_grad();

    const double lr = cfg_.learning_rate;
    for (size_t pos : touched_) {
        auto row = table_.mutable_row_at(pos);
        double* g = grad_.data() + pos * dim;
        for (size_t i = 0; i < dim; ++i) {
            row[i] -= lr * g[i];
            g[i] = 0.0;
        }
        touched_flag_[pos] = 0;
    }
    touched_.clear();

    if (cfg_.use_cluster_terms && !routed.empty()) {
        std::vector<CodebookUpdate> updates;
        updates.reserve(routed.size());
        for (const auto& [pos, a] : routed) {
            updates.push_back({table_.row_at(pos), a.primary, a.secondary});
            store_->set(table_.items()[pos], a);
        }
        codebook_->update_ema(updates);
    }
    return total;
}

void
TwoTowerTrainer::append_with_negatives(const TrainingSample& sample,
                                       std::vector<TrainingSample>& batch) {
    batch.push_back(sample);
    if (sample.label != 1 || table_.size() < 2) {
        return;
    }
    size_t target_pos = table_.position(sample.target_item);
    std::uniform_int_distribution<size_t> pick(0, table_.size() - 1);
    for (size_t n = 0; n < cfg_.negatives_per_positive; ++n) {
        size_t pos = pick(rng_);
        while (pos == target_pos) {
            pos = pick(rng_);
        }
        TrainingSample neg = sample;
        neg.target_item = table_.items()[pos];
        neg.label = 0;
        batch.push_back(std::move(neg));
    }
}

EpochMetrics
TwoTowerTrainer::train_epoch(SampleSource& source) {
    EpochMetrics metrics;
    if (cfg_.use_cluster_terms) {
        codebook_->begin_epoch();
    }
    std::vector<TrainingSample> batch;
    TrainingSample sample;
    auto flush = [&] {
        if (batch.empty()) {
            return;
        }
        double loss = train_step(batch);
        metrics.batch_losses.push_back(loss / static_cast<double>(batch.size()));
        metrics.samples += batch.size();
        batch.clear();
    };
    while (source.next(sample)) {
        append_with_negatives(sample, batch);
        if (batch.size() >= cfg_.batch_size) {
            flush();
        }
    }
    flush();
    if (metrics.samples == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "training stream is empty");
    }
    if (cfg_.use_cluster_terms) {
        std::vector<std::span<const double>> rows;
        rows.reserve(table_.size());
        for (size_t i = 0; i < table_.size(); ++i) {
            rows.push_back(table_.row_at(i));
        }
        metrics.reseeded_clusters = codebook_->reseed_dead_clusters(rows, rng_);
        refresh_assignments();
    }
    return metrics;
}

void
TwoTowerTrainer::refresh_assignments() {
    const bool hinted = last_assignment_.size() == table_.size();
    for (size_t i = 0; i < table_.size(); ++i) {
        auto a = hinted ? codebook_->assign(table_.row_at(i), last_assignment_[i])
                        : codebook_->assign(table_.row_at(i));
        if (hinted) {
            last_assignment_[i] = a;
        }
        store_->set(table_.items()[i], a);
    }
}

EpochMetrics
train_epoch(SampleSource& source,
            ItemEmbeddingTable& table,
            ClusterCodebook& codebook,
            AssignmentStore& store,
            const TrainerConfig& cfg) {
    TwoTowerTrainer trainer(table, &codebook, &store, cfg);
    return trainer.train_epoch(source);
}

double
two_tower_score(const ItemEmbeddingTable& table, std::span<const ItemId> behaviors, ItemId item) {
    std::vector<std::span<const double>> rows;
    rows.reserve(behaviors.size());
    for (ItemId b : behaviors) {
        rows.push_back(table.row(b));
    }
    Vector user = pool_user_representation(rows);
    return dot(user, table.row(item));
}

}  // namespace trinity
