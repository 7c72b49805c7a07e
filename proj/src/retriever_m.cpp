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

#include "trinity/retriever_m.h"

#include <algorithm>
#include <numeric>
#include <set>

namespace trinity {

namespace {

int64_t
primary_total(const std::map<ClusterId, int64_t>& children) {
    return std::accumulate(children.begin(), children.end(), int64_t{0},
                           [](int64_t acc, const auto& kv) { return acc + kv.second; });
}

bool
is_phase1_eligible(const std::map<ClusterId, int64_t>& children, const TrinityMConfig& cfg) {
    if (children.empty() || primary_total(children) < cfg.primary_threshold) {
        return false;
    }
    auto above = [&](const auto& kv) { return kv.second >= cfg.secondary_threshold; };
    return cfg.require_all_children ? std::all_of(children.begin(), children.end(), above)
                                    : std::any_of(children.begin(), children.end(), above);
}

class Selection {
public:
    void
    add(MultiInterestPick pick) {
        if (members_.insert(pick.secondary).second) {
            picks_.push_back(pick);
        }
    }
    bool
    contains(ClusterId c) const {
        return members_.contains(c);
    }
    size_t
    size() const {
        return picks_.size();
    }
    std::vector<MultiInterestPick>
    downsample(size_t n, Rng& rng) const {
        return random_choose(picks_, n, rng);
    }
    const std::vector<MultiInterestPick>&
    picks() const {
        return picks_;
    }

private:
    std::vector<MultiInterestPick> picks_;
    std::set<ClusterId> members_;
};

}  // namespace

void
TrinityMConfig::validate() const {
    if (secondary_threshold < 1 || primary_threshold < secondary_threshold) {
        throw_error(ErrorCode::INVALID_INPUT, "thresholds must satisfy T_p >= T_s >= 1");
    }
    if (output_size < 1) {
        throw_error(ErrorCode::INVALID_INPUT, "N_M must be at least 1");
    }
}

std::vector<ClusterId>
phase1_eligible_primaries(const StructuralTree& tree, const TrinityMConfig& cfg) {
    std::vector<ClusterId> out;
    for (const auto& [primary, children] : tree) {
        if (is_phase1_eligible(children, cfg)) {
            out.push_back(primary);
        }
    }
    return out;
}

std::vector<MultiInterestPick>
select_multi_interest_traced(const StructuralTree& tree, const TrinityMConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.rng_seed);
    Selection selected;
    const size_t target = cfg.output_size;

    // Phase 1: one random child for every strong, evenly consumed primary.
    for (const auto& [primary, children] : tree) {
        if (!is_phase1_eligible(children, cfg)) {
            continue;
        }
        std::uniform_int_distribution<size_t> pick(0, children.size() - 1);
        auto it = std::next(children.begin(), static_cast<std::ptrdiff_t>(pick(rng)));
        selected.add({it->first, primary, SelectionPhase::DISPERSED});
    }
    if (selected.size() >= target) {
        return selected.downsample(target, rng);
    }

    // Phase 2: largest not-yet-selected child of every strong primary.
    for (const auto& [primary, children] : tree) {
        if (children.empty() || primary_total(children) < cfg.primary_threshold) {
            continue;
        }
        const std::pair<const ClusterId, int64_t>* best = nullptr;
        for (const auto& kv : children) {
            if (selected.contains(kv.first)) {
                continue;
            }
            if (best == nullptr || kv.second > best->second) {
                best = &kv;
            }
        }
        if (best != nullptr) {
            selected.add({best->first, primary, SelectionPhase::PRIMARY_ARGMAX});
        }
    }
    if (selected.size() >= target) {
        return selected.downsample(target, rng);
    }

    // Phase 3: globally largest secondaries until full or exhausted.
    std::vector<std::pair<ClusterId, int64_t>> ranked;
    for (const auto& kv : secondary_totals(tree)) {
        ranked.push_back(kv);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [secondary, count] : ranked) {
        if (selected.size() >= target) {
            break;
        }
        selected.add({secondary, -1, SelectionPhase::GLOBAL_FILL});
    }
    return selected.picks();
}

std::vector<ClusterId>
select_multi_interest(const StructuralTree& tree, const TrinityMConfig& cfg) {
    std::vector<ClusterId> out;
    for (const auto& pick : select_multi_interest_traced(tree, cfg)) {
        out.push_back(pick.secondary);
    }
    return out;
}

}  // namespace trinity
