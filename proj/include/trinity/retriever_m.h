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

#include <cstdint>
#include <vector>

#include "trinity/histogram.h"

namespace trinity {

struct TrinityMConfig {
    int64_t primary_threshold = 30;    // T_p
    int64_t secondary_threshold = 10;  // T_s
    size_t output_size = 10;           // N_M
    uint64_t rng_seed = 0;
    /// Phase-1 eligibility: every child of the primary must reach the
    /// secondary threshold. When false, one qualifying child suffices.
    bool require_all_children = true;

    void
    validate() const;
};

/// Which step of the selection admitted a cluster.
enum class SelectionPhase : uint8_t {
    DISPERSED = 1,  // one random child per strong primary
    PRIMARY_ARGMAX = 2,  // largest remaining child per strong primary
    GLOBAL_FILL = 3,  // globally largest secondaries
};

struct MultiInterestPick {
    ClusterId secondary = 0;
    ClusterId primary = -1;  // -1 for global fill
    SelectionPhase phase = SelectionPhase::DISPERSED;

    bool
    operator==(const MultiInterestPick&) const = default;
};

/// Primaries admitted by the dispersed phase, ascending.
std::vector<ClusterId>
phase1_eligible_primaries(const StructuralTree& tree, const TrinityMConfig& cfg);

/// Full trace of a selection, in output order.
std::vector<MultiInterestPick>
select_multi_interest_traced(const StructuralTree& tree, const TrinityMConfig& cfg);

/// Secondary cluster set for multi-interest retrieval. Size is N_M unless the
/// tree holds fewer distinct secondaries, in which case all of them are
/// returned.
std::vector<ClusterId>
select_multi_interest(const StructuralTree& tree, const TrinityMConfig& cfg);

}  // namespace trinity
