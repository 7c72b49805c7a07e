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

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "trinity/common.h"

namespace trinity {

/// Minimum play time (seconds) for a view to count as positive feedback.
inline constexpr double kQualifyingPlaytimeS = 10.0;

struct BehaviorEvent {
    UserId user_id = 0;
    ItemId item_id = 0;
    EventIndex event_index = 0;
    double playtime_s = 0.0;
    bool finished = false;
    bool interacted = false;

    bool
    operator==(const BehaviorEvent&) const = default;
};

/// playtime >= 10s, a finished play, or any interaction.
inline bool
is_qualifying(const BehaviorEvent& e) {
    return e.playtime_s >= kQualifyingPlaytimeS || e.finished || e.interacted;
}

struct SequenceEntry {
    ItemId item_id = 0;
    EventIndex event_index = 0;

    bool
    operator==(const SequenceEntry&) const = default;
};

/// Per-user capped history of qualifying items, oldest first. Pushing past
/// capacity evicts the oldest entry.
class BehaviorSequence {
public:
    static constexpr size_t kDefaultCapacity = 2500;

    explicit BehaviorSequence(UserId user = 0, size_t capacity = kDefaultCapacity);

    UserId
    user_id() const {
        return user_id_;
    }
    size_t
    capacity() const {
        return capacity_;
    }
    size_t
    size() const {
        return entries_.size();
    }
    bool
    empty() const {
        return entries_.empty();
    }
    const std::deque<SequenceEntry>&
    entries() const {
        return entries_;
    }
    const SequenceEntry&
    operator[](size_t i) const {
        return entries_[i];
    }

    void
    push(ItemId item, EventIndex index);

    /// Appends the event if it qualifies; returns whether it did.
    bool
    observe(const BehaviorEvent& event);

private:
    UserId user_id_;
    size_t capacity_;
    std::deque<SequenceEntry> entries_;
};

/// Qualifying-only sequences for every user in the log (log order).
std::map<UserId, BehaviorSequence>
build_sequences(const std::vector<BehaviorEvent>& events,
                size_t capacity = BehaviorSequence::kDefaultCapacity);

/// JSON-lines event log with fields
/// user_id, item_id, event_index, playtime_s, finished, interacted.
void
write_event_log(const std::string& path, const std::vector<BehaviorEvent>& events);

std::vector<BehaviorEvent>
read_event_log(const std::string& path);

std::string
event_to_json_line(const BehaviorEvent& event);

BehaviorEvent
event_from_json_line(const std::string& line, const std::string& what);

}  // namespace trinity
