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

#include "trinity/behavior.h"

#include <json.hpp>

#include "trinity/text_io.h"

namespace trinity {

BehaviorSequence::BehaviorSequence(UserId user, size_t capacity)
    : user_id_(user), capacity_(capacity) {
    if (capacity == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "sequence capacity must be positive");
    }
}

void
BehaviorSequence::push(ItemId item, EventIndex index) {
    if (!entries_.empty() && index < entries_.back().event_index) {
        throw_error(ErrorCode::INVALID_INPUT, "sequence events must arrive in event order");
    }
    entries_.push_back({item, index});
    while (entries_.size() > capacity_) {
        entries_.pop_front();
    }
}

bool
BehaviorSequence::observe(const BehaviorEvent& event) {
    if (!is_qualifying(event)) {
        return false;
    }
    push(event.item_id, event.event_index);
    return true;
}

std::map<UserId, BehaviorSequence>
build_sequences(const std::vector<BehaviorEvent>& events, size_t capacity) {
    std::map<UserId, BehaviorSequence> sequences;
    for (const auto& e : events) {
        auto it = sequences.find(e.user_id);
        if (it == sequences.end()) {
            it = sequences.emplace(e.user_id, BehaviorSequence(e.user_id, capacity)).first;
        }
        it->second.observe(e);
    }
    return sequences;
}

std::string
event_to_json_line(const BehaviorEvent& e) {
    nlohmann::ordered_json j;
    j["user_id"] = e.user_id;
    j["item_id"] = e.item_id;
    j["event_index"] = e.event_index;
    j["playtime_s"] = e.playtime_s;
    j["finished"] = e.finished;
    j["interacted"] = e.interacted;
    return j.dump();
}

BehaviorEvent
event_from_json_line(const std::string& line, const std::string& what) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
        throw_error(ErrorCode::PARSE, what + ": " + ex.what());
    }
    BehaviorEvent e;
    try {
        e.user_id = j.at("user_id").get<UserId>();
        e.item_id = j.at("item_id").get<ItemId>();
        e.event_index = j.at("event_index").get<EventIndex>();
        e.playtime_s = j.at("playtime_s").get<double>();
        e.finished = j.at("finished").get<bool>();
        e.interacted = j.at("interacted").get<bool>();
    } catch (const nlohmann::json::exception& ex) {
        throw_error(ErrorCode::PARSE, what + ": " + ex.what());
    }
    return e;
}

void
write_event_log(const std::string& path, const std::vector<BehaviorEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += event_to_json_line(e);
        out.push_back('\n');
    }
    text::write_file_atomic(path, out);
}

std::vector<BehaviorEvent>
read_event_log(const std::string& path) {
    std::vector<BehaviorEvent> events;
    auto lines = text::read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        events.push_back(event_from_json_line(lines[i], path + ":" + std::to_string(i + 1)));
    }
    return events;
}

}  // namespace trinity
