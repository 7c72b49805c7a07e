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

#include "trinity/embedding_table.h"

#include <algorithm>
#include <cmath>

#include "trinity/text_io.h"

namespace trinity {

namespace {

constexpr const char* kEmbeddingHeader = "#trinity-embeddings v1";

}  // namespace

ItemEmbeddingTable::ItemEmbeddingTable(size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw_error(ErrorCode::INVALID_INPUT, "embedding dimension must be positive");
    }
}

ItemEmbeddingTable
ItemEmbeddingTable::random(std::vector<ItemId> items, size_t dim, uint64_t seed) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    ItemEmbeddingTable table(dim);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
    Vector row(dim);
    for (ItemId item : items) {
        for (auto& v : row) {
            v = normal(rng);
        }
        table.append(item, row);
    }
    return table;
}

size_t
ItemEmbeddingTable::position(ItemId item) const {
    auto it = index_.find(item);
    return it == index_.end() ? npos : it->second;
}

std::span<const double>
ItemEmbeddingTable::row(ItemId item) const {
    size_t pos = position(item);
    if (pos == npos) {
        throw_error(ErrorCode::INVALID_INPUT, "no embedding for item " + std::to_string(item));
    }
    return row_at(pos);
}

std::span<double>
ItemEmbeddingTable::mutable_row(ItemId item) {
    size_t pos = position(item);
    if (pos == npos) {
        throw_error(ErrorCode::INVALID_INPUT, "no embedding for item " + std::to_string(item));
    }
    return mutable_row_at(pos);
}

void
ItemEmbeddingTable::append(ItemId item, std::span<const double> values) {
    if (values.size() != dim_) {
        throw_error(ErrorCode::INVALID_INPUT, "embedding dimension mismatch for item " +
                                                  std::to_string(item));
    }
    if (!items_.empty() && item <= items_.back()) {
        throw_error(ErrorCode::INVALID_INPUT, "items must be appended in ascending order");
    }
    if (!all_finite(values)) {
        throw_error(ErrorCode::INVALID_INPUT, "non-finite embedding for item " + std::to_string(item));
    }
    index_[item] = items_.size();
    items_.push_back(item);
    data_.insert(data_.end(), values.begin(), values.end());
}

std::string
ItemEmbeddingTable::serialize() const {
    std::string out = std::string(kEmbeddingHeader) + " d=" + std::to_string(dim_) + "\n";
    for (size_t i = 0; i < items_.size(); ++i) {
        out += std::to_string(items_[i]) + "\t" + text::format_vector(row_at(i)) + "\n";
    }
    return out;
}

void
ItemEmbeddingTable::save(const std::string& path) const {
    text::write_file_atomic(path, serialize());
}

ItemEmbeddingTable
ItemEmbeddingTable::load(const std::string& path) {
    auto lines = text::read_lines(path);
    std::string prefix = std::string(kEmbeddingHeader) + " d=";
    if (lines.empty() || !lines[0].starts_with(prefix)) {
        throw_error(ErrorCode::PARSE, path + ":1: missing embedding header");
    }
    auto dim = text::parse_int(std::string_view(lines[0]).substr(prefix.size()), path + ":1");
    if (dim <= 0) {
        throw_error(ErrorCode::PARSE, path + ":1: dimension must be positive");
    }
    ItemEmbeddingTable table(static_cast<size_t>(dim));
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        std::string what = path + ":" + std::to_string(i + 1);
        auto parts = text::split(lines[i], '\t');
        if (parts.size() != 2) {
            throw_error(ErrorCode::PARSE, what + ": expected item_id<TAB>values");
        }
        auto values = text::parse_vector(parts[1], what);
        if (values.size() != table.dim()) {
            throw_error(ErrorCode::PARSE, what + ": expected " + std::to_string(dim) + " values");
        }
        try {
            table.append(text::parse_int(parts[0], what), values);
        } catch (const Error& e) {
            throw_error(ErrorCode::PARSE, what + ": " + e.what());
        }
    }
    return table;
}

}  // namespace trinity
