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

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trinity/common.h"

namespace trinity {

/// Dense item embedding storage. Rows are kept in ascending item-id order so
/// dumps are byte-stable.
class ItemEmbeddingTable {
public:
    static constexpr size_t kDefaultDim = 32;

    explicit ItemEmbeddingTable(size_t dim = kDefaultDim);

    /// Gaussian init with standard deviation 1/sqrt(dim).
    static ItemEmbeddingTable
    random(std::vector<ItemId> items, size_t dim, uint64_t seed);

    size_t
    dim() const {
        return dim_;
    }
    size_t
    size() const {
        return items_.size();
    }
    const std::vector<ItemId>&
    items() const {
        return items_;
    }

    bool
    contains(ItemId item) const {
        return index_.contains(item);
    }

    /// Row position of `item`, or npos when absent.
    size_t
    position(ItemId item) const;

    std::span<const double>
    row(ItemId item) const;
    std::span<double>
    mutable_row(ItemId item);

    std::span<const double>
    row_at(size_t position) const {
        return {data_.data() + position * dim_, dim_};
    }
    std::span<double>
    mutable_row_at(size_t position) {
        return {data_.data() + position * dim_, dim_};
    }

    /// Adds `item` with the given vector; items must be inserted in
    /// ascending order.
    void
    append(ItemId item, std::span<const double> values);

    void
    save(const std::string& path) const;
    static ItemEmbeddingTable
    load(const std::string& path);

    std::string
    serialize() const;

    bool
    operator==(const ItemEmbeddingTable& other) const {
        return dim_ == other.dim_ && items_ == other.items_ && data_ == other.data_;
    }

    static constexpr size_t npos = static_cast<size_t>(-1);

private:
    size_t dim_;
    std::vector<ItemId> items_;
    std::vector<double> data_;
    std::unordered_map<ItemId, size_t> index_;
};

}  // namespace trinity
