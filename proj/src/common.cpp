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

#include "trinity/common.h"

#include <cmath>
#include <numeric>

namespace trinity {

const char*
error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::INVALID_INPUT:
            return "invalid input";
        case ErrorCode::IO:
            return "io error";
        case ErrorCode::PARSE:
            return "parse error";
        case ErrorCode::USAGE:
            return "usage error";
        case ErrorCode::RUNTIME:
            return "runtime error";
    }
    return "error";
}

void
throw_error(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

bool
all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

std::vector<size_t>
random_choose_indices(size_t n, size_t count, Rng& rng) {
    std::vector<size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    count = std::min(count, n);
    for (size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace trinity
