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
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trinity {

using ItemId = int64_t;
using UserId = int64_t;
using ClusterId = int32_t;
using EventIndex = int64_t;

using Vector = std::vector<double>;

/// All randomness in the library flows through this engine type so that a
/// seed fully determines every output.
using Rng = std::mt19937_64;

enum class ErrorCode {
    INVALID_INPUT,
    IO,
    PARSE,
    USAGE,
    RUNTIME,
};

const char*
error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {
    }

    ErrorCode
    code() const noexcept {
        return code_;
    }

private:
    ErrorCode code_;
};

[[noreturn]] void
throw_error(ErrorCode code, const std::string& message);

inline double
dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

inline double
squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

bool
all_finite(std::span<const double> v);

/// Uniform choice of `count` positions out of [0, n) without replacement,
/// returned in draw order (partial Fisher-Yates).
std::vector<size_t>
random_choose_indices(size_t n, size_t count, Rng& rng);

template <typename T>
std::vector<T>
random_choose(const std::vector<T>& values, size_t count, Rng& rng) {
    std::vector<T> out;
    for (size_t idx : random_choose_indices(values.size(), count, rng)) {
        out.push_back(values[idx]);
    }
    return out;
}

}  // namespace trinity
