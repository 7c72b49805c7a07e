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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trinity::text {

// Shortest representation that parses back to the same double.
std::string
format_double(double value);

std::string
format_vector(std::span<const double> values);

std::vector<std::string_view>
split(std::string_view line, char sep);

// The parse helpers throw a PARSE error naming `what` on failure.
int64_t
parse_int(std::string_view token, const std::string& what);

double
parse_double(std::string_view token, const std::string& what);

std::vector<double>
parse_vector(std::string_view token, const std::string& what);

std::vector<std::string>
read_lines(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void
write_file_atomic(const std::string& path, const std::string& content);

uint64_t
fnv1a64(std::string_view data);

}  // namespace trinity::text
