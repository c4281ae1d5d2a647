// Copyright 2026 The ITCG Authors
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

// Small text helpers shared by the file formats: shortest-exact decimal
// output and strict number parsing.

#ifndef ITCG_TEXT_HPP
#define ITCG_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itcg::text {

/// Shortest round-trip form (std::to_chars).
std::string format_double(double v);

/// Whole-field parse; std::nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

/// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);

/// Writes a whole file; throws IoError.
void write_file(const std::string& path, const std::string& content);

}  // namespace itcg::text

#endif  // ITCG_TEXT_HPP
