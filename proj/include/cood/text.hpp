// Copyright 2026 The cood Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text and file helpers shared by the serializers.

#ifndef COOD_TEXT_HPP_
#define COOD_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cood {

// Shortest representation that parses back to the same double; "nan",
// "inf" and "-inf" for non-finite values.
std::string FormatDouble(double v);

std::vector<std::string> SplitString(std::string_view s, char sep);
std::string Trim(std::string_view s);

// Both throw ConfigError naming `context` on malformed input.
double ParseDouble(std::string_view s, std::string_view context);
std::uint64_t ParseUnsigned(std::string_view s, std::string_view context);
bool ParseBool(std::string_view s, std::string_view context);

std::string ReadFileOrThrow(const std::string& path);
void WriteFileOrThrow(const std::string& path, std::string_view contents);

// FNV-1a, used for config fingerprints.
std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace cood

#endif  // COOD_TEXT_HPP_
