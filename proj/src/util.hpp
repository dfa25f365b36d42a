// Copyright 2026 The ICA Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small string helpers shared by the implementation files. Not installed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ica::util {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool starts_with_word(std::string_view text, std::string_view word);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

bool valid_utf8(std::string_view s);
/// First `n` code points of a UTF-8 string.
std::string utf8_prefix(std::string_view s, std::size_t n);
/// Collapses runs of whitespace to one space and trims.
std::string normalize_space(std::string_view s);

std::uint64_t fnv1a64(std::string_view data);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically via a sibling temp file.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ica::util
