/*******************************************************************************
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
 *******************************************************************************/
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isoclust {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Strict double parse of the whole token; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view token);

std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char delim);

/// Picks the delimiter among {',', '\t', ';'} that splits `line` into the
/// most fields; falls back to runs of spaces when none of them appears.
char detect_delimiter(std::string_view line);

/// Splits on `delim`, or on arbitrary whitespace runs when delim == ' '.
std::vector<std::string_view> split_auto(std::string_view line, char delim);

std::string lower(std::string_view s);

}  // namespace isoclust
