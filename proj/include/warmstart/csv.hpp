// Copyright 2026 The Warmstart Authors.
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

// Minimal RFC 4180 reader/writer: comma delimiter, double-quote quoting,
// CRLF or LF line endings, optional UTF-8 BOM.

#ifndef WARMSTART_CSV_HPP_
#define WARMSTART_CSV_HPP_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warmstart::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
};

// Throws Error(kEmptyFile) if there is no header row.
Table parse(std::istream& in);
Table read_file(const std::filesystem::path& path);

// Quotes the field when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

// printf("%.*g"); fixed formatting keeps output byte-stable.
std::string format_number(double value, int significant_digits);
// Round-trippable representation.
std::string format_exact(double value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace warmstart::csv

#endif  // WARMSTART_CSV_HPP_
