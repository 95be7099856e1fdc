// Copyright 2026 The hpc-sentinel Authors.
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

// Minimal RFC 4180 reading and writing.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hpcs::csv {

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);
// Reads one record, handling quoted fields with embedded commas, quotes
// and newlines. Returns false at end of input.
bool read_row(std::istream& in, std::vector<std::string>& fields);

}  // namespace hpcs::csv
