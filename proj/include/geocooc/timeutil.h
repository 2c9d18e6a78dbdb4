// Copyright 2026 The geocooc Authors.
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

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace geocooc {

// A camera-clock timestamp: UTC instant plus the offset it was written with.
struct Timestamp {
  std::chrono::sys_seconds utc{};
  int offset_minutes = 0;

  // Wall-clock reading as written, with no timezone conversion.
  std::chrono::sys_seconds local() const { return utc + std::chrono::minutes(offset_minutes); }

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
  friend auto operator<=>(const Timestamp& a, const Timestamp& b) { return a.utc <=> b.utc; }
};

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)"; fractional seconds are dropped.
// Throws FormatError.
Timestamp parse_rfc3339(std::string_view s);

std::string format_rfc3339(const Timestamp& t);

}  // namespace geocooc
