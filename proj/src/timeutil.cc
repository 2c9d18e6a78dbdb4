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

#include "geocooc/timeutil.h"

#include <cstdio>

#include "geocooc/errors.h"

namespace geocooc {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw FormatError("truncated timestamp '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') throw FormatError("bad digit in timestamp '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) {
    throw FormatError("malformed timestamp '" + std::string(s) + "'");
  }
}

}  // namespace

Timestamp parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  const int y = digits(s, 0, 4);
  expect(s, 4, '-');
  const int mo = digits(s, 5, 2);
  expect(s, 7, '-');
  const int d = digits(s, 8, 2);
  if (s.size() < 11 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) {
    throw FormatError("malformed timestamp '" + std::string(s) + "'");
  }
  const int h = digits(s, 11, 2);
  expect(s, 13, ':');
  const int mi = digits(s, 14, 2);
  expect(s, 16, ':');
  const int se = digits(s, 17, 2);
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  int offset = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    offset = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw FormatError("timestamp without zone designator '" + std::string(s) + "'");
  }
  if (pos != s.size()) throw FormatError("trailing characters in timestamp '" + std::string(s) + "'");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) {
    throw FormatError("timestamp field out of range '" + std::string(s) + "'");
  }
  const sys_seconds wall = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
  return Timestamp{wall - minutes{offset}, offset};
}

std::string format_rfc3339(const Timestamp& t) {
  using namespace std::chrono;
  const sys_seconds wall = t.local();
  const auto day_start = floor<days>(wall);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{wall - day_start};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  std::string out(buf);
  if (t.offset_minutes == 0) {
    out += 'Z';
  } else {
    const int a = t.offset_minutes < 0 ? -t.offset_minutes : t.offset_minutes;
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", t.offset_minutes < 0 ? '-' : '+', a / 60, a % 60);
    out += buf;
  }
  return out;
}

}  // namespace geocooc
