/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cacp/rate.hpp"

#include <charconv>
#include <numeric>

#include "cacp/error.hpp"

namespace cacp {

Rate::Rate(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidRate, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = num / (g == 0 ? 1 : g);
  den_ = den / (g == 0 ? 1 : g);
}

Rate Rate::Parse(std::string_view text) {
  const std::string_view original = text;
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  int frac_digits = 0;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw Error(ErrorCode::kInvalidRate, "bad rate '" + std::string(original) + "'");
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kInvalidRate, "bad rate '" + std::string(original) + "'");
    }
    seen_digit = true;
    if (num > (INT64_MAX - 9) / 10) {
      throw Error(ErrorCode::kInvalidRate, "rate has too many digits: " + std::string(original));
    }
    num = num * 10 + (c - '0');
    if (seen_dot) {
      if (++frac_digits > 9) {
        throw Error(ErrorCode::kInvalidRate, "rate has too many digits: " + std::string(original));
      }
      den *= 10;
    }
  }
  if (!seen_digit) throw Error(ErrorCode::kInvalidRate, "bad rate '" + std::string(original) + "'");
  return Rate(negative ? -num : num, den);
}

Rate Rate::FromDouble(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidRate, "unrepresentable rate");
  return Parse(std::string_view(buf, static_cast<std::size_t>(end - buf)));
}

std::string Rate::ToString() const {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value());
  return std::string(buf, ec == std::errc() ? end : buf);
}

}  // namespace cacp
