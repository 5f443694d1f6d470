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

#ifndef CACP_RATE_HPP_
#define CACP_RATE_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace cacp {

/// A compression rate held as an exact ratio of integers so that budget
/// comparisons are reproducible bit-for-bit across platforms. Rates are
/// usually written as short decimals ("0.5" -> 5/10) and reduced on parse.
class Rate {
 public:
  constexpr Rate() = default;
  Rate(std::int64_t num, std::int64_t den);

  /// Parses a plain decimal such as "0.3", "1", ".75" (at most 9 fractional digits).
  static Rate Parse(std::string_view text);
  /// Converts via the shortest round-trip decimal representation, so 0.3 -> 3/10.
  static Rate FromDouble(double value);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string ToString() const;

  friend bool operator==(const Rate&, const Rate&) = default;
  friend bool operator<(const Rate& a, const Rate& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rate& a, const Rate& b) { return b < a; }
  friend bool operator<=(const Rate& a, const Rate& b) { return !(b < a); }
  friend bool operator>=(const Rate& a, const Rate& b) { return !(a < b); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace cacp

#endif  // CACP_RATE_HPP_
