// Copyright 2026 The Gradecraft Authors
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

#include "gradecraft/board.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gradecraft/error.hpp"

namespace gradecraft {
namespace {

constexpr std::array<std::string_view, kGradeCount> kGradeLabels = {
    "6A+", "6B", "6B+", "6C", "6C+", "7A", "7A+", "7B",
    "7B+", "7C", "7C+", "8A", "8A+", "8B", "8B+"};

// 2016 layout, top row (18) first. 'X' marks a bolted hold.
constexpr std::array<std::string_view, kRows> kLayout2016 = {
    "X.XXXXX.XXX",  // 18
    "XXXX.XXXX.X",  // 17
    "X.XXXX.XXXX",  // 16
    "XXX.XXXXX.X",  // 15
    ".XXXXX.XXXX",  // 14
    "XXX.XXXX.XX",  // 13
    ".XXXX.XXXXX",  // 12
    "XX.XXXXX.XX",  // 11
    "XXXXX.XXXX.",  // 10
    "XX.XXXX.XXX",  // 9
    "XXXX.XXXXX.",  // 8
    "X.XXXXX.XXX",  // 7
    "XXXX.XXXX.X",  // 6
    "X.XXXX.XXXX",  // 5
    "X...X..X.X.",  // 4
    ".X..X.X...X",  // 3
    "X..X..X..X.",  // 2
    ".X..X..X.X.",  // 1
};

std::vector<HoldPosition> build_layout(Edition edition) {
  std::vector<HoldPosition> out;
  for (int index = 0; index < kCells; ++index) {
    const HoldPosition pos = HoldPosition::from_index(index);
    if (edition != Edition::MB2016 ||
        kLayout2016[static_cast<std::size_t>(kRows - 1 - pos.row())]
                   [static_cast<std::size_t>(pos.col())] == 'X') {
      out.push_back(pos);
    }
  }
  return out;
}

FeatureVector mask_of(std::span<const HoldPosition> holds) {
  FeatureVector mask;
  for (const HoldPosition& h : holds) mask.set(static_cast<std::size_t>(h.index()));
  return mask;
}

std::string trim_upper(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string edition_name(Edition edition) {
  switch (edition) {
    case Edition::MB2016: return "2016";
    case Edition::MB2017: return "2017";
    case Edition::MB2019: return "2019";
  }
  return "unknown";
}

Edition parse_edition(std::string_view text) {
  const std::string t = trim_upper(text);
  if (t == "2016" || t == "MB2016") return Edition::MB2016;
  if (t == "2017" || t == "MB2017") return Edition::MB2017;
  if (t == "2019" || t == "MB2019") return Edition::MB2019;
  throw ParseError("unknown board edition '" + std::string(text) + "'", std::string(text));
}

int hold_count(Edition edition) {
  return static_cast<int>(board_holds(edition).size());
}

FontGrade min_grade(Edition edition) {
  return edition == Edition::MB2016 ? FontGrade(2) : FontGrade(0);
}

HoldPosition::HoldPosition(int col, int row) : col_(col), row_(row) {
  if (col < 0 || col >= kColumns || row < 0 || row >= kRows) {
    throw InvalidArgument("hold position (" + std::to_string(col) + ", " +
                          std::to_string(row) + ") is outside the 11x18 board");
  }
}

HoldPosition HoldPosition::from_index(int index) {
  if (index < 0 || index >= kCells) {
    throw InvalidArgument("feature index " + std::to_string(index) + " out of range");
  }
  return HoldPosition(index % kColumns, index / kColumns);
}

std::string HoldPosition::to_string() const {
  return std::string(1, static_cast<char>('A' + col_)) + std::to_string(row_ + 1);
}

HoldPosition parse_position(std::string_view text) {
  const std::string t = trim_upper(text);
  const std::string token(text);
  if (t.size() < 2 || t.size() > 3 || !std::isalpha(static_cast<unsigned char>(t[0]))) {
    throw ParseError("malformed hold coordinate '" + token + "'", token);
  }
  const int col = t[0] - 'A';
  if (col < 0 || col >= kColumns) {
    throw ParseError("hold column out of range A-K in '" + token + "'", token);
  }
  int row = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) {
      throw ParseError("malformed hold coordinate '" + token + "'", token);
    }
    row = row * 10 + (t[i] - '0');
  }
  if (t[1] == '0' || row < 1 || row > kRows) {
    throw ParseError("hold row out of range 1-18 in '" + token + "'", token);
  }
  return HoldPosition(col, row - 1);
}

std::span<const HoldPosition> board_holds(Edition edition) {
  static const std::vector<HoldPosition> mb2016 = build_layout(Edition::MB2016);
  static const std::vector<HoldPosition> full = build_layout(Edition::MB2017);
  return edition == Edition::MB2016 ? std::span<const HoldPosition>(mb2016)
                                    : std::span<const HoldPosition>(full);
}

bool has_hold(Edition edition, HoldPosition position) {
  const auto holds = board_holds(edition);
  return std::binary_search(holds.begin(), holds.end(), position);
}

FontGrade::FontGrade(int ordinal) : ordinal_(ordinal) {
  if (ordinal < 0 || ordinal >= kGradeCount) {
    throw InvalidArgument("grade ordinal " + std::to_string(ordinal) + " outside [0, 14]");
  }
}

std::string FontGrade::label() const {
  return std::string(kGradeLabels[static_cast<std::size_t>(ordinal_)]);
}

FontGrade parse_grade(std::string_view label) {
  const std::string t = trim_upper(label);
  for (std::size_t i = 0; i < kGradeLabels.size(); ++i) {
    if (kGradeLabels[i] == t) return FontGrade(static_cast<int>(i));
  }
  throw UnsupportedGradeError("unsupported Font grade '" + std::string(label) + "'",
                              std::string(label));
}

std::string grade_to_label(int ordinal) { return FontGrade(ordinal).label(); }

int round_to_ordinal(double value) noexcept {
  if (!(value == value)) return 0;
  const double r = std::round(value);  // half away from zero
  if (r < 0.0) return 0;
  if (r > kGradeCount - 1) return kGradeCount - 1;
  return static_cast<int>(r);
}

Route::Route(Edition edition, std::span<const HoldPosition> holds)
    : Route(edition, mask_of(holds)) {}

Route::Route(Edition edition, std::initializer_list<HoldPosition> holds)
    : Route(edition, std::span<const HoldPosition>(holds.begin(), holds.size())) {}

Route::Route(Edition edition, const FeatureVector& mask) : edition_(edition), mask_(mask) {
  if (mask_.none()) throw EmptyRouteError("a route needs at least one hold");
  holds_.reserve(mask_.count());
  for (int i = 0; i < kCells; ++i) {
    if (mask_.test(static_cast<std::size_t>(i))) holds_.push_back(HoldPosition::from_index(i));
  }
}

Route Route::from_strings(Edition edition, std::span<const std::string> holds) {
  std::vector<HoldPosition> parsed;
  parsed.reserve(holds.size());
  for (const std::string& h : holds) parsed.push_back(parse_position(h));
  return Route(edition, parsed);
}

Route Route::with_hold(HoldPosition position) const {
  FeatureVector m = mask_;
  m.set(static_cast<std::size_t>(position.index()));
  return Route(edition_, m);
}

Route Route::without_hold(HoldPosition position) const {
  FeatureVector m = mask_;
  m.reset(static_cast<std::size_t>(position.index()));
  return Route(edition_, m);
}

FeatureVector encode_route(const Route& route) { return route.mask(); }

Route decode_vector(const FeatureVector& bits, Edition edition) {
  if (bits.none()) throw EmptyRouteError("cannot decode an all-zero feature vector");
  return Route(edition, bits);
}

void encode_dense(const Route& route, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(kCells)) {
    throw InvalidArgument("dense encoding needs 198 slots");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const HoldPosition& h : route.holds()) out[static_cast<std::size_t>(h.index())] = 1.0;
}

}  // namespace gradecraft
