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

// Board geometry, the Font grade scale, routes and their one-hot encoding.
//
// The board is an 11-column by 18-row grid. Columns are lettered A..K and
// rows numbered 1..18 from the bottom. Internally a cell is (col, row) with
// both zero-based, and the flat feature index is row * 11 + col, so the
// bottom row occupies indices 0..10.

#pragma once

#include <array>
#include <bitset>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gradecraft {

inline constexpr int kColumns = 11;
inline constexpr int kRows = 18;
inline constexpr int kCells = kColumns * kRows;  // 198

enum class Edition { MB2016, MB2017, MB2019 };

inline constexpr std::array<Edition, 3> kAllEditions = {
    Edition::MB2016, Edition::MB2017, Edition::MB2019};

class FontGrade;

/// "2016", "2017" or "2019".
std::string edition_name(Edition edition);
Edition parse_edition(std::string_view text);

int hold_count(Edition edition);
FontGrade min_grade(Edition edition);

class HoldPosition {
 public:
  /// Throws InvalidArgument when the cell lies outside the 11x18 grid.
  HoldPosition(int col, int row);

  static HoldPosition from_index(int index);

  int col() const noexcept { return col_; }
  int row() const noexcept { return row_; }
  int index() const noexcept { return row_ * kColumns + col_; }

  /// Board coordinate such as "J5".
  std::string to_string() const;

  auto operator<=>(const HoldPosition& other) const noexcept {
    return index() <=> other.index();
  }
  bool operator==(const HoldPosition& other) const noexcept = default;

 private:
  int col_;
  int row_;
};

/// Parses "A1".."K18", case-insensitive, surrounding whitespace ignored.
HoldPosition parse_position(std::string_view text);

/// Cells that carry a hold on the given edition, ascending by index.
std::span<const HoldPosition> board_holds(Edition edition);
bool has_hold(Edition edition, HoldPosition position);

inline constexpr int kGradeCount = 15;

class FontGrade {
 public:
  /// Throws InvalidArgument for ordinals outside [0, 14].
  explicit FontGrade(int ordinal);

  int ordinal() const noexcept { return ordinal_; }
  std::string label() const;

  auto operator<=>(const FontGrade&) const noexcept = default;

 private:
  int ordinal_;
};

FontGrade parse_grade(std::string_view label);
std::string grade_to_label(int ordinal);

/// Maps a real-valued prediction onto the grade scale: round half away from
/// zero, then clamp to [0, 14].
int round_to_ordinal(double value) noexcept;

using FeatureVector = std::bitset<kCells>;

/// A non-empty set of holds on one board edition.
class Route {
 public:
  /// Duplicates collapse; an empty hold list throws EmptyRouteError.
  Route(Edition edition, std::span<const HoldPosition> holds);
  Route(Edition edition, std::initializer_list<HoldPosition> holds);

  /// Parses each coordinate with parse_position.
  static Route from_strings(Edition edition, std::span<const std::string> holds);

  Edition edition() const noexcept { return edition_; }
  /// Ascending by feature index.
  const std::vector<HoldPosition>& holds() const noexcept { return holds_; }
  std::size_t size() const noexcept { return holds_.size(); }
  bool contains(HoldPosition position) const noexcept {
    return mask_.test(static_cast<std::size_t>(position.index()));
  }
  const FeatureVector& mask() const noexcept { return mask_; }

  Route with_hold(HoldPosition position) const;
  /// Throws EmptyRouteError when the removal would empty the route.
  Route without_hold(HoldPosition position) const;

  bool operator==(const Route& other) const noexcept {
    return edition_ == other.edition_ && mask_ == other.mask_;
  }

 private:
  Route(Edition edition, const FeatureVector& mask);
  friend Route decode_vector(const FeatureVector& bits, Edition edition);

  Edition edition_;
  FeatureVector mask_;
  std::vector<HoldPosition> holds_;
};

FeatureVector encode_route(const Route& route);
/// Throws EmptyRouteError for an all-zero vector.
Route decode_vector(const FeatureVector& bits, Edition edition);

/// Dense 0/1 copy of the encoding, written into `out` (size kCells).
void encode_dense(const Route& route, std::span<double> out);

}  // namespace gradecraft
