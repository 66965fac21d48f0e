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

// Route images: hold sprites composited onto a black square canvas.
//
// The board occupies the full canvas height with 18 rows, so one cell is
// size/18 pixels and the 11 columns are centered horizontally. Row 0 is
// at the bottom. A sprite is scaled by cell/spriteCellPixels, rotated
// clockwise by its angle about its center and placed at the cell center
// plus the anchor offset (in cells, +x right, +y up).

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gradecraft/board.hpp"
#include "gradecraft/image.hpp"

namespace gradecraft {

/// Premultiplied RGBA in [0, 1].
struct Sprite {
  int width = 0;
  int height = 0;
  std::vector<float> rgba;

  static Sprite from_image(const Image& image);
};

struct AtlasEntry {
  HoldPosition position{0, 0};
  std::string sprite_path;
  double rotation_deg = 0.0;  // in [0, 360)
  std::array<double, 2> anchor{0.0, 0.0};
  std::shared_ptr<const Sprite> sprite;
};

struct HoldAtlas {
  Edition edition = Edition::MB2016;
  double sprite_cell_pixels = 32.0;
  std::map<int, AtlasEntry> entries;  // keyed by position index

  std::size_t size() const noexcept { return entries.size(); }
  const AtlasEntry* find(HoldPosition position) const;
};

/// Reads a manifest of the form
///   {"edition": "2017", "cellGrid": [11, 18], "spriteCellPixels": 32,
///    "holds": [{"position": "J5", "sprite": "sprites/a.png",
///               "rotationDeg": 90, "anchor": [0, 0]}]}
/// with sprite paths relative to the manifest. spriteCellPixels is optional
/// (default 32). Rotations are normalized to [0, 360). Throws IoError for
/// missing sprites and DatasetError for duplicate positions, positions off
/// the grid or an entry count different from the edition's hold count.
HoldAtlas load_atlas(const std::filesystem::path& manifest);

double normalize_degrees(double degrees);

struct RenderConfig {
  int size = 256;
  int channels = 3;
  // Permits any size >= 64 instead of 224, 256 or 512.
  bool allow_any_size = false;

  /// Throws InvalidArgument for unsupported sizes or channel counts.
  void validate() const;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1), clipped to the canvas.
struct PixelBounds {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Pixels the entry's transformed sprite may touch.
PixelBounds sprite_bounds(const AtlasEntry& entry, const HoldAtlas& atlas,
                          const RenderConfig& config);

/// Composites the route's sprites in ascending position index. Throws
/// InvalidArgument listing every route hold missing from the atlas.
Image render_route(const Route& route, const HoldAtlas& atlas, const RenderConfig& config);

/// Rec. 709 luma of an 8-bit RGB image, rounded to nearest.
Image luminance(const Image& rgb);

/// Writes procedurally drawn sprites and one manifest per edition
/// (atlas_<year>.json) into `dir`.
void write_placeholder_atlas(const std::filesystem::path& dir);

std::filesystem::path placeholder_manifest(const std::filesystem::path& dir, Edition edition);

}  // namespace gradecraft
