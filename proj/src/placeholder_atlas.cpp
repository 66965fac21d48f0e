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

// Stand-in hold sprites. Every pixel with nonzero alpha has all color
// channels >= 40, which keeps composited pixels visible over earlier ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "gradecraft/error.hpp"
#include "gradecraft/render.hpp"

namespace gradecraft {
namespace {

struct ShapeDef {
  const char* name;
  int width;
  int height;
  std::array<std::uint8_t, 3> color;
  // Signed distance in pixels from the outline, negative inside, with the
  // origin at the sprite center.
  std::function<double(double, double)> distance;
};

double box(double x, double y, double hx, double hy, double radius) {
  const double qx = std::abs(x) - hx + radius;
  const double qy = std::abs(y) - hy + radius;
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  return outside + std::min(std::max(qx, qy), 0.0) - radius;
}

std::vector<ShapeDef> shapes() {
  return {
      {"jug", 32, 32, {230, 90, 60},
       [](double x, double y) { return std::hypot(x, y) - 13.0; }},
      {"crimp", 32, 14, {240, 200, 60},
       [](double x, double y) { return box(x, y, 14.0, 5.5, 2.0); }},
      {"sloper", 32, 32, {80, 180, 240},
       [](double x, double y) { return (std::hypot(x / 14.0, y / 9.0) - 1.0) * 9.0; }},
      {"pinch", 14, 32, {120, 230, 120},
       [](double x, double y) { return box(x, y, 5.5, 14.0, 3.0); }},
      {"pocket", 32, 32, {220, 120, 220},
       [](double x, double y) {
         const double r = std::hypot(x, y);
         return std::max(r - 13.0, 6.0 - r);
       }},
      {"edge", 32, 32, {240, 240, 240},
       [](double x, double y) {
         // Triangle pointing up with its base along y = 10.
         const double base = y - 10.0;
         const double s = std::sqrt(1.0 + 0.25);
         const double left = (-x - 0.5 * (y + 12.0)) / s;
         const double right = (x - 0.5 * (y + 12.0)) / s;
         return std::max({base, left, right});
       }},
  };
}

Image draw(const ShapeDef& shape) {
  Image img(shape.width, shape.height, 4);
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const double px = x + 0.5 - shape.width / 2.0;
      const double py = y + 0.5 - shape.height / 2.0;
      const double a = std::clamp(0.5 - shape.distance(px, py), 0.0, 1.0);
      const auto alpha = static_cast<std::uint8_t>(std::lround(a * 255.0));
      if (alpha == 0) continue;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = shape.color[c];
      img.at(x, y, 3) = alpha;
    }
  }
  return img;
}

}  // namespace

std::filesystem::path placeholder_manifest(const std::filesystem::path& dir, Edition edition) {
  return dir / ("atlas_" + edition_name(edition) + ".json");
}

void write_placeholder_atlas(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "sprites", ec);
  if (ec) throw IoError("cannot create " + (dir / "sprites").string() + ": " + ec.message());
  const auto defs = shapes();
  for (const ShapeDef& s : defs) {
    write_png(draw(s), dir / "sprites" / (std::string(s.name) + ".png"));
  }
  for (const Edition edition : kAllEditions) {
    nlohmann::ordered_json j;
    j["edition"] = edition_name(edition);
    j["cellGrid"] = {kColumns, kRows};
    j["spriteCellPixels"] = 32;
    auto holds = nlohmann::ordered_json::array();
    for (const HoldPosition& pos : board_holds(edition)) {
      const int i = pos.index();
      nlohmann::ordered_json h;
      h["position"] = pos.to_string();
      h["sprite"] = std::string("sprites/") +
                    defs[static_cast<std::size_t>((pos.col() * 7 + pos.row() * 3) % 6)].name +
                    ".png";
      h["rotationDeg"] = (i * 37) % 360;
      h["anchor"] = {((i % 5) - 2) * 0.04, (((i / 5) % 5) - 2) * 0.04};
      holds.push_back(std::move(h));
    }
    j["holds"] = std::move(holds);
    const auto path = placeholder_manifest(dir, edition);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }
}

}  // namespace gradecraft
