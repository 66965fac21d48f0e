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

#include "gradecraft/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gradecraft/error.hpp"

namespace gradecraft {
namespace {

struct Placement {
  double cx = 0.0;
  double cy = 0.0;
  double scale = 1.0;
  double half_w = 0.0;
  double half_h = 0.0;
  double cos_t = 1.0;
  double sin_t = 0.0;
};

Placement place(const AtlasEntry& entry, const HoldAtlas& atlas, const RenderConfig& config) {
  const double size = config.size;
  const double cell = size / kRows;
  const double x_offset = (size - cell * kColumns) / 2.0;
  Placement p;
  p.cx = x_offset + (entry.position.col() + 0.5 + entry.anchor[0]) * cell;
  p.cy = size - (entry.position.row() + 0.5 + entry.anchor[1]) * cell;
  p.scale = cell / atlas.sprite_cell_pixels;
  p.half_w = entry.sprite->width * p.scale / 2.0;
  p.half_h = entry.sprite->height * p.scale / 2.0;
  const double theta = entry.rotation_deg * std::numbers::pi / 180.0;
  p.cos_t = std::cos(theta);
  p.sin_t = std::sin(theta);
  return p;
}

PixelBounds bounds_of(const Placement& p, int size) {
  const double ex = std::abs(p.cos_t) * p.half_w + std::abs(p.sin_t) * p.half_h;
  const double ey = std::abs(p.sin_t) * p.half_w + std::abs(p.cos_t) * p.half_h;
  PixelBounds b;
  b.x0 = std::clamp(static_cast<int>(std::floor(p.cx - ex)), 0, size);
  b.y0 = std::clamp(static_cast<int>(std::floor(p.cy - ey)), 0, size);
  b.x1 = std::clamp(static_cast<int>(std::ceil(p.cx + ex)) + 1, 0, size);
  b.y1 = std::clamp(static_cast<int>(std::ceil(p.cy + ey)) + 1, 0, size);
  return b;
}

// Bilinear sample with edge clamp; writes premultiplied RGBA into out.
void sample(const Sprite& s, double sx, double sy, double out[4]) {
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const double tx = sx - fx;
  const double ty = sy - fy;
  const int x0 = std::clamp(static_cast<int>(fx), 0, s.width - 1);
  const int y0 = std::clamp(static_cast<int>(fy), 0, s.height - 1);
  const int x1 = std::clamp(static_cast<int>(fx) + 1, 0, s.width - 1);
  const int y1 = std::clamp(static_cast<int>(fy) + 1, 0, s.height - 1);
  auto px = [&](int x, int y, int c) {
    return static_cast<double>(s.rgba[(static_cast<std::size_t>(y) * s.width + x) * 4 + c]);
  };
  for (int c = 0; c < 4; ++c) {
    const double top = px(x0, y0, c) * (1.0 - tx) + px(x1, y0, c) * tx;
    const double bottom = px(x0, y1, c) * (1.0 - tx) + px(x1, y1, c) * tx;
    out[c] = top * (1.0 - ty) + bottom * ty;
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Sprite Sprite::from_image(const Image& image) {
  Sprite s;
  s.width = image.width;
  s.height = image.height;
  s.rgba.resize(std::size_t(image.width) * image.height * 4);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      float r, g, b, a = 1.0f;
      switch (image.channels) {
        case 1:
        case 2:
          r = g = b = image.at(x, y, 0) / 255.0f;
          if (image.channels == 2) a = image.at(x, y, 1) / 255.0f;
          break;
        default:
          r = image.at(x, y, 0) / 255.0f;
          g = image.at(x, y, 1) / 255.0f;
          b = image.at(x, y, 2) / 255.0f;
          if (image.channels == 4) a = image.at(x, y, 3) / 255.0f;
          break;
      }
      float* dst = &s.rgba[(static_cast<std::size_t>(y) * image.width + x) * 4];
      dst[0] = r * a;
      dst[1] = g * a;
      dst[2] = b * a;
      dst[3] = a;
    }
  }
  return s;
}

const AtlasEntry* HoldAtlas::find(HoldPosition position) const {
  const auto it = entries.find(position.index());
  return it == entries.end() ? nullptr : &it->second;
}

double normalize_degrees(double degrees) {
  double r = std::fmod(degrees, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

HoldAtlas load_atlas(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open atlas manifest " + manifest.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("atlas manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  const std::filesystem::path base = manifest.parent_path();
  HoldAtlas atlas;
  std::map<std::string, std::shared_ptr<const Sprite>> sprites;
  try {
    atlas.edition = parse_edition(j.at("edition").get<std::string>());
    const auto grid = j.at("cellGrid").get<std::vector<int>>();
    if (grid != std::vector<int>{kColumns, kRows}) {
      throw DatasetError("atlas cellGrid must be [11, 18]");
    }
    atlas.sprite_cell_pixels = j.value("spriteCellPixels", 32.0);
    if (!(atlas.sprite_cell_pixels > 0.0)) {
      throw DatasetError("spriteCellPixels must be > 0");
    }
    for (const auto& h : j.at("holds")) {
      const std::string token = h.at("position").get<std::string>();
      HoldPosition pos{0, 0};
      try {
        pos = parse_position(token);
      } catch (const Error& e) {
        throw DatasetError("atlas position '" + token + "' is outside the grid: " + e.what());
      }
      if (atlas.entries.contains(pos.index())) {
        throw DatasetError("atlas lists position " + pos.to_string() + " more than once");
      }
      AtlasEntry entry;
      entry.position = pos;
      entry.sprite_path = h.at("sprite").get<std::string>();
      entry.rotation_deg = normalize_degrees(h.value("rotationDeg", 0.0));
      if (h.contains("anchor")) {
        const auto anchor = h.at("anchor").get<std::vector<double>>();
        if (anchor.size() != 2) throw DatasetError("anchor of " + token + " needs 2 values");
        entry.anchor = {anchor[0], anchor[1]};
      }
      auto& sprite = sprites[entry.sprite_path];
      if (!sprite) {
        const auto path = base / entry.sprite_path;
        if (!std::filesystem::exists(path)) {
          throw IoError("sprite " + path.string() + " for " + token + " does not exist");
        }
        sprite = std::make_shared<const Sprite>(Sprite::from_image(read_png(path)));
      }
      entry.sprite = sprite;
      atlas.entries.emplace(pos.index(), std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("malformed atlas manifest " + manifest.string() + ": " + e.what());
  }
  const int expected = hold_count(atlas.edition);
  if (static_cast<int>(atlas.entries.size()) != expected) {
    throw DatasetError("atlas for " + edition_name(atlas.edition) + " has " +
                       std::to_string(atlas.entries.size()) + " entries, expected " +
                       std::to_string(expected));
  }
  return atlas;
}

void RenderConfig::validate() const {
  if (channels != 1 && channels != 3 && channels != 4) {
    throw InvalidArgument("channels must be 1, 3 or 4, got " + std::to_string(channels));
  }
  if (allow_any_size) {
    if (size < 64) throw InvalidArgument("image size must be >= 64");
  } else if (size != 224 && size != 256 && size != 512) {
    throw InvalidArgument("image size must be 224, 256 or 512, got " + std::to_string(size));
  }
}

PixelBounds sprite_bounds(const AtlasEntry& entry, const HoldAtlas& atlas,
                          const RenderConfig& config) {
  return bounds_of(place(entry, atlas, config), config.size);
}

Image render_route(const Route& route, const HoldAtlas& atlas, const RenderConfig& config) {
  config.validate();
  std::vector<const AtlasEntry*> entries;
  std::string missing;
  for (const HoldPosition& pos : route.holds()) {
    const AtlasEntry* e = atlas.find(pos);
    if (e == nullptr) {
      missing += (missing.empty() ? "" : ", ") + pos.to_string();
    } else {
      entries.push_back(e);
    }
  }
  if (!missing.empty()) {
    throw InvalidArgument("holds missing from the " + edition_name(atlas.edition) +
                          " atlas: " + missing);
  }

  const int size = config.size;
  std::vector<double> canvas(std::size_t(size) * size * 4, 0.0);
  for (const AtlasEntry* e : entries) {  // holds() is ascending by index
    const Placement p = place(*e, atlas, config);
    const PixelBounds b = bounds_of(p, size);
    for (int y = b.y0; y < b.y1; ++y) {
      for (int x = b.x0; x < b.x1; ++x) {
        const double dx = x + 0.5 - p.cx;
        const double dy = y + 0.5 - p.cy;
        const double u = dx * p.cos_t + dy * p.sin_t;
        const double v = -dx * p.sin_t + dy * p.cos_t;
        if (!(u >= -p.half_w && u < p.half_w && v >= -p.half_h && v < p.half_h)) continue;
        double src[4];
        sample(*e->sprite, (u + p.half_w) / p.scale - 0.5, (v + p.half_h) / p.scale - 0.5, src);
        if (src[3] <= 0.0) continue;
        double* dst = &canvas[(static_cast<std::size_t>(y) * size + x) * 4];
        for (int c = 0; c < 4; ++c) dst[c] = src[c] + (1.0 - src[3]) * dst[c];
      }
    }
  }

  Image rgb(size, size, config.channels == 4 ? 4 : 3);
  for (std::size_t i = 0; i < std::size_t(size) * size; ++i) {
    const double* px = &canvas[i * 4];
    if (config.channels == 4) {
      const double a = px[3];
      for (int c = 0; c < 3; ++c) rgb.pixels[i * 4 + c] = quantize(a > 0.0 ? px[c] / a : 0.0);
      rgb.pixels[i * 4 + 3] = quantize(a);
    } else {
      // Over an opaque black background the premultiplied color is final.
      for (int c = 0; c < 3; ++c) rgb.pixels[i * 3 + c] = quantize(px[c]);
    }
  }
  return config.channels == 1 ? luminance(rgb) : rgb;
}

Image luminance(const Image& rgb) {
  if (rgb.channels != 3) throw InvalidArgument("luminance needs a 3-channel image");
  Image out(rgb.width, rgb.height, 1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double y = 0.2126 * rgb.pixels[i * 3] + 0.7152 * rgb.pixels[i * 3 + 1] +
                     0.0722 * rgb.pixels[i * 3 + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(y));
  }
  return out;
}

}  // namespace gradecraft
