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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gradecraft {

/// 8-bit interleaved pixels, rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c) {}

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const Image&) const = default;
};

/// Lossless PNG. Throws IoError when the file cannot be written.
void write_png(const Image& image, const std::filesystem::path& path);
/// Throws IoError for unreadable or non-PNG files. 16-bit and palette
/// images are converted to 8 bits per channel.
Image read_png(const std::filesystem::path& path);

void export_image(const Image& image, const std::filesystem::path& path);

/// Lowercase ASCII letters, digits, '-' and '_'; anything else becomes '_'.
/// Empty input yields "route".
std::string sanitize_filename(std::string_view name);

/// Writes each (name, image) as <dir>/<sanitized name>.png. Names that
/// collide with each other or with existing files get "-2", "-3", ...
/// suffixes. Returns the written paths in input order.
std::vector<std::filesystem::path> export_batch(
    std::span<const std::pair<std::string, Image>> images, const std::filesystem::path& dir);

}  // namespace gradecraft
