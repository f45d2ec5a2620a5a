// Copyright 2026 The nightisp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nightisp::imageio {

struct Gray16 {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint16_t> samples;
};

/// Reads a single-channel 16-bit PNG. Throws DecodeError for anything else.
Gray16 readGray16Png(const std::filesystem::path& path);
void writeGray16Png(const std::filesystem::path& path, const Gray16& image);

struct Rgb8 {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> interleaved;  // RGBRGB...
};

std::vector<std::uint8_t> encodePng(const Rgb8& image);
std::vector<std::uint8_t> encodeJpeg(const Rgb8& image, int quality);
Rgb8 decodePng(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace nightisp::imageio
