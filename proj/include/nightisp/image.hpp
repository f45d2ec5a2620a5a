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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nightisp {

enum class ColorSpace { CameraLinear, Xyz, SrgbLinear, SrgbEncoded, YCbCr };

std::string_view toString(ColorSpace space);

enum class CfaColor : std::uint8_t { R = 0, G = 1, B = 2 };

/// 2x2 repeating color filter layout, indexed [y % 2][x % 2].
struct Cfa {
    std::array<CfaColor, 4> sites{CfaColor::R, CfaColor::G, CfaColor::G, CfaColor::B};

    CfaColor at(std::size_t x, std::size_t y) const noexcept { return sites[(y & 1) * 2 + (x & 1)]; }

    /// "RGGB", "BGGR", "GRBG", "GBRG" (or any arrangement with two G, one R, one B).
    static Cfa parse(std::string_view pattern);
    std::string name() const;
    bool valid() const noexcept;

    friend bool operator==(const Cfa&, const Cfa&) = default;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

inline constexpr Mat3 kIdentity3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

/// Three planar float channels tagged with the color space they hold.
class ImageF {
public:
    ImageF() = default;
    ImageF(std::size_t width, std::size_t height, ColorSpace space, float fill = 0.0f);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixelCount() const noexcept { return width_ * height_; }
    ColorSpace space() const noexcept { return space_; }
    void setSpace(ColorSpace space) noexcept { space_ = space; }

    std::span<float> plane(std::size_t c) noexcept { return planes_[c]; }
    std::span<const float> plane(std::size_t c) const noexcept { return planes_[c]; }

    float& at(std::size_t c, std::size_t x, std::size_t y) noexcept { return planes_[c][y * width_ + x]; }
    float at(std::size_t c, std::size_t x, std::size_t y) const noexcept { return planes_[c][y * width_ + x]; }

    bool allFinite() const noexcept;

    friend bool operator==(const ImageF&, const ImageF&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    ColorSpace space_ = ColorSpace::CameraLinear;
    std::array<std::vector<float>, 3> planes_;
};

/// Single-plane float mosaic; samples are non-negative, typically in [0, 1].
struct MosaicF {
    std::size_t width = 0;
    std::size_t height = 0;
    Cfa cfa;
    std::vector<float> plane;

    float at(std::size_t x, std::size_t y) const noexcept { return plane[y * width + x]; }
    float& at(std::size_t x, std::size_t y) noexcept { return plane[y * width + x]; }
};

/// BT.601 luma of a linear combination of the three planes.
inline constexpr std::array<double, 3> kLumaWeights{0.299, 0.587, 0.114};

std::vector<float> luma(const ImageF& img);

}  // namespace nightisp
