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

#include "nightisp/image.hpp"

namespace nightisp {

/// Camera-space illuminant normalized so that g == 1.
class Illuminant {
public:
    Illuminant() = default;
    /// Normalizes by g; throws DegenerateImage unless all components are finite and > 0.
    static Illuminant fromRgb(double r, double g, double b);

    double r() const noexcept { return rgb_[0]; }
    double g() const noexcept { return rgb_[1]; }
    double b() const noexcept { return rgb_[2]; }
    const std::array<double, 3>& rgb() const noexcept { return rgb_; }

private:
    std::array<double, 3> rgb_{1.0, 1.0, 1.0};
};

namespace color {

Illuminant grayWorld(const ImageF& img);

/// Mean over `trials` of per-channel maxima of `samplesPerTrial` pixels drawn
/// uniformly with replacement. When samplesPerTrial covers the image every
/// trial uses all pixels. Bit-reproducible for a fixed seed.
Illuminant whitePatchSubsampled(const ImageF& img, std::size_t samplesPerTrial, std::size_t trials,
                                std::uint64_t seed);

inline constexpr double kGraynessEpsilon = 1e-4;

/// Gaussian-blurs the image, scores each pixel by the magnitude of the
/// log-chroma gradient (log R/G, log B/G), and averages the original RGB of
/// the grayest `topFraction` of valid pixels. Ties at the cut-off are kept.
Illuminant graynessIndex(const ImageF& img, double blurSigma = 3.0, double topFraction = 0.01,
                         double epsilon = kGraynessEpsilon);

/// Clamps the white-balance gains 1/r and 1/b into [lo, hi].
Illuminant clampGains(const Illuminant& l, double lo, double hi);

/// Diagonal von Kries correction (R / r, G, B / b). No clamping.
ImageF applyWb(const ImageF& img, const Illuminant& l);

ImageF cameraToXyz(const ImageF& img, const Mat3& cst);

/// IEC 61966-2-1 XYZ (D65) to linear sRGB.
inline constexpr Mat3 kXyzToSrgb{{{3.2406, -1.5372, -0.4986}, {-0.9689, 1.8758, 0.0415}, {0.0557, -0.2040, 1.0570}}};

/// Matrix conversion; negative results clamp to 0.
ImageF xyzToSrgbLinear(const ImageF& img);

double encodeSrgb(double linear);
double decodeSrgb(double encoded);
ImageF encodeSrgb(const ImageF& img);
ImageF decodeSrgb(const ImageF& img);

/// BT.601 full-range, chroma offset by 0.5.
ImageF rgbToYCbCr(const ImageF& img);
/// Inverse of rgbToYCbCr; the result carries `target` as its space tag.
ImageF yCbCrToRgb(const ImageF& img, ColorSpace target = ColorSpace::SrgbEncoded);

}  // namespace color
}  // namespace nightisp
