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
#include <optional>
#include <utility>
#include <vector>

#include "nightisp/image.hpp"

namespace nightisp::tone {

/// Knobs shared by the composite operators. Every field is finite;
/// 0 <= pLo < pHi <= 100; alpha > 0.
struct ToneParams {
    double beta = 1.0;
    double sCenter = 0.0;
    double sStrength = 1.0;
    double pLo = 0.0;
    double pHi = 100.0;
    double alpha = 1.0;
    std::size_t gridX = 1;
    std::size_t gridY = 1;
    double alphaScale = 1.0;
    double unsharpRadius = 2.0;
    double unsharpAmount = 0.0;
    double unsharpThreshold = 0.0;
    double gamma = 1.0;
    double saturation = 1.0;
    double autocontrastCutoff = 0.0;

    /// Throws Error naming the first offending field.
    void validate() const;
};

/// Moroney local contrast correction: m = blur(1 - Y), out = in^(2^((0.5 - m) / 0.5)).
ImageF localContrast(const ImageF& img, double maskSigma);

/// out = clamp(mean + beta * (in - mean)) with per-channel means.
ImageF meanContrast(const ImageF& img, double beta);

/// Power curve around `center`: below it out = c - c * ((c - x) / c)^s,
/// above it out = c + (1 - c) * ((x - c) / (1 - c))^s. With c = 0 this is x^s.
ImageF sCurve(const ImageF& img, double center, double strength);
double sCurveValue(double x, double center, double strength);

/// Linear percentile (numpy "linear" rule) of a sample set; p in [0, 100].
double percentile(std::vector<float> values, double p);

/// Per-channel map of the pLo percentile to 0 and pHi to 1, clamped. Channels
/// whose two percentiles coincide are left unchanged.
ImageF histogramStretch(const ImageF& img, double pLo, double pHi);

/// histogramStretch(cutoff, 100 - cutoff).
ImageF autocontrast(const ImageF& img, double cutoffPct);

/// Brightening gamma (params.gamma < 1) when mean luma < darkThresh, darkening
/// s-curve (params.sCenter, params.sStrength > 1) when mean luma > brightThresh,
/// identity otherwise.
ImageF conditionalContrast(const ImageF& img, double darkThresh, double brightThresh, const ToneParams& params);

/// Naka-Rushton response normalized to f(1) = 1: x / (x + alpha) * (1 + alpha).
inline double nakaRushtonValue(double x, double alpha) { return x / (x + alpha) * (1.0 + alpha); }
ImageF nakaRushton(const ImageF& img, double alpha);

inline constexpr double kGeomeanEpsilon = 1e-4;

/// exp(mean(log(Y + eps))) - eps over the given pixel rectangle, floored at eps.
double geometricMeanLuminance(const ImageF& img, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1);
double geometricMeanLuminance(const ImageF& img);

/// Tiled Naka-Rushton: alpha_t = alphaScale * geomean luminance per tile,
/// bilinearly interpolated between tile centres. A 1x1 grid is the global
/// operator with alpha = alphaScale * geomean. This is a reconstruction of an
/// undisclosed operator; the statistic driving alpha is an assumption.
ImageF niteTonemap(const ImageF& img, std::size_t gridX, std::size_t gridY, double alphaScale);

/// out = in + amount * (in - blur(in, radius)) where |detail| > threshold, clamped.
ImageF unsharpMask(const ImageF& img, double radius, double amount, double threshold);

/// Hue range in degrees on the Cb/Cr wheel, wrapping when lo > hi. Pixels
/// within `feather` degrees outside the range get a linearly fading weight.
struct HueWindow {
    double lo = 0.0;
    double hi = 360.0;
    double feather = 0.0;
};

/// Hue of an RGB triple as the Cb/Cr angle in degrees, [0, 360).
double hueDegrees(double r, double g, double b);

/// Scales chroma about luma by `factor` inside the window (everywhere when
/// absent). Luma and hue are kept; the scale is limited to stay in gamut.
ImageF saturationAdjust(const ImageF& img, double factor, std::optional<HueWindow> window = std::nullopt);

struct MemoryColor {
    double hueCenter = 0.0;
    double halfWidth = 30.0;
    double targetHue = 0.0;
    double satGain = 1.0;
};

/// Pulls hue toward each prototype's target and scales chroma, weighted by a
/// raised-cosine window around hueCenter. Windows must not overlap.
ImageF memoryColor(const ImageF& img, const std::vector<MemoryColor>& prototypes);

/// Knots (luma, gamma). The gamma applied to a pixel is interpolated linearly
/// in luma between knots and held constant outside. Throws KnotError unless
/// the knots are non-empty, strictly increasing and inside [0, 1].
ImageF piecewiseGamma(const ImageF& img, const std::vector<std::pair<double, double>>& knots);

}  // namespace nightisp::tone
