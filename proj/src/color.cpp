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

#include "nightisp/color.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nightisp/error.hpp"
#include "nightisp/filters.hpp"

namespace nightisp {

Illuminant Illuminant::fromRgb(double r, double g, double b) {
    for (double v : {r, g, b})
        if (!(v > 0.0) || !std::isfinite(v)) throw DegenerateImage("illuminant components must be finite and > 0");
    Illuminant l;
    l.rgb_ = {r / g, 1.0, b / g};
    return l;
}

namespace color {

namespace {

void requirePixels(const ImageF& img) {
    if (img.pixelCount() == 0) throw DegenerateImage("empty image");
}

ImageF applyMatrix(const ImageF& img, const Mat3& m, ColorSpace target, bool clampNegative) {
    ImageF out(img.width(), img.height(), target);
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    auto o0 = out.plane(0), o1 = out.plane(1), o2 = out.plane(2);
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        double v[3];
        for (std::size_t k = 0; k < 3; ++k) {
            v[k] = m[k][0] * r[i] + m[k][1] * g[i] + m[k][2] * b[i];
            if (clampNegative && v[k] < 0.0) v[k] = 0.0;
        }
        o0[i] = static_cast<float>(v[0]);
        o1[i] = static_cast<float>(v[1]);
        o2[i] = static_cast<float>(v[2]);
    }
    return out;
}

}  // namespace

Illuminant grayWorld(const ImageF& img) {
    requirePixels(img);
    double sum[3] = {0, 0, 0};
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : img.plane(c)) sum[c] += v;
    if (sum[0] <= 0.0 || sum[1] <= 0.0 || sum[2] <= 0.0)
        throw DegenerateImage("gray world needs a positive mean in every channel");
    const double n = static_cast<double>(img.pixelCount());
    return Illuminant::fromRgb(sum[0] / n, sum[1] / n, sum[2] / n);
}

Illuminant whitePatchSubsampled(const ImageF& img, std::size_t samplesPerTrial, std::size_t trials,
                                std::uint64_t seed) {
    requirePixels(img);
    if (samplesPerTrial == 0 || trials == 0) throw Error("white patch needs samples_per_trial >= 1 and trials >= 1");
    const std::size_t n = img.pixelCount();
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);

    double acc[3] = {0, 0, 0};
    if (samplesPerTrial >= n) {
        double mx[3] = {0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            mx[0] = std::max(mx[0], static_cast<double>(r[i]));
            mx[1] = std::max(mx[1], static_cast<double>(g[i]));
            mx[2] = std::max(mx[2], static_cast<double>(b[i]));
        }
        for (int c = 0; c < 3; ++c) acc[c] = mx[c] * static_cast<double>(trials);
    } else {
        std::mt19937_64 rng(seed);
        for (std::size_t t = 0; t < trials; ++t) {
            double mx[3] = {0, 0, 0};
            for (std::size_t s = 0; s < samplesPerTrial; ++s) {
                // Plain modulo keeps the draw sequence identical across standard libraries.
                const std::size_t i = static_cast<std::size_t>(rng() % n);
                mx[0] = std::max(mx[0], static_cast<double>(r[i]));
                mx[1] = std::max(mx[1], static_cast<double>(g[i]));
                mx[2] = std::max(mx[2], static_cast<double>(b[i]));
            }
            for (int c = 0; c < 3; ++c) acc[c] += mx[c];
        }
    }
    if (acc[0] <= 0.0 || acc[1] <= 0.0 || acc[2] <= 0.0) throw DegenerateImage("white patch found no signal in a channel");
    const auto tn = static_cast<double>(trials);
    return Illuminant::fromRgb(acc[0] / tn, acc[1] / tn, acc[2] / tn);
}

Illuminant graynessIndex(const ImageF& img, double blurSigma, double topFraction, double epsilon) {
    requirePixels(img);
    if (!(topFraction > 0.0 && topFraction <= 1.0)) throw Error("top_fraction must be in (0, 1]");
    const std::size_t w = img.width(), h = img.height(), n = img.pixelCount();

    std::array<std::vector<float>, 3> blurred;
    for (std::size_t c = 0; c < 3; ++c) blurred[c] = filters::gaussianBlur(img.plane(c), w, h, blurSigma);

    std::vector<std::uint8_t> valid(n);
    std::vector<double> logRg(n), logBg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = blurred[0][i], g = blurred[1][i], b = blurred[2][i];
        valid[i] = r > epsilon && g > epsilon && b > epsilon;
        if (valid[i]) {
            logRg[i] = std::log(r / g);
            logBg[i] = std::log(b / g);
        }
    }

    using filters::reflect101;
    const auto sw = static_cast<std::ptrdiff_t>(w), shh = static_cast<std::ptrdiff_t>(h);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n);
    for (std::ptrdiff_t y = 0; y < shh; ++y)
        for (std::ptrdiff_t x = 0; x < sw; ++x) {
            const auto i = static_cast<std::size_t>(y * sw + x);
            const auto l = static_cast<std::size_t>(y * sw + reflect101(x - 1, sw));
            const auto rr = static_cast<std::size_t>(y * sw + reflect101(x + 1, sw));
            const auto u = static_cast<std::size_t>(reflect101(y - 1, shh) * sw + x);
            const auto d = static_cast<std::size_t>(reflect101(y + 1, shh) * sw + x);
            if (!valid[i] || !valid[l] || !valid[rr] || !valid[u] || !valid[d]) continue;
            const double gxr = 0.5 * (logRg[rr] - logRg[l]), gyr = 0.5 * (logRg[d] - logRg[u]);
            const double gxb = 0.5 * (logBg[rr] - logBg[l]), gyb = 0.5 * (logBg[d] - logBg[u]);
            scored.emplace_back(std::sqrt(gxr * gxr + gyr * gyr + gxb * gxb + gyb * gyb), i);
        }
    if (scored.empty()) throw DegenerateImage("grayness index found no valid pixels");

    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(topFraction * static_cast<double>(scored.size()) - 1e-9)));
    std::vector<double> values(scored.size());
    std::transform(scored.begin(), scored.end(), values.begin(), [](const auto& s) { return s.first; });
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep - 1), values.end());
    // Ties at the cut-off stay in; the tolerance absorbs log roundoff on flat chroma.
    const double cutoff = values[keep - 1] + 1e-9;

    double sum[3] = {0, 0, 0};
    for (const auto& [gi, i] : scored) {
        if (gi > cutoff) continue;
        for (std::size_t c = 0; c < 3; ++c) sum[c] += img.plane(c)[i];
    }
    if (sum[0] <= 0.0 || sum[1] <= 0.0 || sum[2] <= 0.0) throw DegenerateImage("grayness index selected no signal");
    return Illuminant::fromRgb(sum[0], sum[1], sum[2]);
}

Illuminant clampGains(const Illuminant& l, double lo, double hi) {
    const double gr = std::clamp(1.0 / l.r(), lo, hi);
    const double gb = std::clamp(1.0 / l.b(), lo, hi);
    return Illuminant::fromRgb(1.0 / gr, 1.0, 1.0 / gb);
}

ImageF applyWb(const ImageF& img, const Illuminant& l) {
    ImageF out = img;
    const double inv[3] = {1.0 / l.r(), 1.0, 1.0 / l.b()};
    for (std::size_t c = 0; c < 3; c += 2)
        for (float& v : out.plane(c)) v = static_cast<float>(v * inv[c]);
    return out;
}

ImageF cameraToXyz(const ImageF& img, const Mat3& cst) {
    for (const auto& row : cst)
        for (double v : row)
            if (!std::isfinite(v)) throw Error("color matrix has non-finite entries");
    return applyMatrix(img, cst, ColorSpace::Xyz, false);
}

ImageF xyzToSrgbLinear(const ImageF& img) { return applyMatrix(img, kXyzToSrgb, ColorSpace::SrgbLinear, true); }

double encodeSrgb(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x <= 0.0031308 ? 12.92 * x : 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
}

double decodeSrgb(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

ImageF encodeSrgb(const ImageF& img) {
    ImageF out = img;
    out.setSpace(ColorSpace::SrgbEncoded);
    for (std::size_t c = 0; c < 3; ++c)
        for (float& v : out.plane(c)) v = static_cast<float>(encodeSrgb(v));
    return out;
}

ImageF decodeSrgb(const ImageF& img) {
    ImageF out = img;
    out.setSpace(ColorSpace::SrgbLinear);
    for (std::size_t c = 0; c < 3; ++c)
        for (float& v : out.plane(c)) v = static_cast<float>(decodeSrgb(v));
    return out;
}

ImageF rgbToYCbCr(const ImageF& img) {
    ImageF out(img.width(), img.height(), ColorSpace::YCbCr);
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    auto oy = out.plane(0), ocb = out.plane(1), ocr = out.plane(2);
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double y = kLumaWeights[0] * r[i] + kLumaWeights[1] * g[i] + kLumaWeights[2] * b[i];
        oy[i] = static_cast<float>(y);
        ocb[i] = static_cast<float>(0.5 + (b[i] - y) / 1.772);
        ocr[i] = static_cast<float>(0.5 + (r[i] - y) / 1.402);
    }
    return out;
}

ImageF yCbCrToRgb(const ImageF& img, ColorSpace target) {
    ImageF out(img.width(), img.height(), target);
    auto py = img.plane(0), pcb = img.plane(1), pcr = img.plane(2);
    auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double y = py[i];
        const double rr = y + 1.402 * (pcr[i] - 0.5);
        const double bb = y + 1.772 * (pcb[i] - 0.5);
        const double gg = (y - kLumaWeights[0] * rr - kLumaWeights[2] * bb) / kLumaWeights[1];
        r[i] = static_cast<float>(rr);
        g[i] = static_cast<float>(gg);
        b[i] = static_cast<float>(bb);
    }
    return out;
}

}  // namespace color
}  // namespace nightisp
