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

#include <gtest/gtest.h>

#include <cmath>

#include "nightisp/color.hpp"
#include "nightisp/error.hpp"
#include "synth.hpp"

using namespace nightisp;
namespace nt = nightisp::testing;

namespace {

ImageF castScene(std::size_t w, std::size_t h, std::array<double, 3> cast, unsigned seed) {
    ImageF img = nt::smoothRamp(w, h, seed);
    // Gray scene: copy one plane into all three, then apply the cast.
    const std::vector<float> base(img.plane(0).begin(), img.plane(0).end());
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixelCount(); ++i)
            img.plane(c)[i] = static_cast<float>(base[i] * cast[c]);
    return img;
}

double channelMean(const ImageF& img, std::size_t c) {
    double s = 0.0;
    for (float v : img.plane(c)) s += v;
    return s / img.pixelCount();
}

}  // namespace

TEST(GrayWorld, ConstantImage) {
    const auto l = color::grayWorld(nt::constantImage(8, 8, ColorSpace::CameraLinear, 0.5f, 0.25f, 0.25f));
    EXPECT_DOUBLE_EQ(l.r(), 2.0);
    EXPECT_DOUBLE_EQ(l.g(), 1.0);
    EXPECT_DOUBLE_EQ(l.b(), 1.0);
}

TEST(GrayWorld, GrayImageIsIdentity) {
    const auto l = color::grayWorld(nt::constantImage(8, 8, ColorSpace::CameraLinear, 0.3f, 0.3f, 0.3f));
    EXPECT_DOUBLE_EQ(l.r(), 1.0);
    EXPECT_DOUBLE_EQ(l.b(), 1.0);
}

TEST(GrayWorld, RecoversCast) {
    const auto l = color::grayWorld(castScene(64, 48, {0.6, 1.0, 0.8}, 1));
    EXPECT_NEAR(l.r(), 0.6, 1e-6);
    EXPECT_NEAR(l.b(), 0.8, 1e-6);
}

TEST(GrayWorld, ZeroChannelIsDegenerate) {
    EXPECT_THROW(color::grayWorld(nt::constantImage(4, 4, ColorSpace::CameraLinear, 0.5f, 0.5f, 0.0f)), DegenerateImage);
}

TEST(GrayWorld, ScaleInvariantAndBalancesMeans) {
    ImageF img = nt::edgeScene(48, 32, 2);
    ImageF scaled = img;
    for (std::size_t c = 0; c < 3; ++c)
        for (auto& v : scaled.plane(c)) v *= 3.0f;
    const auto a = color::grayWorld(img), b = color::grayWorld(scaled);
    EXPECT_NEAR(a.r(), b.r(), 1e-6);
    EXPECT_NEAR(a.b(), b.b(), 1e-6);
    const ImageF balanced = color::applyWb(img, a);
    EXPECT_NEAR(channelMean(balanced, 0), channelMean(balanced, 1), 1e-6);
    EXPECT_NEAR(channelMean(balanced, 2), channelMean(balanced, 1), 1e-6);
}

TEST(WhitePatch, ConstantMatchesGrayWorld) {
    const ImageF img = nt::constantImage(16, 16, ColorSpace::CameraLinear, 0.4f, 0.2f, 0.3f);
    const auto wp = color::whitePatchSubsampled(img, 32, 4, 9);
    const auto gw = color::grayWorld(img);
    EXPECT_DOUBLE_EQ(wp.r(), gw.r());
    EXPECT_DOUBLE_EQ(wp.b(), gw.b());
}

TEST(WhitePatch, ExhaustiveSamplingIsExactMax) {
    const ImageF img = nt::edgeScene(32, 24, 3);
    double mx[3] = {0, 0, 0};
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : img.plane(c)) mx[c] = std::max(mx[c], static_cast<double>(v));
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
        const auto l = color::whitePatchSubsampled(img, img.pixelCount(), 3, seed);
        EXPECT_NEAR(l.r(), mx[0] / mx[1], 1e-12);
        EXPECT_NEAR(l.b(), mx[2] / mx[1], 1e-12);
    }
}

TEST(WhitePatch, FindsWhitePatchUnderCast) {
    const std::array<double, 3> illum{0.7, 1.0, 0.5};
    ImageF img(64, 64, ColorSpace::CameraLinear);
    for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x) {
            const bool white = x >= 8 && x < 40 && y >= 8 && y < 40;
            const double refl[3] = {white ? 0.9 : 0.3 * (x % 3 == 0), white ? 0.9 : 0.2, white ? 0.9 : 0.35 * (y % 2)};
            for (std::size_t c = 0; c < 3; ++c) img.at(c, x, y) = static_cast<float>(refl[c] * illum[c]);
        }
    const auto l = color::whitePatchSubsampled(img, 256, 100, 5);
    EXPECT_NEAR(l.r() / illum[0], 1.0, 0.05);
    EXPECT_NEAR(l.b() / illum[2], 1.0, 0.05);
}

TEST(WhitePatch, ReproducibleForSeed) {
    const ImageF img = nt::addNoise(nt::edgeScene(64, 48, 4), 0.02, 1);
    const auto a = color::whitePatchSubsampled(img, 50, 20, 42);
    const auto b = color::whitePatchSubsampled(img, 50, 20, 42);
    EXPECT_EQ(a.rgb(), b.rgb());
}

TEST(WhitePatch, BlackImageIsDegenerate) {
    EXPECT_THROW(color::whitePatchSubsampled(ImageF(8, 8, ColorSpace::CameraLinear), 10, 2, 0), DegenerateImage);
}

TEST(GraynessIndex, GrayImageRecoversIlluminant) {
    const std::array<double, 3> illum{1.7, 1.0, 0.6};
    const auto l = color::graynessIndex(castScene(48, 40, illum, 6));
    EXPECT_NEAR(l.r(), illum[0], 1e-5);
    EXPECT_NEAR(l.b(), illum[2], 1e-5);
}

TEST(GraynessIndex, AchromaticRegionUnderCast) {
    ImageF img(96, 64, ColorSpace::CameraLinear);
    const std::array<double, 3> cast{2.0, 1.0, 1.0};
    for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 96; ++x) {
            std::array<double, 3> refl;
            if (x < 40) {
                refl = {0.2, 0.2, 0.2};
            } else {
                const double t = static_cast<double>(x - 40) / 56.0, u = static_cast<double>(y) / 64.0;
                refl = {0.05 + 0.3 * t, 0.3 - 0.2 * u * t, 0.1 + 0.25 * u};
            }
            for (std::size_t c = 0; c < 3; ++c) img.at(c, x, y) = static_cast<float>(refl[c] * cast[c] * 0.4);
        }
    const auto l = color::graynessIndex(img, 3.0, 0.1);
    EXPECT_NEAR(l.r() / 2.0, 1.0, 0.02);
    EXPECT_NEAR(l.b(), 1.0, 0.02);
}

TEST(GraynessIndex, FullFractionEqualsGrayWorldOnUniformChroma) {
    const ImageF img = castScene(40, 30, {1.2, 1.0, 0.9}, 7);
    const auto gi = color::graynessIndex(img, 3.0, 1.0);
    const auto gw = color::grayWorld(img);
    EXPECT_NEAR(gi.r(), gw.r(), 1e-6);
    EXPECT_NEAR(gi.b(), gw.b(), 1e-6);
}

TEST(GraynessIndex, ScaleInvariant) {
    const ImageF img = nt::edgeScene(64, 48, 8);
    ImageF scaled = img;
    for (std::size_t c = 0; c < 3; ++c)
        for (auto& v : scaled.plane(c)) v *= 0.25f;
    const auto a = color::graynessIndex(img, 2.0, 0.05), b = color::graynessIndex(scaled, 2.0, 0.05);
    EXPECT_NEAR(a.r(), b.r(), 1e-6);
    EXPECT_NEAR(a.b(), b.b(), 1e-6);
}

TEST(GraynessIndex, NoValidPixelsIsDegenerate) {
    EXPECT_THROW(color::graynessIndex(ImageF(8, 8, ColorSpace::CameraLinear)), DegenerateImage);
}

TEST(ApplyWb, IdentityAndInverseOfCast) {
    const ImageF img = nt::edgeScene(16, 12, 9);
    EXPECT_EQ(color::applyWb(img, Illuminant{}).plane(0)[5], img.plane(0)[5]);
    const std::array<double, 3> cast{1.6, 1.0, 0.7};
    const ImageF gray = color::applyWb(castScene(16, 12, cast, 10), Illuminant::fromRgb(1.6, 1.0, 0.7));
    for (std::size_t i = 0; i < gray.pixelCount(); ++i) {
        EXPECT_NEAR(gray.plane(0)[i], gray.plane(1)[i], 1e-6);
        EXPECT_NEAR(gray.plane(2)[i], gray.plane(1)[i], 1e-6);
    }
}

TEST(ApplyWb, AsShotNeutralNeutralisesGrayCard) {
    // Frame rendered with a known neutral; a gray card must come out achromatic.
    const auto raw = nt::syntheticNightFrame(64, 48, 4, "card");
    ImageF img(8, 8, ColorSpace::CameraLinear);
    for (std::size_t c = 0; c < 3; ++c)
        for (auto& v : img.plane(c)) v = static_cast<float>(0.18 * raw.meta.asShotNeutral[c]);
    const auto n = raw.meta.asShotNeutral;
    const ImageF out = color::applyWb(img, Illuminant::fromRgb(n[0], n[1], n[2]));
    EXPECT_NEAR(out.plane(0)[0] / out.plane(1)[0], 1.0, 0.05);
    EXPECT_NEAR(out.plane(2)[0] / out.plane(1)[0], 1.0, 0.05);
}

TEST(ClampGains, LimitsDiagonal) {
    const auto l = color::clampGains(Illuminant::fromRgb(0.1, 1.0, 3.0), 0.5, 4.0);
    EXPECT_NEAR(1.0 / l.r(), 4.0, 1e-12);
    EXPECT_NEAR(1.0 / l.b(), 0.5, 1e-12);
}

TEST(CameraToXyz, MatrixCases) {
    const ImageF img = nt::constantImage(4, 4, ColorSpace::CameraLinear, 0.25f, 0.25f, 0.25f);
    const ImageF same = color::cameraToXyz(img, kIdentity3);
    EXPECT_EQ(same.space(), ColorSpace::Xyz);
    EXPECT_EQ(same.plane(1)[3], 0.25f);
    const ImageF doubled = color::cameraToXyz(img, {{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}});
    EXPECT_FLOAT_EQ(doubled.plane(2)[0], 0.5f);
    const Mat3 m{{{0.4, 0.3, 0.2}, {0.1, 0.8, 0.05}, {0.0, 0.1, 1.0}}};
    const ImageF ones = color::cameraToXyz(nt::constantImage(2, 2, ColorSpace::CameraLinear, 1, 1, 1), m);
    EXPECT_FLOAT_EQ(ones.plane(0)[0], 0.9f);
    EXPECT_FLOAT_EQ(ones.plane(1)[0], 0.95f);
    EXPECT_FLOAT_EQ(ones.plane(2)[0], 1.1f);
}

TEST(XyzToSrgb, BlackWhiteAndClamp) {
    const ImageF black = color::xyzToSrgbLinear(ImageF(2, 2, ColorSpace::Xyz));
    EXPECT_EQ(black.plane(0)[0], 0.0f);
    EXPECT_EQ(black.space(), ColorSpace::SrgbLinear);
    const ImageF white = color::xyzToSrgbLinear(nt::constantImage(2, 2, ColorSpace::Xyz, 0.9505f, 1.0f, 1.089f));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(white.plane(c)[0], 1.0, 1e-3);
    // Spectral 520 nm is far outside sRGB.
    const ImageF mono = color::xyzToSrgbLinear(nt::constantImage(1, 1, ColorSpace::Xyz, 0.0633f, 0.71f, 0.0782f));
    EXPECT_EQ(std::min({mono.plane(0)[0], mono.plane(1)[0], mono.plane(2)[0]}), 0.0f);
}

TEST(EncodeSrgb, ClosedFormValues) {
    EXPECT_EQ(color::encodeSrgb(0.0), 0.0);
    EXPECT_NEAR(color::encodeSrgb(1.0), 1.0, 1e-12);
    EXPECT_NEAR(color::encodeSrgb(0.0031308), 0.04045, 1e-5);
    EXPECT_NEAR(12.92 * 0.0031308, 1.055 * std::pow(0.0031308, 1 / 2.4) - 0.055, 1e-5);
    EXPECT_NEAR(color::encodeSrgb(0.18), 1.055 * std::pow(0.18, 1 / 2.4) - 0.055, 1e-12);
    EXPECT_NEAR(color::encodeSrgb(0.18), 0.4613, 1e-4);
    EXPECT_EQ(color::encodeSrgb(1.7), color::encodeSrgb(1.0));
}

TEST(EncodeSrgb, RoundTrip) {
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        EXPECT_NEAR(color::decodeSrgb(color::encodeSrgb(x)), x, 1e-6);
    }
}

TEST(YCbCr, GrayAxisAndRed) {
    const ImageF g = color::rgbToYCbCr(nt::constantImage(2, 2, ColorSpace::SrgbEncoded, 0.4f, 0.4f, 0.4f));
    EXPECT_EQ(g.space(), ColorSpace::YCbCr);
    EXPECT_NEAR(g.plane(0)[0], 0.4, 1e-7);
    EXPECT_NEAR(g.plane(1)[0], 0.5, 1e-7);
    EXPECT_NEAR(g.plane(2)[0], 0.5, 1e-7);
    const ImageF r = color::rgbToYCbCr(nt::constantImage(1, 1, ColorSpace::SrgbEncoded, 1, 0, 0));
    EXPECT_NEAR(r.plane(0)[0], 0.299, 1e-7);
}

TEST(YCbCr, RoundTrip) {
    ImageF img = nt::addNoise(nt::constantImage(32, 32, ColorSpace::SrgbEncoded, 0.5f, 0.5f, 0.5f), 0.2, 3);
    for (std::size_t c = 0; c < 3; ++c)
        for (auto& v : img.plane(c)) v = std::clamp(v, 0.0f, 1.0f);
    const ImageF back = color::yCbCrToRgb(color::rgbToYCbCr(img));
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixelCount(); ++i) EXPECT_NEAR(back.plane(c)[i], img.plane(c)[i], 1e-6);
}
