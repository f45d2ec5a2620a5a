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

#include <algorithm>
#include <cmath>

#include "nightisp/error.hpp"
#include "nightisp/mosaic.hpp"
#include "nightisp/rawio.hpp"
#include "synth.hpp"

using namespace nightisp;
namespace nt = nightisp::testing;

namespace {

MosaicF constantMosaic(std::size_t w, std::size_t h, float v) {
    MosaicF m;
    m.width = w;
    m.height = h;
    m.plane.assign(w * h, v);
    return m;
}

RawFrame singleSampleFrame(double black, double white, std::uint16_t v) {
    RawFrame raw;
    raw.width = 2;
    raw.height = 2;
    raw.samples.assign(4, v);
    raw.meta.blackLevel = black;
    raw.meta.whiteLevel = white;
    return raw;
}

ImageF randomImage(std::size_t w, std::size_t h, unsigned seed) {
    return nt::addNoise(nt::constantImage(w, h, ColorSpace::SrgbLinear, 0.5f, 0.5f, 0.5f), 0.2, seed);
}

}  // namespace

TEST(NormalizeLevels, Endpoints) {
    EXPECT_EQ(mosaic::normalizeLevels(singleSampleFrame(1024, 16383, 1024)).plane[0], 0.0f);
    EXPECT_EQ(mosaic::normalizeLevels(singleSampleFrame(1024, 16383, 16383)).plane[0], 1.0f);
    EXPECT_EQ(mosaic::normalizeLevels(singleSampleFrame(1024, 16383, 60000)).plane[0], 1.0f);
    EXPECT_EQ(mosaic::normalizeLevels(singleSampleFrame(1024, 16383, 10)).plane[0], 0.0f);
}

TEST(NormalizeLevels, MidValue) {
    const double expected = (8704.0 - 1024.0) / 15359.0;
    EXPECT_NEAR(mosaic::normalizeLevels(singleSampleFrame(1024, 16383, 8704)).plane[0], expected, 1e-6);
    EXPECT_NEAR(expected, 0.50003, 1e-5);
}

TEST(ShadingCorrect, UnitGainIsIdentity) {
    const auto m = nt::mosaicFromRgb(nt::smoothRamp(32, 24, 1));
    const GainMap g = rawio::buildGainMap(constantMosaic(32, 24, 0.5f));
    EXPECT_EQ(mosaic::shadingCorrect(m, g).plane, m.plane);
}

TEST(ShadingCorrect, ScalarGain) {
    GainMap g;
    g.mosaicWidth = 8;
    g.mosaicHeight = 8;
    g.gridWidth = 4;
    g.gridHeight = 4;
    for (auto& site : g.gains) site.assign(16, 2.0f);
    const auto out = mosaic::shadingCorrect(constantMosaic(8, 8, 0.25f), g);
    for (float v : out.plane) EXPECT_EQ(v, 0.5f);
}

TEST(ShadingCorrect, CoarseGridUpsamples) {
    GainMap g;
    g.mosaicWidth = 16;
    g.mosaicHeight = 16;
    g.gridWidth = 2;
    g.gridHeight = 2;
    for (auto& site : g.gains) site.assign(4, 1.5f);
    const auto out = mosaic::shadingCorrect(constantMosaic(16, 16, 0.5f), g);
    for (float v : out.plane) EXPECT_FLOAT_EQ(v, 0.75f);
}

TEST(ShadingCorrect, SizeMismatchRaises) {
    const GainMap g = rawio::buildGainMap(constantMosaic(16, 16, 0.5f));
    EXPECT_THROW(mosaic::shadingCorrect(constantMosaic(8, 8, 0.5f), g), DimensionError);
}

TEST(ShadingCorrect, FalloffRoundTrip) {
    const std::size_t w = 320, h = 240;
    const double k = 0.003, cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    MosaicF m = constantMosaic(w, h, 0.0f);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            m.at(x, y) = static_cast<float>(0.6 * std::pow(std::cos(k * std::hypot(x - cx, y - cy)), 4));
    const auto corrected = mosaic::shadingCorrect(m, rawio::buildGainMap(m, 4.0, 4.0));
    const double center = corrected.at(w / 2, h / 2);
    for (auto [x, y] : {std::pair<std::size_t, std::size_t>{0, 0}, {w - 1, 0}, {0, h - 1}, {w - 1, h - 1}})
        EXPECT_NEAR(corrected.at(x, y) / center, 1.0, 0.05);
}

TEST(DemosaicBilinear, ConstantIsPreserved) {
    for (const char* pattern : {"RGGB", "BGGR", "GRBG", "GBRG"}) {
        MosaicF m = constantMosaic(10, 8, 0.37f);
        m.cfa = Cfa::parse(pattern);
        const ImageF img = mosaic::demosaicBilinear(m);
        for (std::size_t c = 0; c < 3; ++c)
            for (float v : img.plane(c)) EXPECT_FLOAT_EQ(v, 0.37f);
        EXPECT_EQ(img.space(), ColorSpace::CameraLinear);
    }
}

TEST(DemosaicBilinear, ChannelSeparation) {
    MosaicF m = constantMosaic(4, 4, 0.0f);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            if (m.cfa.at(x, y) == CfaColor::R) m.at(x, y) = 1.0f;
    const ImageF img = mosaic::demosaicBilinear(m);
    for (float v : img.plane(0)) EXPECT_FLOAT_EQ(v, 1.0f);
    for (std::size_t c = 1; c < 3; ++c)
        for (float v : img.plane(c)) EXPECT_EQ(v, 0.0f);
}

TEST(DemosaicBilinear, RampPsnrAbove40dB) {
    const ImageF truth = nt::smoothRamp(256, 192, 11);
    const ImageF out = mosaic::demosaicBilinear(nt::mosaicFromRgb(truth));
    EXPECT_GE(nt::psnr(truth, out, 2), 40.0);
}

TEST(DemosaicBilinear, OddSizeRejected) {
    EXPECT_THROW(mosaic::demosaicBilinear(constantMosaic(5, 4, 0.1f)), DimensionError);
}

TEST(DemosaicDirectional, ConstantIsPreserved) {
    const ImageF img = mosaic::demosaicDirectional(constantMosaic(16, 12, 0.42f));
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : img.plane(c)) EXPECT_NEAR(v, 0.42f, 1e-6f);
}

TEST(DemosaicDirectional, VerticalStepHasNoZipper) {
    const std::size_t w = 32, h = 32;
    ImageF truth(w, h, ColorSpace::CameraLinear);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) truth.at(c, x, y) = x < 15 ? 0.2f : 0.8f;
    const ImageF out = mosaic::demosaicDirectional(nt::mosaicFromRgb(truth));
    for (std::size_t y = 2; y + 2 < h; ++y)
        for (std::size_t x = 12; x < 18; ++x) EXPECT_NEAR(out.at(1, x, y), truth.at(1, x, y), 1e-6) << x << "," << y;
}

TEST(DemosaicDirectional, BeatsBilinearOnEdges) {
    double bil = 0.0, dir = 0.0;
    for (unsigned s = 0; s < 5; ++s) {
        const ImageF truth = nt::edgeScene(128, 96, 100 + s);
        const auto m = nt::mosaicFromRgb(truth);
        bil += nt::psnr(truth, mosaic::demosaicBilinear(m), 4);
        dir += nt::psnr(truth, mosaic::demosaicDirectional(m), 4);
    }
    EXPECT_GE(dir / 5, bil / 5 + 1.0);
}

TEST(DemosaicDirectional, TooSmallRejected) {
    EXPECT_THROW(mosaic::demosaicDirectional(constantMosaic(6, 6, 0.1f)), DimensionError);
}

TEST(ResizeBox, SameSizeIsBitIdentical) {
    const ImageF img = randomImage(17, 9, 1);
    EXPECT_EQ(mosaic::resizeBox(img, 17, 9), img);
}

TEST(ResizeBox, ConstantDownscale) {
    const ImageF out = mosaic::resizeBox(nt::constantImage(4, 4, ColorSpace::Xyz, 0.3f, 0.3f, 0.3f), 2, 2);
    EXPECT_EQ(out.width(), 2u);
    EXPECT_EQ(out.space(), ColorSpace::Xyz);
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : out.plane(c)) EXPECT_FLOAT_EQ(v, 0.3f);
}

TEST(ResizeBox, AreaAverage) {
    ImageF img(2, 1, ColorSpace::SrgbLinear);
    for (std::size_t c = 0; c < 3; ++c) {
        img.at(c, 0, 0) = 0.0f;
        img.at(c, 1, 0) = 1.0f;
    }
    const ImageF out = mosaic::resizeBox(img, 1, 1);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(out.at(c, 0, 0), 0.5f);
}

TEST(ResizeBox, ZeroSizeRaises) {
    EXPECT_THROW(mosaic::resizeBox(randomImage(4, 4, 2), 0, 2), DimensionError);
}

TEST(ResizeBox, IntegerDownscalePreservesMean) {
    const ImageF img = randomImage(96, 64, 3);
    const ImageF out = mosaic::resizeBox(img, 24, 16);
    for (std::size_t c = 0; c < 3; ++c) {
        double a = 0.0, b = 0.0;
        for (float v : img.plane(c)) a += v;
        for (float v : out.plane(c)) b += v;
        EXPECT_NEAR(a / img.pixelCount(), b / out.pixelCount(), 1e-6);
    }
}

TEST(ResizeBox, UpscaleStaysInRange) {
    const ImageF img = nt::smoothRamp(16, 12, 4);
    const ImageF out = mosaic::resizeBox(img, 40, 30);
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : out.plane(c)) {
            EXPECT_GE(v, 0.1f - 1e-6f);
            EXPECT_LE(v, 0.9f + 1e-6f);
        }
}

TEST(Orient, NormalIsIdentity) {
    const ImageF img = randomImage(7, 5, 5);
    EXPECT_EQ(mosaic::orient(img, Orientation::Normal), img);
}

TEST(Orient, Rotate90Definition) {
    const ImageF img = randomImage(7, 5, 6);
    const ImageF r = mosaic::orient(img, Orientation::Rotate90);
    ASSERT_EQ(r.width(), 5u);
    ASSERT_EQ(r.height(), 7u);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 7; ++x) EXPECT_EQ(r.at(0, 5 - 1 - y, x), img.at(0, x, y));
}

TEST(Orient, GroupProperties) {
    const ImageF img = randomImage(6, 4, 7);
    ImageF r = img;
    for (int i = 0; i < 4; ++i) r = mosaic::orient(r, Orientation::Rotate90);
    EXPECT_EQ(r, img);
    EXPECT_EQ(mosaic::orient(mosaic::orient(img, Orientation::Rotate180), Orientation::Rotate180), img);
    EXPECT_EQ(mosaic::orient(mosaic::orient(img, Orientation::Rotate90), Orientation::Rotate270), img);
}

TEST(Orient, PreservesValueMultiset) {
    const ImageF img = randomImage(9, 4, 8);
    const ImageF r = mosaic::orient(img, Orientation::Rotate270);
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<float> a(img.plane(c).begin(), img.plane(c).end()), b(r.plane(c).begin(), r.plane(c).end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        EXPECT_EQ(a, b);
    }
}

TEST(PackResize, ConstantMosaicGivesConstantImage) {
    const ImageF img = mosaic::packResize(constantMosaic(64, 48, 0.25f), 16, 12);
    EXPECT_EQ(img.width(), 16u);
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : img.plane(c)) EXPECT_FLOAT_EQ(v, 0.25f);
}
