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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nightisp/color.hpp"
#include "nightisp/denoise.hpp"
#include "nightisp/error.hpp"
#include "nightisp/mosaic.hpp"
#include "nightisp/pipeline.hpp"
#include "nightisp/tone.hpp"

namespace nightisp::pipeline {

namespace {

using S = Space;

const std::vector<Space> kRgbSpaces{S::CameraLinear, S::SrgbLinear, S::SrgbEncoded};
const std::vector<Space> kImageSpaces{S::CameraLinear, S::Xyz, S::SrgbLinear, S::SrgbEncoded};
const std::vector<Space> kDisplaySpaces{S::SrgbLinear, S::SrgbEncoded};

ParamSpec num(std::string name, double def, std::optional<double> lo = std::nullopt,
              std::optional<double> hi = std::nullopt, bool exclusive = false) {
    return {std::move(name), ParamType::Number, def, lo, hi, exclusive};
}

ParamSpec positive(std::string name, double def) { return num(std::move(name), def, 0.0, std::nullopt, true); }

ParamSpec integer(std::string name, long def, double lo, std::optional<double> hi = std::nullopt) {
    return {std::move(name), ParamType::Integer, def, lo, hi, false};
}

ParamSpec optionalNumber(std::string name, std::optional<double> lo = std::nullopt,
                         std::optional<double> hi = std::nullopt) {
    return {std::move(name), ParamType::OptionalNumber, nullptr, lo, hi, false};
}

ParamSpec array(std::string name, Json def) { return {std::move(name), ParamType::Array, std::move(def), {}, {}, false}; }

ImageF& image(Payload& p) {
    if (auto* img = std::get_if<ImageF>(&p)) return *img;
    throw Error("stage expects an image payload");
}

MosaicF& mosaicOf(Payload& p) {
    if (auto* m = std::get_if<MosaicF>(&p)) return *m;
    throw Error("stage expects a mosaic payload");
}

const RawFrame& rawOf(const RunContext& ctx) {
    if (!ctx.raw) throw Error("stage needs the raw frame");
    return *ctx.raw;
}

template <typename F>
std::function<Payload(Payload&&, const Json&, RunContext&)> onImage(F f) {
    return [f](Payload&& p, const Json& params, RunContext& ctx) -> Payload { return f(image(p), params, ctx); };
}

double d(const Json& params, const char* key) { return params.at(key).get<double>(); }
std::size_t z(const Json& params, const char* key) { return params.at(key).get<std::size_t>(); }

ImageF whiteBalance(const ImageF& img, const Illuminant& l) { return color::applyWb(img, l); }

ImageF ycbcrOp(const ImageF& img, const std::function<ImageF(const ImageF&)>& op) {
    return denoise::viaYCbCr(img, op);
}

double meanLuma(const ImageF& img) {
    const auto y = luma(img);
    double s = 0.0;
    for (float v : y) s += v;
    return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

std::optional<tone::HueWindow> hueWindow(const Json& params) {
    const bool hasLo = !params.at("hue_lo").is_null(), hasHi = !params.at("hue_hi").is_null();
    if (hasLo != hasHi) throw Error("hue_lo and hue_hi must be given together");
    if (!hasLo) return std::nullopt;
    return tone::HueWindow{d(params, "hue_lo"), d(params, "hue_hi"), d(params, "feather")};
}

std::vector<tone::MemoryColor> prototypes(const Json& params) {
    std::vector<tone::MemoryColor> out;
    for (const auto& p : params.at("prototypes")) {
        if (!p.is_object()) throw Error("memory color prototypes must be objects");
        tone::MemoryColor m;
        m.hueCenter = p.at("hue_center").get<double>();
        m.halfWidth = p.at("half_width").get<double>();
        m.targetHue = p.value("target_hue", m.hueCenter);
        m.satGain = p.value("sat_gain", 1.0);
        out.push_back(m);
    }
    return out;
}

std::vector<std::pair<double, double>> knots(const Json& params) {
    std::vector<std::pair<double, double>> out;
    for (const auto& k : params.at("knots")) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
            throw Error("knots must be [luma, gamma] pairs");
        out.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return out;
}

tone::ToneParams conditionalParams(const Json& params) {
    tone::ToneParams t;
    t.gamma = d(params, "dark_gamma");
    t.sCenter = d(params, "bright_center");
    t.sStrength = d(params, "bright_strength");
    return t;
}

Registry makeBuiltin() {
    Registry r;

    // Raw and mosaic domain.
    r.add({"normalize_levels", {S::Raw}, S::Mosaic, {}, {},
           [](Payload&&, const Json&, RunContext& ctx) -> Payload { return mosaic::normalizeLevels(rawOf(ctx)); }});
    r.add({"shading_correct", {S::Mosaic}, std::nullopt, {}, {},
           [](Payload&& p, const Json&, RunContext& ctx) -> Payload {
               MosaicF& m = mosaicOf(p);
               if (!ctx.gainMap) return std::move(m);
               return mosaic::shadingCorrect(m, *ctx.gainMap);
           }});
    r.add({"demosaic_bilinear", {S::Mosaic}, S::CameraLinear, {}, {},
           [](Payload&& p, const Json&, RunContext&) -> Payload { return mosaic::demosaicBilinear(mosaicOf(p)); }});
    r.add({"demosaic_menon", {S::Mosaic}, S::CameraLinear, {}, {},
           [](Payload&& p, const Json&, RunContext&) -> Payload { return mosaic::demosaicDirectional(mosaicOf(p)); }});
    r.add({"pack_resize", {S::Mosaic}, S::CameraLinear, {}, {},
           [](Payload&& p, const Json&, RunContext& ctx) -> Payload {
               const MosaicF& m = mosaicOf(p);
               const auto [w, h] = ctx.output.canvasFor(m.width / 2, m.height / 2);
               return mosaic::packResize(m, w, h);
           }});

    // Geometry.
    r.add({"resize", kImageSpaces, std::nullopt, {}, {}, onImage([](ImageF& img, const Json&, RunContext& ctx) {
               const auto [w, h] = ctx.output.canvasFor(img.width(), img.height());
               return mosaic::resizeBox(img, w, h);
           })});
    r.add({"orient", kImageSpaces, std::nullopt, {}, {}, onImage([](ImageF& img, const Json&, RunContext& ctx) {
               return mosaic::orient(img, rawOf(ctx).meta.orientation);
           })});
    r.add({"fit_output", kImageSpaces, std::nullopt, {}, {}, onImage([](ImageF& img, const Json&, RunContext& ctx) {
               ImageF oriented = mosaic::orient(img, rawOf(ctx).meta.orientation);
               const auto [w, h] = ctx.output.canvasFor(oriented.width(), oriented.height());
               return mosaic::resizeBox(oriented, w, h);
           })});

    // White balance.
    r.add({"wb_metadata", kRgbSpaces, std::nullopt, {}, {}, onImage([](ImageF& img, const Json&, RunContext& ctx) {
               const auto& n = rawOf(ctx).meta.asShotNeutral;
               return whiteBalance(img, Illuminant::fromRgb(n[0], n[1], n[2]));
           })});
    r.add({"wb_gray_world", kRgbSpaces, std::nullopt, {}, {},
           onImage([](ImageF& img, const Json&, RunContext&) { return whiteBalance(img, color::grayWorld(img)); })});
    r.add({"wb_white_patch",
           kRgbSpaces,
           std::nullopt,
           {integer("samples_per_trial", 256, 1), integer("trials", 64, 1), positive("gain_lo", 0.5),
            positive("gain_hi", 4.0)},
           [](const Json& p) {
               if (d(p, "gain_lo") > d(p, "gain_hi")) throw Error("gain_lo must not exceed gain_hi");
           },
           onImage([](ImageF& img, const Json& p, RunContext& ctx) {
               const auto l = color::whitePatchSubsampled(img, z(p, "samples_per_trial"), z(p, "trials"), ctx.seed);
               return whiteBalance(img, color::clampGains(l, d(p, "gain_lo"), d(p, "gain_hi")));
           })});
    r.add({"wb_grayness_index",
           kRgbSpaces,
           std::nullopt,
           {num("blur_sigma", 3.0, 0.0), num("top_fraction", 0.01, 0.0, 1.0, true)},
           {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return whiteBalance(img, color::graynessIndex(img, d(p, "blur_sigma"), d(p, "top_fraction")));
           })});

    // Colour conversion.
    r.add({"camera_to_xyz", {S::CameraLinear}, S::Xyz, {}, {}, onImage([](ImageF& img, const Json&, RunContext& ctx) {
               return color::cameraToXyz(img, rawOf(ctx).meta.cst);
           })});
    r.add({"xyz_to_srgb_linear", {S::Xyz}, S::SrgbLinear, {}, {},
           onImage([](ImageF& img, const Json&, RunContext&) { return color::xyzToSrgbLinear(img); })});
    r.add({"encode_srgb", {S::SrgbLinear}, S::SrgbEncoded, {}, {},
           onImage([](ImageF& img, const Json&, RunContext&) { return color::encodeSrgb(img); })});
    r.add({"xyz_to_srgb", {S::Xyz}, S::SrgbEncoded, {}, {}, onImage([](ImageF& img, const Json&, RunContext&) {
               return color::encodeSrgb(color::xyzToSrgbLinear(img));
           })});

    // Denoising.
    r.add({"nlm_denoise",
           kRgbSpaces,
           std::nullopt,
           {num("k_luma", 0.6, 0.0), num("k_chroma", 1.2, 0.0), integer("patch", 7, 1, 15), integer("window", 21, 1, 51),
            optionalNumber("sigma", 0.0)},
           [](const Json& p) {
               if (z(p, "patch") % 2 == 0 || z(p, "window") % 2 == 0) throw Error("patch and window must be odd");
               if (d(p, "k_chroma") < d(p, "k_luma")) throw Error("k_chroma must be >= k_luma");
           },
           onImage([](ImageF& img, const Json& p, RunContext&) {
               const NoiseEstimate sigma =
                   p.at("sigma").is_null() ? denoise::estimateNoiseSigma(img) : NoiseEstimate{d(p, "sigma")};
               return denoise::nlmDenoise(img, sigma, {d(p, "k_luma"), d(p, "k_chroma"), z(p, "patch"), z(p, "window")});
           })});
    r.add({"gaussian_chroma",
           kRgbSpaces,
           std::nullopt,
           {num("sigma", 2.0, 0.0), optionalNumber("luma_gate", 0.0, 1.0)},
           {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               if (!p.at("luma_gate").is_null() && meanLuma(img) >= d(p, "luma_gate")) return std::move(img);
               const double sigma = d(p, "sigma");
               return ycbcrOp(img, [sigma](const ImageF& ycc) { return denoise::gaussianChroma(ycc, sigma); });
           })});
    r.add({"tv_denoise_luma",
           kRgbSpaces,
           std::nullopt,
           {num("lambda", 0.1, 0.0), integer("iterations", 30, 1)},
           {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               const double lambda = d(p, "lambda");
               const std::size_t iterations = z(p, "iterations");
               return ycbcrOp(img, [=](const ImageF& ycc) { return denoise::tvDenoiseLuma(ycc, lambda, iterations); });
           })});

    // Tone, contrast, colour appearance.
    r.add({"local_contrast", kDisplaySpaces, std::nullopt, {positive("mask_sigma", 15.0)}, {},
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::localContrast(img, d(p, "mask_sigma")); })});
    r.add({"mean_contrast", kDisplaySpaces, std::nullopt, {num("beta", 1.0, 0.0)}, {},
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::meanContrast(img, d(p, "beta")); })});
    r.add({"s_curve", kDisplaySpaces, std::nullopt, {num("center", 0.0, 0.0, 1.0), positive("strength", 1.0)}, {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::sCurve(img, d(p, "center"), d(p, "strength"));
           })});
    r.add({"histogram_stretch",
           kDisplaySpaces,
           std::nullopt,
           {num("p_lo", 0.0, 0.0, 100.0), num("p_hi", 100.0, 0.0, 100.0)},
           [](const Json& p) {
               if (!(d(p, "p_lo") < d(p, "p_hi"))) throw Error("p_lo must be below p_hi");
           },
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::histogramStretch(img, d(p, "p_lo"), d(p, "p_hi"));
           })});
    r.add({"autocontrast", kDisplaySpaces, std::nullopt, {num("cutoff", 0.0, 0.0, 49.999)}, {},
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::autocontrast(img, d(p, "cutoff")); })});
    r.add({"conditional_contrast",
           kDisplaySpaces,
           std::nullopt,
           {num("dark_thresh", 0.18, 0.0, 1.0), num("bright_thresh", 0.55, 0.0, 1.0), num("dark_gamma", 0.8, 0.0, 1.0, true),
            num("bright_center", 0.0, 0.0, 1.0), num("bright_strength", 1.2, 1.0, std::nullopt, true)},
           [](const Json& p) {
               if (!(d(p, "dark_thresh") < d(p, "bright_thresh"))) throw Error("dark_thresh must be below bright_thresh");
               if (!(d(p, "dark_gamma") < 1.0)) throw Error("dark_gamma must be < 1");
           },
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::conditionalContrast(img, d(p, "dark_thresh"), d(p, "bright_thresh"), conditionalParams(p));
           })});
    r.add({"naka_rushton", kDisplaySpaces, std::nullopt, {positive("alpha", 1.0)}, {},
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::nakaRushton(img, d(p, "alpha")); })});
    r.add({"nite_tonemap",
           kDisplaySpaces,
           std::nullopt,
           {integer("grid_x", 1, 1, 64), integer("grid_y", 1, 1, 64), positive("alpha_scale", 1.0)},
           {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::niteTonemap(img, z(p, "grid_x"), z(p, "grid_y"), d(p, "alpha_scale"));
           })});
    r.add({"unsharp_mask",
           kDisplaySpaces,
           std::nullopt,
           {positive("radius", 2.0), num("amount", 0.0, 0.0), num("threshold", 0.0, 0.0, 1.0)},
           {},
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::unsharpMask(img, d(p, "radius"), d(p, "amount"), d(p, "threshold"));
           })});
    r.add({"saturation",
           kDisplaySpaces,
           std::nullopt,
           {num("factor", 1.0, 0.0), optionalNumber("hue_lo", 0.0, 360.0), optionalNumber("hue_hi", 0.0, 360.0),
            num("feather", 0.0, 0.0, 180.0)},
           [](const Json& p) { hueWindow(p); },
           onImage([](ImageF& img, const Json& p, RunContext&) {
               return tone::saturationAdjust(img, d(p, "factor"), hueWindow(p));
           })});
    r.add({"memory_color", kDisplaySpaces, std::nullopt, {array("prototypes", Json::array())},
           [](const Json& p) {
               const auto protos = prototypes(p);
               tone::memoryColor(ImageF(1, 1, ColorSpace::SrgbEncoded), protos);
           },
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::memoryColor(img, prototypes(p)); })});
    r.add({"piecewise_gamma", kDisplaySpaces, std::nullopt, {array("knots", Json::array({{0.0, 1.0}, {1.0, 1.0}}))},
           [](const Json& p) {
               const auto k = knots(p);
               tone::piecewiseGamma(ImageF(1, 1, ColorSpace::SrgbEncoded), k);
           },
           onImage([](ImageF& img, const Json& p, RunContext&) { return tone::piecewiseGamma(img, knots(p)); })});

    r.add({"noop", kImageSpaces, std::nullopt, {}, {},
           [](Payload&& p, const Json&, RunContext&) -> Payload { return std::move(p); }});
    return r;
}

}  // namespace

const Registry& Registry::builtin() {
    static const Registry registry = makeBuiltin();
    return registry;
}

}  // namespace nightisp::pipeline
