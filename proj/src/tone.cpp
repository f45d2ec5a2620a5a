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

#include "nightisp/tone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nightisp/error.hpp"
#include "nightisp/filters.hpp"

namespace nightisp::tone {

namespace {

inline double unit(double v) { return std::clamp(v, 0.0, 1.0); }

void requireFinite(double v, const char* name) {
    if (!std::isfinite(v)) throw Error(std::string("tone parameter ") + name + " must be finite");
}

template <typename F>
ImageF mapChannels(const ImageF& img, F&& f) {
    ImageF out = img;
    for (std::size_t c = 0; c < 3; ++c)
        for (float& v : out.plane(c)) v = static_cast<float>(unit(f(unit(v))));
    return out;
}

double lumaAt(const ImageF& img, std::size_t i) {
    return kLumaWeights[0] * unit(img.plane(0)[i]) + kLumaWeights[1] * unit(img.plane(1)[i]) +
           kLumaWeights[2] * unit(img.plane(2)[i]);
}

/// Signed distance a - b on the hue circle, in (-180, 180].
double hueDelta(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

double windowWeight(const HueWindow& w, double hue) {
    const double span = std::fmod(w.hi - w.lo + 360.0, 360.0);
    const double full = (w.hi - w.lo >= 360.0) ? 360.0 : span;
    const double offset = std::fmod(hue - w.lo + 360.0, 360.0);
    if (full >= 360.0 || offset <= full) return 1.0;
    if (w.feather <= 0.0) return 0.0;
    const double outside = std::min(offset - full, 360.0 - offset);
    return outside >= w.feather ? 0.0 : 1.0 - outside / w.feather;
}

/// Largest chroma scale s <= want keeping y + s * d inside [0, 1] for every channel.
double gamutLimit(double y, const double d[3], double want) {
    double s = want;
    for (int c = 0; c < 3; ++c) {
        if (d[c] > 0.0) s = std::min(s, (1.0 - y) / d[c]);
        else if (d[c] < 0.0) s = std::min(s, y / -d[c]);
    }
    return std::max(s, 0.0);
}

constexpr double kAchromatic = 1e-7;

}  // namespace

void ToneParams::validate() const {
    requireFinite(beta, "beta");
    requireFinite(sCenter, "s_center");
    requireFinite(sStrength, "s_strength");
    requireFinite(pLo, "p_lo");
    requireFinite(pHi, "p_hi");
    requireFinite(alpha, "alpha");
    requireFinite(alphaScale, "alpha_scale");
    requireFinite(unsharpRadius, "unsharp_radius");
    requireFinite(unsharpAmount, "unsharp_amount");
    requireFinite(unsharpThreshold, "unsharp_threshold");
    requireFinite(gamma, "gamma");
    requireFinite(saturation, "saturation");
    requireFinite(autocontrastCutoff, "autocontrast_cutoff");
    if (!(pLo >= 0.0 && pLo < pHi && pHi <= 100.0)) throw Error("tone percentiles need 0 <= p_lo < p_hi <= 100");
    if (!(alpha > 0.0)) throw Error("tone alpha must be > 0");
    if (!(alphaScale > 0.0)) throw Error("tone alpha_scale must be > 0");
    if (gridX == 0 || gridY == 0) throw Error("tone grid must be at least 1x1");
    if (!(sCenter >= 0.0 && sCenter <= 1.0)) throw Error("s-curve center must lie in [0, 1]");
    if (!(sStrength > 0.0)) throw Error("s-curve strength must be > 0");
    if (!(gamma > 0.0)) throw Error("tone gamma must be > 0");
    if (beta < 0.0 || unsharpAmount < 0.0 || saturation < 0.0) throw Error("tone gains must be >= 0");
    if (!(unsharpRadius > 0.0)) throw Error("unsharp radius must be > 0");
    if (!(autocontrastCutoff >= 0.0 && autocontrastCutoff < 50.0)) throw Error("autocontrast cutoff must be in [0, 50)");
}

ImageF localContrast(const ImageF& img, double maskSigma) {
    if (!(maskSigma > 0.0)) throw Error("local contrast mask sigma must be > 0");
    const std::size_t n = img.pixelCount();
    std::vector<float> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[i] = static_cast<float>(1.0 - lumaAt(img, i));
    const auto mask = filters::gaussianBlur(inv, img.width(), img.height(), maskSigma);
    ImageF out = img;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp2((0.5 - static_cast<double>(mask[i])) / 0.5);
        for (std::size_t c = 0; c < 3; ++c) {
            float& v = out.plane(c)[i];
            v = static_cast<float>(unit(std::pow(unit(v), e)));
        }
    }
    return out;
}

ImageF meanContrast(const ImageF& img, double beta) {
    if (beta < 0.0) throw Error("contrast beta must be >= 0");
    if (beta == 1.0) return img;
    ImageF out = img;
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (float v : img.plane(c)) sum += v;
        const double mean = img.pixelCount() ? sum / static_cast<double>(img.pixelCount()) : 0.0;
        for (float& v : out.plane(c)) v = static_cast<float>(unit(mean + beta * (v - mean)));
    }
    return out;
}

double sCurveValue(double x, double c, double s) {
    x = unit(x);
    if (s == 1.0) return x;
    if (x <= c) return c <= 0.0 ? 0.0 : c - c * std::pow((c - x) / c, s);
    return c >= 1.0 ? 1.0 : c + (1.0 - c) * std::pow((x - c) / (1.0 - c), s);
}

ImageF sCurve(const ImageF& img, double center, double strength) {
    if (!(strength > 0.0)) throw Error("s-curve strength must be > 0");
    if (!(center >= 0.0 && center <= 1.0)) throw Error("s-curve center must lie in [0, 1]");
    if (strength == 1.0) return img;
    return mapChannels(img, [&](double x) { return sCurveValue(x, center, strength); });
}

double percentile(std::vector<float> values, double p) {
    if (values.empty()) return 0.0;
    const double pos = unit(p / 100.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    double b = a;
    if (hi != lo) b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(hi), values.end());
    return a + (pos - static_cast<double>(lo)) * (b - a);
}

ImageF histogramStretch(const ImageF& img, double pLo, double pHi) {
    if (!(pLo >= 0.0 && pLo < pHi && pHi <= 100.0)) throw Error("stretch percentiles need 0 <= p_lo < p_hi <= 100");
    ImageF out = img;
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<float> values(img.plane(c).begin(), img.plane(c).end());
        const double lo = percentile(values, pLo);
        const double hi = percentile(std::move(values), pHi);
        if (!(hi > lo)) continue;
        const double scale = hi - lo;
        for (float& v : out.plane(c)) v = static_cast<float>(unit((v - lo) / scale));
    }
    return out;
}

ImageF autocontrast(const ImageF& img, double cutoffPct) {
    if (!(cutoffPct >= 0.0 && cutoffPct < 50.0)) throw Error("autocontrast cutoff must be in [0, 50)");
    return histogramStretch(img, cutoffPct, 100.0 - cutoffPct);
}

ImageF conditionalContrast(const ImageF& img, double darkThresh, double brightThresh, const ToneParams& params) {
    if (!(darkThresh < brightThresh)) throw Error("conditional contrast needs dark_thresh < bright_thresh");
    if (!(params.gamma > 0.0 && params.gamma < 1.0)) throw Error("conditional contrast dark gamma must be in (0, 1)");
    if (!(params.sStrength > 1.0)) throw Error("conditional contrast bright strength must be > 1");
    double sum = 0.0;
    for (std::size_t i = 0; i < img.pixelCount(); ++i) sum += lumaAt(img, i);
    const double mean = img.pixelCount() ? sum / static_cast<double>(img.pixelCount()) : 0.0;
    if (mean < darkThresh) {
        const double g = params.gamma;
        return mapChannels(img, [g](double x) { return std::pow(x, g); });
    }
    if (mean > brightThresh) return sCurve(img, params.sCenter, params.sStrength);
    return img;
}

ImageF nakaRushton(const ImageF& img, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("naka-rushton alpha must be > 0");
    return mapChannels(img, [alpha](double x) { return nakaRushtonValue(x, alpha); });
}

double geometricMeanLuminance(const ImageF& img, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x) {
            acc += std::log(lumaAt(img, y * img.width() + x) + kGeomeanEpsilon);
            ++count;
        }
    if (count == 0) return kGeomeanEpsilon;
    return std::max(std::exp(acc / static_cast<double>(count)) - kGeomeanEpsilon, kGeomeanEpsilon);
}

double geometricMeanLuminance(const ImageF& img) {
    return geometricMeanLuminance(img, 0, 0, img.width(), img.height());
}

ImageF niteTonemap(const ImageF& img, std::size_t gridX, std::size_t gridY, double alphaScale) {
    if (gridX == 0 || gridY == 0) throw Error("tone grid must be at least 1x1");
    if (!(alphaScale > 0.0)) throw Error("alpha_scale must be > 0");
    if (gridX == 1 && gridY == 1) return nakaRushton(img, alphaScale * geometricMeanLuminance(img));

    const std::size_t w = img.width(), h = img.height();
    gridX = std::min(gridX, std::max<std::size_t>(w, 1));
    gridY = std::min(gridY, std::max<std::size_t>(h, 1));
    std::vector<double> alpha(gridX * gridY), cx(gridX), cy(gridY);
    for (std::size_t ty = 0; ty < gridY; ++ty)
        for (std::size_t tx = 0; tx < gridX; ++tx) {
            const std::size_t x0 = tx * w / gridX, x1 = (tx + 1) * w / gridX;
            const std::size_t y0 = ty * h / gridY, y1 = (ty + 1) * h / gridY;
            alpha[ty * gridX + tx] = alphaScale * geometricMeanLuminance(img, x0, y0, x1, y1);
        }
    for (std::size_t tx = 0; tx < gridX; ++tx)
        cx[tx] = 0.5 * static_cast<double>(tx * w / gridX + (tx + 1) * w / gridX) - 0.5;
    for (std::size_t ty = 0; ty < gridY; ++ty)
        cy[ty] = 0.5 * static_cast<double>(ty * h / gridY + (ty + 1) * h / gridY) - 0.5;

    // Locate the bracketing tile centres; positions outside the outer centres hold the edge value.
    auto bracket = [](const std::vector<double>& centres, double p, std::size_t& i0, double& f) {
        if (centres.size() == 1 || p <= centres.front()) {
            i0 = 0;
            f = 0.0;
            return;
        }
        if (p >= centres.back()) {
            i0 = centres.size() - 2;
            f = 1.0;
            return;
        }
        i0 = static_cast<std::size_t>(std::upper_bound(centres.begin(), centres.end(), p) - centres.begin()) - 1;
        f = (p - centres[i0]) / (centres[i0 + 1] - centres[i0]);
    };
    auto lerp = [](double a, double b, double f) { return a == b ? a : a + f * (b - a); };

    ImageF out = img;
    for (std::size_t y = 0; y < h; ++y) {
        std::size_t ty;
        double fy;
        bracket(cy, static_cast<double>(y), ty, fy);
        const std::size_t ty1 = std::min(ty + 1, gridY - 1);
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t tx;
            double fx;
            bracket(cx, static_cast<double>(x), tx, fx);
            const std::size_t tx1 = std::min(tx + 1, gridX - 1);
            const double top = lerp(alpha[ty * gridX + tx], alpha[ty * gridX + tx1], fx);
            const double bottom = lerp(alpha[ty1 * gridX + tx], alpha[ty1 * gridX + tx1], fx);
            const double a = lerp(top, bottom, fy);
            for (std::size_t c = 0; c < 3; ++c) {
                float& v = out.at(c, x, y);
                v = static_cast<float>(unit(nakaRushtonValue(unit(v), a)));
            }
        }
    }
    return out;
}

ImageF unsharpMask(const ImageF& img, double radius, double amount, double threshold) {
    if (!(radius > 0.0)) throw Error("unsharp radius must be > 0");
    if (amount < 0.0) throw Error("unsharp amount must be >= 0");
    if (amount == 0.0) return img;
    ImageF out = img;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto blurred = filters::gaussianBlur(img.plane(c), img.width(), img.height(), radius);
        auto plane = out.plane(c);
        for (std::size_t i = 0; i < plane.size(); ++i) {
            const double detail = static_cast<double>(plane[i]) - blurred[i];
            if (std::fabs(detail) > threshold) plane[i] = static_cast<float>(unit(plane[i] + amount * detail));
        }
    }
    return out;
}

double hueDegrees(double r, double g, double b) {
    const double y = kLumaWeights[0] * r + kLumaWeights[1] * g + kLumaWeights[2] * b;
    const double cb = (b - y) / 1.772, cr = (r - y) / 1.402;
    double deg = std::atan2(cr, cb) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    return deg >= 360.0 ? 0.0 : deg;
}

ImageF saturationAdjust(const ImageF& img, double factor, std::optional<HueWindow> window) {
    if (factor < 0.0 || !std::isfinite(factor)) throw Error("saturation factor must be >= 0");
    if (factor == 1.0) return img;
    ImageF out = img;
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double rgb[3] = {unit(img.plane(0)[i]), unit(img.plane(1)[i]), unit(img.plane(2)[i])};
        const double y = kLumaWeights[0] * rgb[0] + kLumaWeights[1] * rgb[1] + kLumaWeights[2] * rgb[2];
        const double d[3] = {rgb[0] - y, rgb[1] - y, rgb[2] - y};
        if (std::max({std::fabs(d[0]), std::fabs(d[1]), std::fabs(d[2])}) < kAchromatic) continue;
        const double wgt = window ? windowWeight(*window, hueDegrees(rgb[0], rgb[1], rgb[2])) : 1.0;
        if (wgt == 0.0) continue;
        double s = 1.0 + wgt * (factor - 1.0);
        s = gamutLimit(y, d, s);
        for (std::size_t c = 0; c < 3; ++c) out.plane(c)[i] = static_cast<float>(unit(y + s * d[c]));
    }
    return out;
}

ImageF memoryColor(const ImageF& img, const std::vector<MemoryColor>& prototypes) {
    for (const auto& p : prototypes)
        if (!(p.halfWidth > 0.0 && p.halfWidth <= 180.0) || p.satGain < 0.0)
            throw Error("memory color window needs 0 < half_width <= 180 and sat_gain >= 0");
    for (std::size_t a = 0; a < prototypes.size(); ++a)
        for (std::size_t b = a + 1; b < prototypes.size(); ++b)
            if (std::fabs(hueDelta(prototypes[a].hueCenter, prototypes[b].hueCenter)) <
                prototypes[a].halfWidth + prototypes[b].halfWidth)
                throw Error("memory color windows overlap");
    if (prototypes.empty()) return img;

    ImageF out = img;
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double rgb[3] = {unit(img.plane(0)[i]), unit(img.plane(1)[i]), unit(img.plane(2)[i])};
        const double y = kLumaWeights[0] * rgb[0] + kLumaWeights[1] * rgb[1] + kLumaWeights[2] * rgb[2];
        const double cb = (rgb[2] - y) / 1.772, cr = (rgb[0] - y) / 1.402;
        if (std::hypot(cb, cr) < kAchromatic) continue;
        const double hue = hueDegrees(rgb[0], rgb[1], rgb[2]);
        for (const auto& p : prototypes) {
            const double dist = std::fabs(hueDelta(hue, p.hueCenter));
            if (dist >= p.halfWidth) continue;
            const double wgt = 0.5 * (1.0 + std::cos(std::numbers::pi * dist / p.halfWidth));
            const double rot = wgt * hueDelta(p.targetHue, hue) * std::numbers::pi / 180.0;
            const double gain = 1.0 + wgt * (p.satGain - 1.0);
            const double ncb = (cb * std::cos(rot) - cr * std::sin(rot)) * gain;
            const double ncr = (cb * std::sin(rot) + cr * std::cos(rot)) * gain;
            const double r = y + 1.402 * ncr, b = y + 1.772 * ncb;
            const double g = (y - kLumaWeights[0] * r - kLumaWeights[2] * b) / kLumaWeights[1];
            const double d[3] = {r - y, g - y, b - y};
            const double s = gamutLimit(y, d, 1.0);
            for (std::size_t c = 0; c < 3; ++c) out.plane(c)[i] = static_cast<float>(unit(y + s * d[c]));
            break;
        }
    }
    return out;
}

ImageF piecewiseGamma(const ImageF& img, const std::vector<std::pair<double, double>>& knots) {
    if (knots.empty()) throw KnotError("piecewise gamma needs at least one knot");
    for (std::size_t k = 0; k < knots.size(); ++k) {
        const auto [x, g] = knots[k];
        if (!(x >= 0.0 && x <= 1.0)) throw KnotError("knot position outside [0, 1]");
        if (!(g > 0.0) || !std::isfinite(g)) throw KnotError("knot gamma must be finite and > 0");
        if (k > 0 && !(x > knots[k - 1].first)) throw KnotError("knot positions must be strictly increasing");
    }
    if (std::all_of(knots.begin(), knots.end(), [](const auto& k) { return k.second == 1.0; })) return img;

    auto gammaAt = [&](double l) {
        if (l <= knots.front().first) return knots.front().second;
        if (l >= knots.back().first) return knots.back().second;
        std::size_t k = 1;
        while (knots[k].first < l) ++k;
        const auto [x0, g0] = knots[k - 1];
        const auto [x1, g1] = knots[k];
        return g0 + (l - x0) / (x1 - x0) * (g1 - g0);
    };
    ImageF out = img;
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double g = gammaAt(lumaAt(img, i));
        for (std::size_t c = 0; c < 3; ++c) {
            float& v = out.plane(c)[i];
            v = static_cast<float>(unit(std::pow(unit(v), g)));
        }
    }
    return out;
}

}  // namespace nightisp::tone
