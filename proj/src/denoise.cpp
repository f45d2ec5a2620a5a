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

#include "nightisp/denoise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nightisp/color.hpp"
#include "nightisp/error.hpp"
#include "nightisp/filters.hpp"

namespace nightisp::denoise {

namespace {

/// exp(-x) on [0, kExpRange) sampled at 1/kExpSteps with linear interpolation;
/// zero beyond. Table lookups keep NLM weights identical across libm builds.
constexpr double kExpRange = 16.0;
constexpr int kExpSteps = 256;

const std::vector<float>& expTable() {
    static const std::vector<float> table = [] {
        std::vector<float> t(static_cast<std::size_t>(kExpRange * kExpSteps) + 2);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(std::exp(-static_cast<double>(i) / kExpSteps));
        t.back() = 0.0f;
        return t;
    }();
    return table;
}

inline float expNeg(float x, const std::vector<float>& table) {
    if (x <= 0.0f) return 1.0f;
    const float pos = x * static_cast<float>(kExpSteps);
    if (pos >= static_cast<float>(kExpRange * kExpSteps)) return 0.0f;
    const auto i = static_cast<std::size_t>(pos);
    const float f = pos - static_cast<float>(i);
    return table[i] + f * (table[i + 1] - table[i]);
}

std::vector<float> nlmPlane(std::span<const float> plane, std::size_t width, std::size_t height, double h,
                            double sigma, std::size_t patch, std::size_t window) {
    const auto& table = expTable();
    const auto w = static_cast<std::ptrdiff_t>(width), hh = static_cast<std::ptrdiff_t>(height);
    const auto pr = static_cast<std::ptrdiff_t>(patch / 2), wr = static_cast<std::ptrdiff_t>(window / 2);
    const std::ptrdiff_t pad = pr + wr;
    const std::ptrdiff_t pw = w + 2 * pad, ph = hh + 2 * pad;

    std::vector<float> padded(static_cast<std::size_t>(pw * ph));
    for (std::ptrdiff_t y = 0; y < ph; ++y)
        for (std::ptrdiff_t x = 0; x < pw; ++x)
            padded[static_cast<std::size_t>(y * pw + x)] =
                plane[static_cast<std::size_t>(filters::reflect101(y - pad, hh) * w + filters::reflect101(x - pad, w))];
    auto P = [&](std::ptrdiff_t x, std::ptrdiff_t y) { return padded[static_cast<std::size_t>((y + pad) * pw + x + pad)]; };

    const float invH2 = static_cast<float>(1.0 / (h * h));
    const float bias = static_cast<float>(2.0 * sigma * sigma);
    const float invArea = 1.0f / static_cast<float>(patch * patch);

    // Region over which squared differences are needed: image grown by pr.
    const std::ptrdiff_t rw = w + 2 * pr, rh = hh + 2 * pr;
    std::vector<float> diff(static_cast<std::size_t>(rw * rh));
    std::vector<double> rowBox(static_cast<std::size_t>(w * rh));
    std::vector<double> num(static_cast<std::size_t>(w * hh), 0.0), den(static_cast<std::size_t>(w * hh), 0.0);
    std::vector<double> colAcc(static_cast<std::size_t>(w));

    for (std::ptrdiff_t dy = -wr; dy <= wr; ++dy)
        for (std::ptrdiff_t dx = -wr; dx <= wr; ++dx) {
            for (std::ptrdiff_t y = 0; y < rh; ++y)
                for (std::ptrdiff_t x = 0; x < rw; ++x) {
                    const float d = P(x - pr, y - pr) - P(x - pr + dx, y - pr + dy);
                    diff[static_cast<std::size_t>(y * rw + x)] = d * d;
                }
            // Horizontal running box of width `patch`.
            for (std::ptrdiff_t y = 0; y < rh; ++y) {
                const float* row = diff.data() + y * rw;
                double s = 0.0;
                for (std::ptrdiff_t k = 0; k < 2 * pr + 1; ++k) s += row[k];
                double* out = rowBox.data() + y * w;
                out[0] = s;
                for (std::ptrdiff_t x = 1; x < w; ++x) {
                    s += row[x + 2 * pr] - row[x - 1];
                    out[x] = s;
                }
            }
            // Vertical running box, then weights.
            std::fill(colAcc.begin(), colAcc.end(), 0.0);
            for (std::ptrdiff_t k = 0; k < 2 * pr + 1; ++k)
                for (std::ptrdiff_t x = 0; x < w; ++x) colAcc[static_cast<std::size_t>(x)] += rowBox[static_cast<std::size_t>(k * w + x)];
            for (std::ptrdiff_t y = 0; y < hh; ++y) {
                if (y > 0)
                    for (std::ptrdiff_t x = 0; x < w; ++x)
                        colAcc[static_cast<std::size_t>(x)] += rowBox[static_cast<std::size_t>((y + 2 * pr) * w + x)] -
                                                               rowBox[static_cast<std::size_t>((y - 1) * w + x)];
                for (std::ptrdiff_t x = 0; x < w; ++x) {
                    const float d2 = static_cast<float>(colAcc[static_cast<std::size_t>(x)]) * invArea;
                    const float wgt = (dx == 0 && dy == 0) ? 1.0f : expNeg(std::max(d2 - bias, 0.0f) * invH2, table);
                    if (wgt == 0.0f) continue;
                    const auto i = static_cast<std::size_t>(y * w + x);
                    num[i] += static_cast<double>(wgt) * P(x + dx, y + dy);
                    den[i] += wgt;
                }
            }
        }

    std::vector<float> out(static_cast<std::size_t>(w * hh));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(num[i] / den[i]);
    return out;
}

}  // namespace

NoiseEstimate estimateNoiseSigma(const ImageF& img) {
    const auto y = luma(img);
    const std::size_t w = img.width() / 2, h = img.height() / 2;
    if (w == 0 || h == 0) return {0.0};
    std::vector<double> hh;
    hh.reserve(w * h);
    const std::size_t stride = img.width();
    for (std::size_t j = 0; j < h; ++j)
        for (std::size_t i = 0; i < w; ++i) {
            const double a = y[2 * j * stride + 2 * i], b = y[2 * j * stride + 2 * i + 1];
            const double c = y[(2 * j + 1) * stride + 2 * i], d = y[(2 * j + 1) * stride + 2 * i + 1];
            hh.push_back(std::fabs(a - b - c + d) * 0.5);
        }
    const auto mid = hh.begin() + static_cast<std::ptrdiff_t>(hh.size() / 2);
    std::nth_element(hh.begin(), mid, hh.end());
    double median = *mid;
    if (hh.size() % 2 == 0) {
        const double lower = *std::max_element(hh.begin(), mid);
        median = 0.5 * (median + lower);
    }
    return {median / 0.6745};
}

ImageF viaYCbCr(const ImageF& img, const std::function<ImageF(const ImageF&)>& op) {
    if (img.space() == ColorSpace::YCbCr) return op(img);
    const ImageF ycc = color::rgbToYCbCr(img);
    const ImageF res = op(ycc);

    float upper = 1.0f;
    for (std::size_t c = 0; c < 3; ++c)
        for (float v : img.plane(c)) upper = std::max(upper, v);

    ImageF out = img;
    for (std::size_t i = 0; i < img.pixelCount(); ++i) {
        const double dY = static_cast<double>(res.plane(0)[i]) - ycc.plane(0)[i];
        const double dCb = static_cast<double>(res.plane(1)[i]) - ycc.plane(1)[i];
        const double dCr = static_cast<double>(res.plane(2)[i]) - ycc.plane(2)[i];
        if (dY == 0.0 && dCb == 0.0 && dCr == 0.0) continue;
        const double dR = dY + 1.402 * dCr;
        const double dB = dY + 1.772 * dCb;
        const double dG = dY - (kLumaWeights[0] * 1.402 * dCr + kLumaWeights[2] * 1.772 * dCb) / kLumaWeights[1];
        const double delta[3] = {dR, dG, dB};
        for (std::size_t c = 0; c < 3; ++c)
            out.plane(c)[i] = std::clamp(static_cast<float>(img.plane(c)[i] + delta[c]), 0.0f, upper);
    }
    return out;
}

ImageF nlmDenoise(const ImageF& img, NoiseEstimate sigma, const NlmParams& params) {
    if (params.patch % 2 == 0 || params.window % 2 == 0) throw Error("nlm patch and window must be odd");
    if (params.kLuma < 0.0 || params.kChroma < params.kLuma) throw Error("nlm needs k_chroma >= k_luma >= 0");
    if (sigma.sigma <= 0.0) return img;
    return viaYCbCr(img, [&](const ImageF& ycc) {
        ImageF out = ycc;
        for (std::size_t c = 0; c < 3; ++c) {
            const double k = c == 0 ? params.kLuma : params.kChroma;
            if (k == 0.0) continue;
            auto filtered = nlmPlane(ycc.plane(c), ycc.width(), ycc.height(), k * sigma.sigma, sigma.sigma,
                                     params.patch, params.window);
            std::copy(filtered.begin(), filtered.end(), out.plane(c).begin());
        }
        return out;
    });
}

ImageF gaussianChroma(const ImageF& ycc, double sigmaPx) {
    if (sigmaPx < 0.0) throw Error("gaussian chroma sigma must be >= 0");
    ImageF out = ycc;
    if (sigmaPx == 0.0) return out;
    for (std::size_t c = 1; c < 3; ++c) {
        auto blurred = filters::gaussianBlur(ycc.plane(c), ycc.width(), ycc.height(), sigmaPx);
        std::copy(blurred.begin(), blurred.end(), out.plane(c).begin());
    }
    return out;
}

ImageF tvDenoiseLuma(const ImageF& ycc, double lambda, std::size_t iterations) {
    if (lambda < 0.0) throw Error("tv lambda must be >= 0");
    if (iterations == 0) throw Error("tv needs at least one iteration");
    ImageF out = ycc;
    if (lambda == 0.0) return out;

    const std::size_t w = ycc.width(), h = ycc.height(), n = ycc.pixelCount();
    auto f = ycc.plane(0);
    std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0), u(n);
    constexpr double tau = 0.25;

    auto divergence = [&] {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                double d = 0.0;
                if (x + 1 < w) d += px[i];
                if (x > 0) d -= px[i - 1];
                if (y + 1 < h) d += py[i];
                if (y > 0) d -= py[i - w];
                div[i] = d;
            }
    };

    for (std::size_t it = 0; it < iterations; ++it) {
        divergence();
        for (std::size_t i = 0; i < n; ++i) u[i] = div[i] - f[i] / lambda;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                const double gx = x + 1 < w ? u[i + 1] - u[i] : 0.0;
                const double gy = y + 1 < h ? u[i + w] - u[i] : 0.0;
                const double norm = 1.0 + tau * std::sqrt(gx * gx + gy * gy);
                px[i] = (px[i] + tau * gx) / norm;
                py[i] = (py[i] + tau * gy) / norm;
            }
    }
    divergence();
    auto y = out.plane(0);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<float>(f[i] - lambda * div[i]);
    return out;
}

double totalVariation(std::span<const float> plane, std::size_t width, std::size_t height) {
    double tv = 0.0;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t i = y * width + x;
            const double gx = x + 1 < width ? static_cast<double>(plane[i + 1]) - plane[i] : 0.0;
            const double gy = y + 1 < height ? static_cast<double>(plane[i + width]) - plane[i] : 0.0;
            tv += std::sqrt(gx * gx + gy * gy);
        }
    return tv;
}

}  // namespace nightisp::denoise
