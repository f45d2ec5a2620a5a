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

#include "nightisp/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nightisp/error.hpp"
#include "nightisp/filters.hpp"

namespace nightisp::mosaic {

namespace {

using filters::reflect101;

/// Plane padded by `r` samples on every side with mirror reflection.
struct Padded {
    std::ptrdiff_t w, h, r, stride;
    std::vector<float> data;

    Padded(std::span<const float> plane, std::size_t width, std::size_t height, std::ptrdiff_t radius)
        : w(static_cast<std::ptrdiff_t>(width)), h(static_cast<std::ptrdiff_t>(height)), r(radius),
          stride(static_cast<std::ptrdiff_t>(width) + 2 * radius),
          data(static_cast<std::size_t>(stride * (h + 2 * radius))) {
        for (std::ptrdiff_t y = -r; y < h + r; ++y) {
            const std::ptrdiff_t sy = reflect101(y, h);
            float* row = data.data() + (y + r) * stride;
            for (std::ptrdiff_t x = -r; x < w + r; ++x) row[x + r] = plane[static_cast<std::size_t>(sy * w + reflect101(x, w))];
        }
    }

    float operator()(std::ptrdiff_t x, std::ptrdiff_t y) const noexcept { return data[static_cast<std::size_t>((y + r) * stride + x + r)]; }
};

void requireEven(const MosaicF& m) {
    if (m.width == 0 || m.height == 0 || m.width % 2 || m.height % 2)
        throw DimensionError("mosaic dimensions must be even and non-zero");
}

/// Fills every non-`color` site of `out` with the mean of same-colour samples of
/// `values` in its 3x3 neighbourhood. Sites of `color` are copied.
void interpolateSites(const MosaicF& layout, const Padded& values, CfaColor color, std::span<float> out) {
    // Offsets per 2x2 phase: which 3x3 neighbours carry `color`.
    std::array<std::vector<std::pair<int, int>>, 4> offsets;
    for (int py = 0; py < 2; ++py)
        for (int px = 0; px < 2; ++px) {
            auto& list = offsets[static_cast<std::size_t>(py * 2 + px)];
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (layout.cfa.at(static_cast<std::size_t>(px + dx + 2), static_cast<std::size_t>(py + dy + 2)) == color)
                        list.emplace_back(dx, dy);
                }
        }
    const auto w = static_cast<std::ptrdiff_t>(layout.width), h = static_cast<std::ptrdiff_t>(layout.height);
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto idx = static_cast<std::size_t>(y * w + x);
            if (layout.cfa.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == color) {
                out[idx] = values(x, y);
                continue;
            }
            const auto& list = offsets[static_cast<std::size_t>((y & 1) * 2 + (x & 1))];
            double sum = 0.0;
            for (auto [dx, dy] : list) sum += values(x + dx, y + dy);
            out[idx] = static_cast<float>(sum / static_cast<double>(list.size()));
        }
}

struct AxisWeights {
    std::vector<std::size_t> first;   // per output: offset into taps
    std::vector<std::size_t> count;
    std::vector<std::pair<std::size_t, double>> taps;
};

AxisWeights axisWeights(std::size_t in, std::size_t out) {
    AxisWeights aw;
    aw.first.resize(out);
    aw.count.resize(out);
    if (in == out) {
        for (std::size_t i = 0; i < out; ++i) {
            aw.first[i] = aw.taps.size();
            aw.taps.emplace_back(i, 1.0);
            aw.count[i] = 1;
        }
    } else if (out < in) {
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t i = 0; i < out; ++i) {
            aw.first[i] = aw.taps.size();
            const double lo = static_cast<double>(i) * scale, hi = static_cast<double>(i + 1) * scale;
            for (auto s = static_cast<std::size_t>(std::floor(lo)); s < in && static_cast<double>(s) < hi; ++s) {
                const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
                if (overlap > 0.0) aw.taps.emplace_back(s, overlap / scale);
            }
            aw.count[i] = aw.taps.size() - aw.first[i];
        }
    } else {
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t i = 0; i < out; ++i) {
            aw.first[i] = aw.taps.size();
            const double c = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
            const auto i0 = static_cast<std::size_t>(c);
            const double f = c - static_cast<double>(i0);
            aw.taps.emplace_back(i0, 1.0 - f);
            if (f > 0.0 && i0 + 1 < in) aw.taps.emplace_back(i0 + 1, f);
            aw.count[i] = aw.taps.size() - aw.first[i];
        }
    }
    return aw;
}

}  // namespace

MosaicF normalizeLevels(const RawFrame& raw) {
    MosaicF m;
    m.width = raw.width;
    m.height = raw.height;
    m.cfa = raw.cfa;
    m.plane.resize(raw.samples.size());
    const double black = raw.meta.blackLevel;
    const double range = raw.meta.whiteLevel - raw.meta.blackLevel;
    for (std::size_t i = 0; i < raw.samples.size(); ++i)
        m.plane[i] = static_cast<float>(std::clamp((static_cast<double>(raw.samples[i]) - black) / range, 0.0, 1.0));
    return m;
}

MosaicF shadingCorrect(const MosaicF& m, const GainMap& g) {
    if (g.mosaicWidth != m.width || g.mosaicHeight != m.height)
        throw DimensionError("gain map built for " + std::to_string(g.mosaicWidth) + "x" + std::to_string(g.mosaicHeight) +
                             " mosaic, got " + std::to_string(m.width) + "x" + std::to_string(m.height));
    MosaicF out = m;
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x) out.at(x, y) = std::clamp(m.at(x, y) * g.at(x, y), 0.0f, 1.0f);
    return out;
}

ImageF demosaicBilinear(const MosaicF& m) {
    requireEven(m);
    Padded p(m.plane, m.width, m.height, 1);
    ImageF img(m.width, m.height, ColorSpace::CameraLinear);
    for (std::size_t c = 0; c < 3; ++c) interpolateSites(m, p, static_cast<CfaColor>(c), img.plane(c));
    return img;
}

ImageF demosaicDirectional(const MosaicF& m) {
    requireEven(m);
    if (m.width < 8 || m.height < 8) throw DimensionError("directional demosaicing needs at least 8x8");
    const auto w = static_cast<std::ptrdiff_t>(m.width), h = static_cast<std::ptrdiff_t>(m.height);
    const auto n = m.plane.size();
    Padded mp(m.plane, m.width, m.height, 2);

    std::vector<float> gh(n), gv(n), dh(n), dv(n);
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y * w + x);
            const float c = mp(x, y);
            const float hEst = 0.5f * (mp(x - 1, y) + mp(x + 1, y)) + 0.25f * (2.0f * c - mp(x - 2, y) - mp(x + 2, y));
            const float vEst = 0.5f * (mp(x, y - 1) + mp(x, y + 1)) + 0.25f * (2.0f * c - mp(x, y - 2) - mp(x, y + 2));
            if (m.cfa.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == CfaColor::G) {
                gh[i] = gv[i] = c;
                // Here the estimates are the red/blue neighbours along each axis.
                dh[i] = hEst - c;
                dv[i] = vEst - c;
            } else {
                gh[i] = hEst;
                gv[i] = vEst;
                dh[i] = c - hEst;
                dv[i] = c - vEst;
            }
        }

    // Color-difference gradients between same-phase samples, then 5x5 window sums.
    std::vector<float> gradH(n), gradV(n);
    {
        Padded ph(dh, m.width, m.height, 2), pv(dv, m.width, m.height, 2);
        for (std::ptrdiff_t y = 0; y < h; ++y)
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                const auto i = static_cast<std::size_t>(y * w + x);
                gradH[i] = std::fabs(ph(x, y) - ph(x + 2, y));
                gradV[i] = std::fabs(pv(x, y) - pv(x, y + 2));
            }
    }
    Padded sh(gradH, m.width, m.height, 2), sv(gradV, m.width, m.height, 2);

    std::vector<float> green(n);
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y * w + x);
            if (m.cfa.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == CfaColor::G) {
                green[i] = m.plane[i];
                continue;
            }
            double sumH = 0.0, sumV = 0.0;
            for (std::ptrdiff_t j = -2; j <= 2; ++j)
                for (std::ptrdiff_t k = -2; k <= 2; ++k) {
                    sumH += sh(x + k, y + j);
                    sumV += sv(x + k, y + j);
                }
            float g;
            if (sumH < sumV) g = gh[i];
            else if (sumV < sumH) g = gv[i];
            else g = 0.5f * (gh[i] + gv[i]);
            green[i] = std::clamp(g, 0.0f, 1.0f);
        }

    ImageF img(m.width, m.height, ColorSpace::CameraLinear);
    std::copy(green.begin(), green.end(), img.plane(1).begin());
    for (CfaColor color : {CfaColor::R, CfaColor::B}) {
        std::vector<float> diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = m.plane[i] - green[i];
        Padded pd(diff, m.width, m.height, 1);
        std::vector<float> interp(n);
        interpolateSites(m, pd, color, interp);
        auto out = img.plane(static_cast<std::size_t>(color));
        for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(green[i] + interp[i], 0.0f, 1.0f);
    }
    return img;
}

ImageF packResize(const MosaicF& m, std::size_t outW, std::size_t outH) {
    requireEven(m);
    const std::size_t w = m.width / 2, h = m.height / 2;
    ImageF packed(w, h, ColorSpace::CameraLinear);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            float g = 0.0f;
            for (std::size_t s = 0; s < 4; ++s) {
                const std::size_t mx = 2 * x + (s & 1), my = 2 * y + (s >> 1);
                const float v = m.at(mx, my);
                switch (m.cfa.sites[s]) {
                case CfaColor::R: packed.at(0, x, y) = v; break;
                case CfaColor::G: g += v; break;
                case CfaColor::B: packed.at(2, x, y) = v; break;
                }
            }
            packed.at(1, x, y) = 0.5f * g;
        }
    return resizeBox(packed, outW, outH);
}

ImageF resizeBox(const ImageF& img, std::size_t outW, std::size_t outH) {
    if (outW == 0 || outH == 0) throw DimensionError("resize target must be non-zero");
    if (img.pixelCount() == 0) throw DimensionError("cannot resize an empty image");
    if (outW == img.width() && outH == img.height()) return img;

    const auto ax = axisWeights(img.width(), outW);
    const auto ay = axisWeights(img.height(), outH);
    ImageF out(outW, outH, img.space());
    std::vector<double> tmp(img.height() * outW);
    for (std::size_t c = 0; c < 3; ++c) {
        auto src = img.plane(c);
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < outW; ++x) {
                double acc = 0.0;
                for (std::size_t t = ax.first[x]; t < ax.first[x] + ax.count[x]; ++t)
                    acc += ax.taps[t].second * src[y * img.width() + ax.taps[t].first];
                tmp[y * outW + x] = acc;
            }
        auto dst = out.plane(c);
        for (std::size_t y = 0; y < outH; ++y)
            for (std::size_t x = 0; x < outW; ++x) {
                double acc = 0.0;
                for (std::size_t t = ay.first[y]; t < ay.first[y] + ay.count[y]; ++t)
                    acc += ay.taps[t].second * tmp[ay.taps[t].first * outW + x];
                dst[y * outW + x] = static_cast<float>(acc);
            }
    }
    return out;
}

ImageF orient(const ImageF& img, Orientation o) {
    const std::size_t w = img.width(), h = img.height();
    switch (o) {
    case Orientation::Normal: return img;
    case Orientation::Rotate180: {
        ImageF out(w, h, img.space());
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) out.at(c, w - 1 - x, h - 1 - y) = img.at(c, x, y);
        return out;
    }
    case Orientation::Rotate90: {
        ImageF out(h, w, img.space());
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) out.at(c, h - 1 - y, x) = img.at(c, x, y);
        return out;
    }
    case Orientation::Rotate270: {
        ImageF out(h, w, img.space());
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) out.at(c, y, w - 1 - x) = img.at(c, x, y);
        return out;
    }
    }
    return img;
}

}  // namespace nightisp::mosaic
