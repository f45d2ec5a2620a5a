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

#include "nightisp/image.hpp"

#include <algorithm>
#include <cmath>

#include "nightisp/error.hpp"

namespace nightisp {

std::string_view toString(ColorSpace space) {
    switch (space) {
    case ColorSpace::CameraLinear: return "camera_linear";
    case ColorSpace::Xyz: return "xyz";
    case ColorSpace::SrgbLinear: return "srgb_linear";
    case ColorSpace::SrgbEncoded: return "srgb_encoded";
    case ColorSpace::YCbCr: return "ycbcr";
    }
    return "unknown";
}

Cfa Cfa::parse(std::string_view pattern) {
    if (pattern.size() != 4) throw DecodeError("cfa pattern must have 4 letters, got '" + std::string(pattern) + "'");
    Cfa cfa;
    for (std::size_t i = 0; i < 4; ++i) {
        switch (pattern[i]) {
        case 'R': case 'r': cfa.sites[i] = CfaColor::R; break;
        case 'G': case 'g': cfa.sites[i] = CfaColor::G; break;
        case 'B': case 'b': cfa.sites[i] = CfaColor::B; break;
        default: throw DecodeError("cfa pattern has unknown color '" + std::string(1, pattern[i]) + "'");
        }
    }
    if (!cfa.valid()) throw DecodeError("cfa pattern needs two G, one R, one B: '" + std::string(pattern) + "'");
    return cfa;
}

std::string Cfa::name() const {
    std::string s(4, '?');
    for (std::size_t i = 0; i < 4; ++i) s[i] = "RGB"[static_cast<int>(sites[i])];
    return s;
}

bool Cfa::valid() const noexcept {
    int counts[3] = {0, 0, 0};
    for (auto c : sites) ++counts[static_cast<int>(c)];
    return counts[0] == 1 && counts[1] == 2 && counts[2] == 1;
}

ImageF::ImageF(std::size_t width, std::size_t height, ColorSpace space, float fill)
    : width_(width), height_(height), space_(space) {
    for (auto& p : planes_) p.assign(width * height, fill);
}

bool ImageF::allFinite() const noexcept {
    for (const auto& p : planes_)
        for (float v : p)
            if (!std::isfinite(v)) return false;
    return true;
}

std::vector<float> luma(const ImageF& img) {
    std::vector<float> y(img.pixelCount());
    if (img.space() == ColorSpace::YCbCr) {
        auto p = img.plane(0);
        std::copy(p.begin(), p.end(), y.begin());
        return y;
    }
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = static_cast<float>(kLumaWeights[0] * r[i] + kLumaWeights[1] * g[i] + kLumaWeights[2] * b[i]);
    return y;
}

}  // namespace nightisp
