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

#include "nightisp/filters.hpp"

#include <cmath>

namespace nightisp::filters {

std::ptrdiff_t reflect101(std::ptrdiff_t i, std::ptrdiff_t n) noexcept {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

std::vector<double> gaussianKernel(double sigma) {
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

std::vector<float> gaussianBlur(std::span<const float> plane, std::size_t width, std::size_t height,
                                double sigma) {
    std::vector<float> src(plane.begin(), plane.end());
    if (sigma <= 0.0 || width == 0 || height == 0) return src;

    const auto kernel = gaussianKernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const auto w = static_cast<std::ptrdiff_t>(width);
    const auto h = static_cast<std::ptrdiff_t>(height);

    std::vector<float> tmp(src.size());
    std::vector<std::ptrdiff_t> idx(static_cast<std::size_t>(w + 2 * radius));
    for (std::ptrdiff_t x = -radius; x < w + radius; ++x) idx[static_cast<std::size_t>(x + radius)] = reflect101(x, w);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        const float* row = src.data() + y * w;
        float* out = tmp.data() + y * w;
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] * row[idx[static_cast<std::size_t>(x + k + radius)]];
            out[x] = static_cast<float>(acc);
        }
    }

    std::vector<float> dst(src.size());
    std::vector<double> acc(static_cast<std::size_t>(w));
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
            const float* row = tmp.data() + reflect101(y + k, h) * w;
            const double kv = kernel[static_cast<std::size_t>(k + radius)];
            for (std::ptrdiff_t x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += kv * row[x];
        }
        float* out = dst.data() + y * w;
        for (std::ptrdiff_t x = 0; x < w; ++x) out[x] = static_cast<float>(acc[static_cast<std::size_t>(x)]);
    }
    return dst;
}

}  // namespace nightisp::filters
