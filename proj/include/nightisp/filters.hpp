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
#include <span>
#include <vector>

namespace nightisp::filters {

/// Mirror index without repeating the edge sample (-1 -> 1, n -> n-2).
/// Keeps parity for period-2 layouts such as Bayer mosaics.
std::ptrdiff_t reflect101(std::ptrdiff_t i, std::ptrdiff_t n) noexcept;

/// Normalized taps over [-ceil(3 sigma), ceil(3 sigma)].
std::vector<double> gaussianKernel(double sigma);

/// Separable Gaussian blur of a width x height plane. sigma <= 0 returns a copy.
std::vector<float> gaussianBlur(std::span<const float> plane, std::size_t width, std::size_t height,
                                double sigma);

}  // namespace nightisp::filters
