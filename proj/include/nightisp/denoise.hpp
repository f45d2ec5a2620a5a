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
#include <functional>

#include "nightisp/image.hpp"

namespace nightisp {

struct NoiseEstimate {
    double sigma = 0.0;
};

namespace denoise {

/// Median absolute deviation of the finest diagonal Haar band of the luma
/// plane: sigma = median(|HH|) / 0.6745.
NoiseEstimate estimateNoiseSigma(const ImageF& img);

struct NlmParams {
    double kLuma = 0.6;
    double kChroma = 1.2;
    std::size_t patch = 7;
    std::size_t window = 21;
};

/// Non-local means per plane in YCbCr with filtering strength h = k * sigma
/// (k_luma on Y, k_chroma on Cb/Cr). Non-YCbCr inputs are converted
/// internally and the result is returned in the input space, clamped to [0, 1].
ImageF nlmDenoise(const ImageF& img, NoiseEstimate sigma, const NlmParams& params = {});

/// Gaussian blur of Cb and Cr; Y is left untouched.
ImageF gaussianChroma(const ImageF& ycc, double sigmaPx);

/// ROF total-variation denoising of Y, min 0.5 |u - f|^2 + lambda TV(u),
/// by Chambolle's dual projection with a fixed iteration budget.
ImageF tvDenoiseLuma(const ImageF& ycc, double lambda, std::size_t iterations);

/// Runs a YCbCr-domain operation on an RGB-like image. Only the change the
/// operation makes is mapped back, so unchanged planes stay bit-identical;
/// output is clamped to [0, 1].
ImageF viaYCbCr(const ImageF& img, const std::function<ImageF(const ImageF&)>& op);

/// Isotropic total variation sum |grad u| with forward differences.
double totalVariation(std::span<const float> plane, std::size_t width, std::size_t height);

}  // namespace denoise
}  // namespace nightisp
