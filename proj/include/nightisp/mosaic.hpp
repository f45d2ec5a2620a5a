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

#include "nightisp/image.hpp"
#include "nightisp/rawio.hpp"

namespace nightisp::mosaic {

/// v' = clamp((v - black) / (white - black), 0, 1).
MosaicF normalizeLevels(const RawFrame& raw);

/// Multiplies every sample by its CFA-site gain and clamps to [0, 1].
/// Throws DimensionError when the map was built for another mosaic size.
MosaicF shadingCorrect(const MosaicF& m, const GainMap& g);

/// Each missing color is the mean of the same-color samples in the 3x3
/// neighbourhood (mirror-reflected at the border).
ImageF demosaicBilinear(const MosaicF& m);

/// Directional demosaicing: green is interpolated horizontally and vertically
/// with a second-order chroma correction, the direction with the smaller
/// color-difference gradient over a 5x5 window wins, and red/blue come from
/// bilinear interpolation of color differences against the final green.
/// Needs width, height >= 8.
ImageF demosaicDirectional(const MosaicF& m);

/// Packs each 2x2 cell into one RGB pixel (greens averaged) at half
/// resolution, then resizes to outW x outH.
ImageF packResize(const MosaicF& m, std::size_t outW, std::size_t outH);

/// Area average when shrinking, bilinear when enlarging (per axis).
/// Same size returns an exact copy.
ImageF resizeBox(const ImageF& img, std::size_t outW, std::size_t outH);

/// Clockwise rotation; Rotate90 maps (x, y) of a WxH image to (H-1-y, x).
ImageF orient(const ImageF& img, Orientation o);

}  // namespace nightisp::mosaic
