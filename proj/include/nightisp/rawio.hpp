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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nightisp/image.hpp"

namespace nightisp {

enum class Orientation { Normal, Rotate90, Rotate180, Rotate270 };

std::string_view toString(Orientation o);

/// Affine signal-dependent noise: variance(x) = a * x + b, x in normalized units.
struct NoiseProfile {
    double a = 0.0;
    double b = 0.0;
};

struct FrameMeta {
    double blackLevel = 0.0;
    double whiteLevel = 65535.0;
    std::array<double, 3> asShotNeutral{1.0, 1.0, 1.0};
    Mat3 cst = kIdentity3;  // camera -> XYZ
    Orientation orientation = Orientation::Normal;
    std::optional<NoiseProfile> noiseProfile;
    std::string frameId;
};

struct RawFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint16_t> samples;
    Cfa cfa;
    FrameMeta meta;
};

namespace rawio {

struct LoadOptions {
    /// Used when a sidecar has no color_matrix. Without it such sidecars are rejected.
    std::optional<Mat3> fallbackCst;
};

/// Parses the JSON sidecar text. `defaultFrameId` is used when "frame_id" is absent.
FrameMeta parseSidecar(const std::string& jsonText, Cfa& cfa, const LoadOptions& options,
                       const std::string& defaultFrameId);

/// Checks every RawFrame/FrameMeta invariant; throws SchemaError or DimensionError.
void validate(const RawFrame& frame);

RawFrame loadRaw(const std::filesystem::path& pngPath, const std::filesystem::path& jsonPath,
                 const LoadOptions& options = {});

/// Reads {"color_matrix": [...]} style camera config used as the CST fallback.
Mat3 loadCameraConfig(const std::filesystem::path& path);

}  // namespace rawio

/// Per-CFA-site gain field. Site index k = (y % 2) * 2 + (x % 2) of the mosaic.
/// Each site carries a gridWidth x gridHeight grid; when the grid is coarser than
/// the site sub-plane it is upsampled bilinearly.
struct GainMap {
    std::size_t mosaicWidth = 0;
    std::size_t mosaicHeight = 0;
    std::size_t gridWidth = 0;
    std::size_t gridHeight = 0;
    std::array<std::vector<float>, 4> gains;

    /// Gain applied to mosaic sample (x, y).
    float at(std::size_t x, std::size_t y) const;
};

namespace rawio {

inline constexpr double kDefaultCalibrationSigma = 16.0;
inline constexpr double kDefaultGainCap = 4.0;

/// gain(p) = max_q S(q) / S(p) per CFA site, with S the Gaussian-smoothed
/// level-normalized site plane; clamped to [1, gainCap]. `smoothingSigma` is
/// in mosaic pixels.
GainMap buildGainMap(const MosaicF& calibration, double smoothingSigma = kDefaultCalibrationSigma,
                     double gainCap = kDefaultGainCap);
GainMap buildGainMap(const RawFrame& calibration, double smoothingSigma = kDefaultCalibrationSigma,
                     double gainCap = kDefaultGainCap);

/// Binary artifact: "NISPGAIN", u32 version, u32 mosaic w/h, u32 grid w/h, then
/// four little-endian float32 grids in site order.
void writeGainMap(const std::filesystem::path& path, const GainMap& map);
GainMap readGainMap(const std::filesystem::path& path);

}  // namespace rawio

}  // namespace nightisp
