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

#include "nightisp/rawio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nightisp/error.hpp"
#include "nightisp/filters.hpp"
#include "nightisp/imageio.hpp"
#include "nightisp/mosaic.hpp"

namespace nightisp {

using nlohmann::json;

std::string_view toString(Orientation o) {
    switch (o) {
    case Orientation::Normal: return "normal";
    case Orientation::Rotate90: return "rotate90";
    case Orientation::Rotate180: return "rotate180";
    case Orientation::Rotate270: return "rotate270";
    }
    return "normal";
}

namespace rawio {

namespace {

double levelValue(const json& doc, const char* field) {
    if (!doc.contains(field)) throw SchemaError(field, "missing");
    const auto& v = doc.at(field);
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && !v.empty()) {
        // Per-channel levels: the pipeline works with a single level.
        double sum = 0.0;
        for (const auto& e : v) {
            if (!e.is_number()) throw SchemaError(field, "array must hold numbers");
            sum += e.get<double>();
        }
        return sum / static_cast<double>(v.size());
    }
    throw SchemaError(field, "expected number or array of numbers");
}

Cfa parseCfa(const json& v) {
    try {
        if (v.is_string()) return Cfa::parse(v.get<std::string>());
        if (v.is_array() && v.size() == 4) {
            std::string letters;
            for (const auto& e : v) {
                if (e.is_number_integer()) {
                    const int c = e.get<int>();
                    if (c < 0 || c > 2) throw SchemaError("cfa_pattern", "color index out of range");
                    letters += "RGB"[c];
                } else if (e.is_string() && e.get<std::string>().size() == 1) {
                    letters += e.get<std::string>();
                } else {
                    throw SchemaError("cfa_pattern", "entries must be 0/1/2 or R/G/B");
                }
            }
            return Cfa::parse(letters);
        }
    } catch (const DecodeError& e) {
        throw SchemaError("cfa_pattern", e.what());
    }
    throw SchemaError("cfa_pattern", "expected a 4-letter string or 4-element array");
}

Mat3 parseMatrix(const json& v, const char* field) {
    std::vector<double> flat;
    if (v.is_array() && v.size() == 9) {
        for (const auto& e : v) {
            if (!e.is_number()) throw SchemaError(field, "entries must be numbers");
            flat.push_back(e.get<double>());
        }
    } else if (v.is_array() && v.size() == 3) {
        for (const auto& row : v) {
            if (!row.is_array() || row.size() != 3) throw SchemaError(field, "expected 3x3 matrix");
            for (const auto& e : row) {
                if (!e.is_number()) throw SchemaError(field, "entries must be numbers");
                flat.push_back(e.get<double>());
            }
        }
    } else {
        throw SchemaError(field, "expected 9 numbers or a 3x3 nested array");
    }
    Mat3 m{};
    for (std::size_t i = 0; i < 9; ++i) {
        if (!std::isfinite(flat[i])) throw SchemaError(field, "non-finite entry");
        m[i / 3][i % 3] = flat[i];
    }
    return m;
}

Orientation parseOrientation(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "normal") return Orientation::Normal;
        if (s == "rotate90") return Orientation::Rotate90;
        if (s == "rotate180") return Orientation::Rotate180;
        if (s == "rotate270") return Orientation::Rotate270;
    } else if (v.is_number_integer()) {
        // EXIF orientation codes.
        switch (v.get<int>()) {
        case 1: return Orientation::Normal;
        case 6: return Orientation::Rotate90;
        case 3: return Orientation::Rotate180;
        case 8: return Orientation::Rotate270;
        default: break;
        }
    }
    throw SchemaError("orientation", "expected normal/rotate90/rotate180/rotate270 or EXIF code 1/3/6/8");
}

NoiseProfile parseNoiseProfile(const json& v) {
    NoiseProfile p;
    if (v.is_object() && v.contains("a") && v.contains("b") && v["a"].is_number() && v["b"].is_number()) {
        p.a = v["a"].get<double>();
        p.b = v["b"].get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        p.a = v[0].get<double>();
        p.b = v[1].get<double>();
    } else {
        throw SchemaError("noise_profile", "expected {\"a\":..,\"b\":..} or [a, b]");
    }
    if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw SchemaError("noise_profile", "non-finite coefficient");
    return p;
}

}  // namespace

FrameMeta parseSidecar(const std::string& jsonText, Cfa& cfa, const LoadOptions& options,
                       const std::string& defaultFrameId) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw DecodeError(std::string("sidecar is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw DecodeError("sidecar must be a JSON object");

    FrameMeta meta;
    meta.blackLevel = levelValue(doc, "black_level");
    meta.whiteLevel = levelValue(doc, "white_level");

    if (!doc.contains("cfa_pattern")) throw SchemaError("cfa_pattern", "missing");
    cfa = parseCfa(doc["cfa_pattern"]);

    if (!doc.contains("as_shot_neutral")) throw SchemaError("as_shot_neutral", "missing");
    const auto& asn = doc["as_shot_neutral"];
    if (!asn.is_array() || asn.size() != 3) throw SchemaError("as_shot_neutral", "expected 3 numbers");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!asn[i].is_number()) throw SchemaError("as_shot_neutral", "entries must be numbers");
        meta.asShotNeutral[i] = asn[i].get<double>();
    }
    for (double v : meta.asShotNeutral)
        if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError("as_shot_neutral", "entries must be finite and > 0");
    const double g = meta.asShotNeutral[1];
    for (auto& v : meta.asShotNeutral) v /= g;

    if (doc.contains("color_matrix")) {
        meta.cst = parseMatrix(doc["color_matrix"], "color_matrix");
    } else if (options.fallbackCst) {
        meta.cst = *options.fallbackCst;
    } else {
        throw SchemaError("color_matrix", "missing and no fallback matrix configured");
    }

    if (doc.contains("orientation")) meta.orientation = parseOrientation(doc["orientation"]);
    if (doc.contains("noise_profile") && !doc["noise_profile"].is_null())
        meta.noiseProfile = parseNoiseProfile(doc["noise_profile"]);

    if (doc.contains("frame_id")) {
        if (!doc["frame_id"].is_string()) throw SchemaError("frame_id", "expected string");
        meta.frameId = doc["frame_id"].get<std::string>();
    } else {
        meta.frameId = defaultFrameId;
    }
    return meta;
}

void validate(const RawFrame& frame) {
    if (frame.width == 0 || frame.height == 0 || frame.width % 2 != 0 || frame.height % 2 != 0)
        throw DimensionError("raw frame dimensions must be even and non-zero, got " + std::to_string(frame.width) +
                             "x" + std::to_string(frame.height));
    if (frame.samples.size() != frame.width * frame.height)
        throw DimensionError("sample count does not match width*height");
    if (!frame.cfa.valid()) throw SchemaError("cfa_pattern", "needs two G, one R, one B");
    const auto& m = frame.meta;
    if (!(m.blackLevel >= 0.0)) throw SchemaError("black_level", "must be >= 0");
    if (!(m.whiteLevel <= 65535.0)) throw SchemaError("white_level", "must be <= 65535");
    if (!(m.blackLevel < m.whiteLevel)) throw SchemaError("white_level", "must exceed black_level");
    for (double v : m.asShotNeutral)
        if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError("as_shot_neutral", "entries must be finite and > 0");
    for (const auto& row : m.cst)
        for (double v : row)
            if (!std::isfinite(v)) throw SchemaError("color_matrix", "non-finite entry");
}

RawFrame loadRaw(const std::filesystem::path& pngPath, const std::filesystem::path& jsonPath,
                 const LoadOptions& options) {
    std::ifstream in(jsonPath);
    if (!in) throw DecodeError("cannot open sidecar " + jsonPath.string());
    std::stringstream text;
    text << in.rdbuf();

    RawFrame frame;
    frame.meta = parseSidecar(text.str(), frame.cfa, options, pngPath.stem().string());

    auto gray = imageio::readGray16Png(pngPath);
    frame.width = gray.width;
    frame.height = gray.height;
    frame.samples = std::move(gray.samples);
    validate(frame);
    return frame;
}

Mat3 loadCameraConfig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open camera config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
    if (!doc.contains("color_matrix")) throw SchemaError("color_matrix", "missing in camera config");
    return parseMatrix(doc["color_matrix"], "color_matrix");
}

}  // namespace rawio

float GainMap::at(std::size_t x, std::size_t y) const {
    const std::size_t site = (y & 1) * 2 + (x & 1);
    const std::size_t subW = mosaicWidth / 2, subH = mosaicHeight / 2;
    const std::size_t sx = x / 2, sy = y / 2;
    const auto& g = gains[site];
    if (gridWidth == subW && gridHeight == subH) return g[sy * gridWidth + sx];

    auto coord = [](std::size_t s, std::size_t subN, std::size_t gridN, std::size_t& i0, double& f) {
        double c = (static_cast<double>(s) + 0.5) * static_cast<double>(gridN) / static_cast<double>(subN) - 0.5;
        c = std::clamp(c, 0.0, static_cast<double>(gridN - 1));
        i0 = static_cast<std::size_t>(c);
        if (i0 >= gridN - 1) {
            i0 = gridN - 1;
            f = 0.0;
        } else {
            f = c - static_cast<double>(i0);
        }
    };
    std::size_t x0, y0;
    double fx, fy;
    coord(sx, subW, gridWidth, x0, fx);
    coord(sy, subH, gridHeight, y0, fy);
    const std::size_t x1 = std::min(x0 + 1, gridWidth - 1), y1 = std::min(y0 + 1, gridHeight - 1);
    const double top = (1 - fx) * g[y0 * gridWidth + x0] + fx * g[y0 * gridWidth + x1];
    const double bot = (1 - fx) * g[y1 * gridWidth + x0] + fx * g[y1 * gridWidth + x1];
    return static_cast<float>((1 - fy) * top + fy * bot);
}

namespace rawio {

namespace {

// Pads with the point reflection 2 f(edge) - f(edge - i) before blurring, so
// linear trends continue through the border instead of flattening into it.
std::vector<float> smoothPointSymmetric(const std::vector<float>& plane, std::size_t w, std::size_t h, double sigma) {
    if (sigma <= 0.0) return plane;
    const auto pad = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    const auto W = static_cast<std::ptrdiff_t>(w), H = static_cast<std::ptrdiff_t>(h);
    auto extend = [](auto get, std::ptrdiff_t i, std::ptrdiff_t n) {
        if (i < 0) return 2.0 * get(0) - get(std::min(-i, n - 1));
        if (i >= n) return 2.0 * get(n - 1) - get(std::max(2 * (n - 1) - i, std::ptrdiff_t{0}));
        return get(i);
    };
    const std::size_t pw = w + 2 * static_cast<std::size_t>(pad), ph = h + 2 * static_cast<std::size_t>(pad);
    std::vector<float> rows(pw * h);
    for (std::ptrdiff_t y = 0; y < H; ++y) {
        auto get = [&](std::ptrdiff_t x) { return static_cast<double>(plane[static_cast<std::size_t>(y * W + x)]); };
        for (std::ptrdiff_t x = -pad; x < W + pad; ++x)
            rows[static_cast<std::size_t>(y) * pw + static_cast<std::size_t>(x + pad)] = static_cast<float>(extend(get, x, W));
    }
    std::vector<float> padded(pw * ph);
    for (std::size_t x = 0; x < pw; ++x) {
        auto get = [&](std::ptrdiff_t y) { return static_cast<double>(rows[static_cast<std::size_t>(y) * pw + x]); };
        for (std::ptrdiff_t y = -pad; y < H + pad; ++y)
            padded[static_cast<std::size_t>(y + pad) * pw + x] = static_cast<float>(extend(get, y, H));
    }
    const auto blurred = filters::gaussianBlur(padded, pw, ph, sigma);
    std::vector<float> out(w * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            out[y * w + x] = blurred[(y + static_cast<std::size_t>(pad)) * pw + x + static_cast<std::size_t>(pad)];
    return out;
}

}  // namespace

GainMap buildGainMap(const MosaicF& calibration, double smoothingSigma, double gainCap) {
    if (calibration.width % 2 != 0 || calibration.height % 2 != 0 || calibration.width == 0 || calibration.height == 0)
        throw DimensionError("calibration frame dimensions must be even and non-zero");
    if (!(gainCap >= 1.0)) throw Error("gain cap must be >= 1");

    GainMap map;
    map.mosaicWidth = calibration.width;
    map.mosaicHeight = calibration.height;
    map.gridWidth = calibration.width / 2;
    map.gridHeight = calibration.height / 2;
    const std::size_t subN = map.gridWidth * map.gridHeight;

    for (std::size_t site = 0; site < 4; ++site) {
        const std::size_t dx = site & 1, dy = site >> 1;
        std::vector<float> sub(subN);
        for (std::size_t j = 0; j < map.gridHeight; ++j)
            for (std::size_t i = 0; i < map.gridWidth; ++i)
                sub[j * map.gridWidth + i] = calibration.at(2 * i + dx, 2 * j + dy);

        // Sub-plane pixels are twice the mosaic pitch.
        const auto smooth = smoothPointSymmetric(sub, map.gridWidth, map.gridHeight, smoothingSigma / 2.0);
        const auto [lo, hi] = std::minmax_element(smooth.begin(), smooth.end());
        if (!(*lo > 0.0f))
            throw DegenerateCalibration("calibration site " + std::to_string(site) +
                                        " has non-positive values after smoothing");
        const double peak = *hi;
        auto& g = map.gains[site];
        g.resize(subN);
        for (std::size_t i = 0; i < subN; ++i)
            g[i] = static_cast<float>(std::clamp(peak / static_cast<double>(smooth[i]), 1.0, gainCap));
    }
    return map;
}

GainMap buildGainMap(const RawFrame& calibration, double smoothingSigma, double gainCap) {
    validate(calibration);
    return buildGainMap(mosaic::normalizeLevels(calibration), smoothingSigma, gainCap);
}

namespace {

void putU32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t getU32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DecodeError("truncated gain map");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

constexpr char kGainMagic[8] = {'N', 'I', 'S', 'P', 'G', 'A', 'I', 'N'};

}  // namespace

void writeGainMap(const std::filesystem::path& path, const GainMap& map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kGainMagic, 8);
    putU32(out, 1);
    putU32(out, static_cast<std::uint32_t>(map.mosaicWidth));
    putU32(out, static_cast<std::uint32_t>(map.mosaicHeight));
    putU32(out, static_cast<std::uint32_t>(map.gridWidth));
    putU32(out, static_cast<std::uint32_t>(map.gridHeight));
    for (const auto& g : map.gains)
        for (float v : g) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            putU32(out, bits);
        }
    if (!out) throw Error("short write to " + path.string());
}

GainMap readGainMap(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kGainMagic, 8) != 0) throw DecodeError(path.string() + ": not a gain map");
    if (getU32(in) != 1) throw DecodeError(path.string() + ": unsupported gain map version");
    GainMap map;
    map.mosaicWidth = getU32(in);
    map.mosaicHeight = getU32(in);
    map.gridWidth = getU32(in);
    map.gridHeight = getU32(in);
    if (map.gridWidth == 0 || map.gridHeight == 0 || map.mosaicWidth % 2 || map.mosaicHeight % 2)
        throw DecodeError(path.string() + ": bad gain map dimensions");
    for (auto& g : map.gains) {
        g.resize(map.gridWidth * map.gridHeight);
        for (auto& v : g) {
            const std::uint32_t bits = getU32(in);
            std::memcpy(&v, &bits, 4);
            if (!std::isfinite(v) || v < 1.0f) throw DecodeError(path.string() + ": gain outside [1, inf)");
        }
    }
    return map;
}

}  // namespace rawio

}  // namespace nightisp
