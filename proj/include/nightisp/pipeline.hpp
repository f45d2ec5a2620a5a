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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nightisp/image.hpp"
#include "nightisp/imageio.hpp"
#include "nightisp/rawio.hpp"

namespace nightisp::pipeline {

using Json = nlohmann::json;

/// Data tag carried between stages: the raw frame, the normalized mosaic, or
/// a three-plane image in one of the colour spaces.
enum class Space { Raw, Mosaic, CameraLinear, Xyz, SrgbLinear, SrgbEncoded, YCbCr };

std::string_view toString(Space s);
Space spaceOf(ColorSpace c);

struct OutputSpec {
    std::size_t width = 1024;
    std::size_t height = 768;
    std::string format = "jpeg";  // "jpeg" or "png"
    int quality = 95;

    /// Canvas matching the orientation of a w x h image: landscape inputs get
    /// the wider side first, portrait inputs the swapped canvas.
    std::pair<std::size_t, std::size_t> canvasFor(std::size_t w, std::size_t h) const;
    std::string extension() const;
};

struct StageSpec {
    std::string id;
    Json params = Json::object();
};

struct PipelineSpec {
    std::string name;
    std::string version;
    std::vector<StageSpec> stages;
    OutputSpec output;

    /// Throws SpecError(Malformed) on structural problems.
    static PipelineSpec fromJson(const Json& doc);
    Json toJson() const;
};

PipelineSpec loadSpec(const std::filesystem::path& path);

/// Directory holding the shipped presets; overridable with NIGHTISP_PRESET_DIR.
std::filesystem::path presetDir();
/// Resolves a shipped preset by name, or loads the argument as a file path.
PipelineSpec loadPreset(const std::string& nameOrPath);
std::vector<std::string> presetNames();

/// Applies "stage.param=value" overrides. `stage` is a stage id (every stage
/// with that id) or a zero-based index. The value is parsed as JSON, falling
/// back to a plain string.
void applyOverride(PipelineSpec& spec, const std::string& assignment);

enum class ParamType { Number, Integer, Boolean, String, Array, OptionalNumber };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::Number;
    Json defaultValue;
    std::optional<double> min;
    std::optional<double> max;
    bool minExclusive = false;
};

struct RunContext {
    const RawFrame* raw = nullptr;
    const GainMap* gainMap = nullptr;
    std::uint64_t seed = 0;
    OutputSpec output;
};

using Payload = std::variant<std::monostate, MosaicF, ImageF>;

struct StageDef {
    std::string id;
    std::vector<Space> accepts;
    std::optional<Space> produces;  // absent: output space equals input space
    std::vector<ParamSpec> params;
    /// Cross-parameter checks on resolved params; throws Error.
    std::function<void(const Json&)> check;
    std::function<Payload(Payload&&, const Json&, RunContext&)> run;
};

class Registry {
public:
    void add(StageDef def);
    const StageDef* find(std::string_view id) const;
    std::vector<std::string> ids() const;

    /// Every stage shipped with the library.
    static const Registry& builtin();

private:
    std::map<std::string, StageDef, std::less<>> stages_;
};

/// Checks stage ids, parameters and the space chain (Raw in, srgb_encoded
/// out). Throws the first SpecError found; returns resolved parameters with
/// defaults filled in, one object per stage.
std::vector<Json> validate(const PipelineSpec& spec, const Registry& registry = Registry::builtin());

struct ChannelStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct StageReport {
    std::string stageId;
    double wallTime = 0.0;  // seconds
    Space space = Space::Raw;
    std::array<ChannelStats, 3> stats{};
};

struct RunOptions {
    std::uint64_t seed = 0;
    const GainMap* gainMap = nullptr;
    const Registry* registry = nullptr;  // builtin when null
};

struct RunResult {
    ImageF image;
    std::vector<StageReport> reports;
    double totalSeconds = 0.0;  // sum of stage wall times
};

/// Executes the stages in order. Only the stage callables are timed.
/// Throws SpecError for invalid specs and StageError for stage failures.
RunResult run(const RawFrame& raw, const PipelineSpec& spec, const RunOptions& options = {});

imageio::Rgb8 toRgb8(const ImageF& img);
std::vector<std::uint8_t> encodeOutput(const ImageF& img, const OutputSpec& output);

using Decoder = std::function<RawFrame(const std::filesystem::path& png, const std::filesystem::path& json)>;

struct RenderOutcome {
    RunResult result;
    std::vector<std::uint8_t> encoded;
    std::filesystem::path outputPath;
    double decodeSeconds = 0.0;
    double encodeSeconds = 0.0;
};

/// Decode, run, encode and write <outDir>/<frame_id>.<ext>. Decode and
/// encode are timed separately and never counted in result.totalSeconds.
RenderOutcome renderFile(const std::filesystem::path& png, const std::filesystem::path& json,
                         const PipelineSpec& spec, const std::filesystem::path& outDir,
                         const RunOptions& options = {}, const Decoder& decoder = {});

/// Sidecar path for a raw PNG: same stem with a .json extension.
std::filesystem::path sidecarFor(const std::filesystem::path& png);

struct BenchImage {
    std::string frameId;
    std::vector<double> runs;       // total seconds per repeat
    double seconds = 0.0;           // median of runs
    std::vector<double> stageSeconds;  // per-stage median over repeats
};

struct BenchSummary {
    std::string specName;
    std::size_t repeats = 0;
    std::vector<std::string> stageIds;
    std::vector<BenchImage> images;  // sorted by frame id
    double secondsPerImage = 0.0;    // mean over images of the per-image median
    std::vector<double> stageSecondsPerImage;

    Json toJson() const;
    std::string table() const;
};

struct BenchOptions {
    std::size_t repeats = 1;
    std::size_t jobs = 1;          // >1 lets distinct images run concurrently
    bool timingStrict = false;     // forces one image at a time
    RunOptions run;
};

BenchSummary bench(const std::vector<RawFrame>& raws, const PipelineSpec& spec, const BenchOptions& options = {});

double median(std::vector<double> values);

}  // namespace nightisp::pipeline
