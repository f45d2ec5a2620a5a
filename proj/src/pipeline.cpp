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

#include "nightisp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "nightisp/error.hpp"
#include "nightisp/imageio.hpp"

#ifndef NIGHTISP_PRESET_DIR
#define NIGHTISP_PRESET_DIR "presets"
#endif

namespace nightisp::pipeline {

namespace fs = std::filesystem;

std::string_view toString(Space s) {
    switch (s) {
    case Space::Raw: return "raw";
    case Space::Mosaic: return "mosaic";
    case Space::CameraLinear: return "camera_linear";
    case Space::Xyz: return "xyz";
    case Space::SrgbLinear: return "srgb_linear";
    case Space::SrgbEncoded: return "srgb_encoded";
    case Space::YCbCr: return "ycbcr";
    }
    return "unknown";
}

Space spaceOf(ColorSpace c) {
    switch (c) {
    case ColorSpace::CameraLinear: return Space::CameraLinear;
    case ColorSpace::Xyz: return Space::Xyz;
    case ColorSpace::SrgbLinear: return Space::SrgbLinear;
    case ColorSpace::SrgbEncoded: return Space::SrgbEncoded;
    case ColorSpace::YCbCr: return Space::YCbCr;
    }
    return Space::CameraLinear;
}

std::pair<std::size_t, std::size_t> OutputSpec::canvasFor(std::size_t w, std::size_t h) const {
    const std::size_t longSide = std::max(width, height), shortSide = std::min(width, height);
    if (w >= h) return {longSide, shortSide};
    return {shortSide, longSide};
}

std::string OutputSpec::extension() const { return format == "png" ? "png" : "jpg"; }

// ---------------------------------------------------------------------------
// Spec documents

namespace {

SpecError malformed(const std::string& what, std::size_t index = 0) {
    return SpecError(SpecError::Kind::Malformed, index, what);
}

}  // namespace

PipelineSpec PipelineSpec::fromJson(const Json& doc) {
    if (!doc.is_object()) throw malformed("pipeline spec must be a JSON object");
    PipelineSpec spec;
    spec.name = doc.value("name", std::string{});
    if (doc.contains("version")) {
        const auto& v = doc.at("version");
        spec.version = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        if (!o.is_object()) throw malformed("output must be an object");
        try {
            spec.output.width = o.value("width", spec.output.width);
            spec.output.height = o.value("height", spec.output.height);
            spec.output.format = o.value("format", spec.output.format);
            spec.output.quality = o.value("quality", spec.output.quality);
        } catch (const Json::exception& e) {
            throw malformed(std::string("output: ") + e.what());
        }
        if (spec.output.width == 0 || spec.output.height == 0) throw malformed("output size must be positive");
        if (spec.output.format != "jpeg" && spec.output.format != "png")
            throw malformed("output format must be jpeg or png");
        if (spec.output.quality < 1 || spec.output.quality > 100) throw malformed("jpeg quality must be in [1, 100]");
    }
    if (!doc.contains("stages") || !doc.at("stages").is_array()) throw malformed("stages must be an array");
    std::size_t index = 0;
    for (const auto& s : doc.at("stages")) {
        StageSpec stage;
        if (s.is_string()) {
            stage.id = s.get<std::string>();
        } else if (s.is_object() && s.contains("id") && s.at("id").is_string()) {
            stage.id = s.at("id").get<std::string>();
            if (s.contains("params")) {
                if (!s.at("params").is_object()) throw malformed("stage params must be an object", index);
                stage.params = s.at("params");
            }
        } else {
            throw malformed("stage entries need a string id", index);
        }
        spec.stages.push_back(std::move(stage));
        ++index;
    }
    return spec;
}

Json PipelineSpec::toJson() const {
    Json stagesJson = Json::array();
    for (const auto& s : stages) stagesJson.push_back({{"id", s.id}, {"params", s.params}});
    return {{"name", name},
            {"version", version},
            {"output", {{"width", output.width}, {"height", output.height}, {"format", output.format}, {"quality", output.quality}}},
            {"stages", stagesJson}};
}

PipelineSpec loadSpec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pipeline spec " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw malformed(path.string() + ": " + e.what());
    }
    return PipelineSpec::fromJson(doc);
}

fs::path presetDir() {
    if (const char* env = std::getenv("NIGHTISP_PRESET_DIR"); env && *env) return env;
    return NIGHTISP_PRESET_DIR;
}

PipelineSpec loadPreset(const std::string& nameOrPath) {
    const fs::path shipped = presetDir() / (nameOrPath + ".json");
    if (fs::exists(shipped)) return loadSpec(shipped);
    if (fs::exists(nameOrPath)) return loadSpec(nameOrPath);
    throw Error("unknown preset '" + nameOrPath + "'");
}

std::vector<std::string> presetNames() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(presetDir(), ec))
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

void applyOverride(PipelineSpec& spec, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
        throw malformed("override must look like stage.param=value: " + assignment);
    const std::string stage = assignment.substr(0, dot);
    const std::string param = assignment.substr(dot + 1, eq - dot - 1);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }

    bool matched = false;
    const bool numeric = !stage.empty() && std::all_of(stage.begin(), stage.end(), [](char c) { return c >= '0' && c <= '9'; });
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        if (numeric ? std::stoul(stage) == i : spec.stages[i].id == stage) {
            spec.stages[i].params[param] = value;
            matched = true;
        }
    }
    if (!matched) throw SpecError(SpecError::Kind::UnknownStage, 0, "override names no stage in the preset: " + stage);
}

// ---------------------------------------------------------------------------
// Registry and validation

void Registry::add(StageDef def) {
    const std::string id = def.id;
    stages_.insert_or_assign(id, std::move(def));
}

const StageDef* Registry::find(std::string_view id) const {
    const auto it = stages_.find(id);
    return it == stages_.end() ? nullptr : &it->second;
}

std::vector<std::string> Registry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, def] : stages_) out.push_back(id);
    return out;
}

namespace {

std::string describeSpaces(const std::vector<Space>& spaces) {
    std::string out;
    for (const auto s : spaces) {
        if (!out.empty()) out += ", ";
        out += toString(s);
    }
    return out;
}

Json resolveParams(const StageDef& def, const Json& given, std::size_t index) {
    auto bad = [&](const std::string& what) {
        return SpecError(SpecError::Kind::BadParam, index, def.id + ": " + what);
    };
    for (const auto& [key, value] : given.items()) {
        const bool known = std::any_of(def.params.begin(), def.params.end(), [&](const ParamSpec& p) { return p.name == key; });
        if (!known) throw bad("unknown parameter '" + key + "'");
    }
    Json out = Json::object();
    for (const auto& p : def.params) {
        const Json value = given.contains(p.name) ? given.at(p.name) : p.defaultValue;
        const bool nullable = p.type == ParamType::OptionalNumber;
        switch (p.type) {
        case ParamType::Number:
        case ParamType::OptionalNumber:
            if (nullable && value.is_null()) break;
            if (!value.is_number()) throw bad("'" + p.name + "' must be a number");
            if (!std::isfinite(value.get<double>())) throw bad("'" + p.name + "' must be finite");
            break;
        case ParamType::Integer:
            if (!value.is_number_integer() && !(value.is_number() && std::floor(value.get<double>()) == value.get<double>()))
                throw bad("'" + p.name + "' must be an integer");
            break;
        case ParamType::Boolean:
            if (!value.is_boolean()) throw bad("'" + p.name + "' must be a boolean");
            break;
        case ParamType::String:
            if (!value.is_string()) throw bad("'" + p.name + "' must be a string");
            break;
        case ParamType::Array:
            if (!value.is_array()) throw bad("'" + p.name + "' must be an array");
            break;
        }
        if (value.is_number()) {
            const double v = value.get<double>();
            if (p.min && (p.minExclusive ? !(v > *p.min) : !(v >= *p.min)))
                throw bad("'" + p.name + "' must be " + (p.minExclusive ? "> " : ">= ") + Json(*p.min).dump());
            if (p.max && !(v <= *p.max)) throw bad("'" + p.name + "' must be <= " + Json(*p.max).dump());
            out[p.name] = p.type == ParamType::Integer ? Json(static_cast<std::int64_t>(v)) : Json(v);
        } else {
            out[p.name] = value;
        }
    }
    if (def.check) {
        try {
            def.check(out);
        } catch (const Error& e) {
            throw bad(e.what());
        } catch (const Json::exception& e) {
            throw bad(e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<Json> validate(const PipelineSpec& spec, const Registry& registry) {
    std::vector<Json> resolved;
    Space current = Space::Raw;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const auto& stage = spec.stages[i];
        const StageDef* def = registry.find(stage.id);
        if (!def) throw SpecError(SpecError::Kind::UnknownStage, i, "unknown stage '" + stage.id + "'");
        resolved.push_back(resolveParams(*def, stage.params, i));
        if (std::find(def->accepts.begin(), def->accepts.end(), current) == def->accepts.end())
            throw SpecError(SpecError::Kind::SpaceChain, i,
                            stage.id + " accepts " + describeSpaces(def->accepts) + " but receives " +
                                std::string(toString(current)));
        current = def->produces.value_or(current);
    }
    if (current != Space::SrgbEncoded)
        throw SpecError(SpecError::Kind::SpaceChain, spec.stages.empty() ? 0 : spec.stages.size() - 1,
                        "pipeline must end in srgb_encoded, ends in " + std::string(toString(current)));
    return resolved;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::array<ChannelStats, 3> statsOf(const Payload& p) {
    auto planeStats = [](std::span<const float> v) {
        ChannelStats s;
        if (v.empty()) return s;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (float x : v) {
            lo = std::min(lo, static_cast<double>(x));
            hi = std::max(hi, static_cast<double>(x));
            sum += x;
        }
        return ChannelStats{lo, hi, sum / static_cast<double>(v.size())};
    };
    std::array<ChannelStats, 3> out{};
    if (const auto* img = std::get_if<ImageF>(&p)) {
        for (std::size_t c = 0; c < 3; ++c) out[c] = planeStats(img->plane(c));
    } else if (const auto* m = std::get_if<MosaicF>(&p)) {
        out.fill(planeStats(m->plane));
    }
    return out;
}

Space payloadSpace(const Payload& p) {
    if (const auto* img = std::get_if<ImageF>(&p)) return spaceOf(img->space());
    if (std::holds_alternative<MosaicF>(p)) return Space::Mosaic;
    return Space::Raw;
}

}  // namespace

RunResult run(const RawFrame& raw, const PipelineSpec& spec, const RunOptions& options) {
    const Registry& registry = options.registry ? *options.registry : Registry::builtin();
    const auto params = validate(spec, registry);

    RunContext ctx{&raw, options.gainMap, options.seed, spec.output};
    RunResult result;
    Payload payload;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const StageDef& def = *registry.find(spec.stages[i].id);
        const auto start = std::chrono::steady_clock::now();
        try {
            payload = def.run(std::move(payload), params[i], ctx);
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(i, def.id, e.what());
        }
        const auto stop = std::chrono::steady_clock::now();
        StageReport report;
        report.stageId = def.id;
        report.wallTime = std::chrono::duration<double>(stop - start).count();
        report.space = payloadSpace(payload);
        report.stats = statsOf(payload);
        result.totalSeconds += report.wallTime;
        result.reports.push_back(std::move(report));
    }
    auto* img = std::get_if<ImageF>(&payload);
    if (!img || img->space() != ColorSpace::SrgbEncoded)
        throw StageError(spec.stages.size() - 1, spec.stages.back().id, "pipeline did not produce an srgb_encoded image");
    result.image = std::move(*img);
    return result;
}

imageio::Rgb8 toRgb8(const ImageF& img) {
    imageio::Rgb8 out{img.width(), img.height(), std::vector<std::uint8_t>(img.pixelCount() * 3)};
    for (std::size_t c = 0; c < 3; ++c) {
        auto plane = img.plane(c);
        for (std::size_t i = 0; i < plane.size(); ++i) {
            const float v = plane[i];
            const double clamped = std::isfinite(v) ? std::clamp(static_cast<double>(v), 0.0, 1.0) : 0.0;
            out.interleaved[i * 3 + c] = static_cast<std::uint8_t>(std::lround(clamped * 255.0));
        }
    }
    return out;
}

std::vector<std::uint8_t> encodeOutput(const ImageF& img, const OutputSpec& output) {
    const auto rgb = toRgb8(img);
    return output.format == "png" ? imageio::encodePng(rgb) : imageio::encodeJpeg(rgb, output.quality);
}

fs::path sidecarFor(const fs::path& png) {
    fs::path json = png;
    json.replace_extension(".json");
    return json;
}

RenderOutcome renderFile(const fs::path& png, const fs::path& json, const PipelineSpec& spec, const fs::path& outDir,
                         const RunOptions& options, const Decoder& decoder) {
    using clock = std::chrono::steady_clock;
    RenderOutcome outcome;
    const auto t0 = clock::now();
    const RawFrame raw = decoder ? decoder(png, json) : rawio::loadRaw(png, json);
    outcome.decodeSeconds = std::chrono::duration<double>(clock::now() - t0).count();

    outcome.result = run(raw, spec, options);

    const auto t1 = clock::now();
    outcome.encoded = encodeOutput(outcome.result.image, spec.output);
    outcome.outputPath = outDir / (raw.meta.frameId + "." + spec.output.extension());
    imageio::writeFile(outcome.outputPath, outcome.encoded);
    outcome.encodeSeconds = std::chrono::duration<double>(clock::now() - t1).count();
    return outcome;
}

// ---------------------------------------------------------------------------
// Benchmarking

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BenchSummary bench(const std::vector<RawFrame>& raws, const PipelineSpec& spec, const BenchOptions& options) {
    if (options.repeats == 0) throw Error("bench needs repeats >= 1");
    const Registry& registry = options.run.registry ? *options.run.registry : Registry::builtin();
    validate(spec, registry);

    BenchSummary summary;
    summary.specName = spec.name;
    summary.repeats = options.repeats;
    for (const auto& s : spec.stages) summary.stageIds.push_back(s.id);
    summary.stageSecondsPerImage.assign(spec.stages.size(), 0.0);
    if (raws.empty()) return summary;

    std::vector<BenchImage> rows(raws.size());
    auto measure = [&](std::size_t k) {
        BenchImage row;
        row.frameId = raws[k].meta.frameId;
        std::vector<std::vector<double>> perStage(spec.stages.size());
        for (std::size_t r = 0; r < options.repeats; ++r) {
            const auto result = run(raws[k], spec, options.run);
            row.runs.push_back(result.totalSeconds);
            for (std::size_t s = 0; s < result.reports.size(); ++s) perStage[s].push_back(result.reports[s].wallTime);
        }
        row.seconds = median(row.runs);
        for (auto& times : perStage) row.stageSeconds.push_back(median(times));
        rows[k] = std::move(row);
    };

    const std::size_t jobs = options.timingStrict ? 1 : std::max<std::size_t>(1, options.jobs);
    if (jobs == 1) {
        for (std::size_t k = 0; k < raws.size(); ++k) measure(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failureMutex;
        std::vector<std::thread> workers;
        for (std::size_t j = 0; j < std::min(jobs, raws.size()); ++j)
            workers.emplace_back([&] {
                for (std::size_t k = next++; k < raws.size(); k = next++) {
                    try {
                        measure(k);
                    } catch (...) {
                        std::lock_guard lock(failureMutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::stable_sort(rows.begin(), rows.end(), [](const BenchImage& a, const BenchImage& b) { return a.frameId < b.frameId; });
    double total = 0.0;
    for (const auto& row : rows) {
        total += row.seconds;
        for (std::size_t s = 0; s < row.stageSeconds.size(); ++s) summary.stageSecondsPerImage[s] += row.stageSeconds[s];
    }
    const auto n = static_cast<double>(rows.size());
    summary.secondsPerImage = total / n;
    for (double& s : summary.stageSecondsPerImage) s /= n;
    summary.images = std::move(rows);
    return summary;
}

Json BenchSummary::toJson() const {
    Json images_ = Json::array();
    for (const auto& img : images) {
        Json stages = Json::object();
        for (std::size_t s = 0; s < stageIds.size() && s < img.stageSeconds.size(); ++s)
            stages[std::to_string(s) + ":" + stageIds[s]] = img.stageSeconds[s];
        images_.push_back({{"frame_id", img.frameId}, {"seconds", img.seconds}, {"runs", img.runs}, {"stages", stages}});
    }
    Json breakdown = Json::array();
    for (std::size_t s = 0; s < stageIds.size(); ++s)
        breakdown.push_back({{"index", s}, {"stage", stageIds[s]}, {"seconds", stageSecondsPerImage[s]}});
    return {{"spec", specName},
            {"repeats", repeats},
            {"image_count", images.size()},
            {"seconds_per_image", secondsPerImage},
            {"stages", breakdown},
            {"images", images_}};
}

std::string BenchSummary::table() const {
    std::size_t width = 12;
    for (const auto& id : stageIds) width = std::max(width, id.size() + 5);
    for (const auto& img : images) width = std::max(width, img.frameId.size() + 2);
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "spec " << specName << ", " << images.size() << " image(s), " << repeats << " repeat(s)\n";
    out << std::left << std::setw(static_cast<int>(width)) << "stage" << std::right << std::setw(12) << "seconds" << '\n';
    for (std::size_t s = 0; s < stageIds.size(); ++s)
        out << std::left << std::setw(static_cast<int>(width)) << (std::to_string(s) + " " + stageIds[s]) << std::right
            << std::setw(12) << stageSecondsPerImage[s] << '\n';
    out << std::left << std::setw(static_cast<int>(width)) << "total/image" << std::right << std::setw(12)
        << secondsPerImage << '\n';
    if (!images.empty()) {
        out << '\n' << std::left << std::setw(static_cast<int>(width)) << "frame" << std::right << std::setw(12) << "median"
            << '\n';
        for (const auto& img : images)
            out << std::left << std::setw(static_cast<int>(width)) << img.frameId << std::right << std::setw(12)
                << img.seconds << '\n';
    }
    return out.str();
}

}  // namespace nightisp::pipeline
