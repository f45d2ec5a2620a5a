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

// nightisp command-line entry point: render, bench, calibrate, score, serve.

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nightisp/error.hpp"
#include "nightisp/evalstudy.hpp"
#include "nightisp/imageio.hpp"
#include "nightisp/mosaic.hpp"
#include "nightisp/pipeline.hpp"
#include "nightisp/rawio.hpp"
#include "nightisp/study_server.hpp"

#ifndef NIGHTISP_CONFIG_DIR
#define NIGHTISP_CONFIG_DIR "config"
#endif

namespace fs = std::filesystem;
using namespace nightisp;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expands each argument: directories yield their *.png files, patterns go
/// through glob(3), plain paths pass through when they exist.
std::vector<fs::path> expandInputs(const std::vector<std::string>& args) {
    std::vector<fs::path> out;
    for (const auto& a : args) {
        std::error_code ec;
        if (fs::is_directory(a, ec)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(a, ec))
                if (e.path().extension() == ".png") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
            continue;
        }
        glob_t g{};
        if (::glob(a.c_str(), 0, nullptr, &g) == 0)
            for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
        ::globfree(&g);
    }
    return out;
}

std::pair<std::size_t, std::size_t> parseSize(const std::string& text) {
    const auto x = text.find_first_of("xX");
    try {
        if (x == std::string::npos) throw std::invalid_argument(text);
        std::size_t used = 0;
        const auto w = std::stoul(text.substr(0, x), &used);
        if (used != x) throw std::invalid_argument(text);
        const auto rest = text.substr(x + 1);
        const auto h = std::stoul(rest, &used);
        if (used != rest.size() || w == 0 || h == 0) throw std::invalid_argument(text);
        return {w, h};
    } catch (const std::exception&) {
        throw UsageError("--size expects WxH, got '" + text + "'");
    }
}

rawio::LoadOptions loadOptions(const std::string& cameraPath) {
    rawio::LoadOptions opts;
    if (!cameraPath.empty() && fs::exists(cameraPath)) opts.fallbackCst = rawio::loadCameraConfig(cameraPath);
    return opts;
}

struct SpecArgs {
    std::string preset = "baseline";
    std::vector<std::string> overrides;
    std::string size;
};

// Preset, override and size problems are command-line mistakes, so they map
// to the usage exit code.
pipeline::PipelineSpec buildSpec(const SpecArgs& args) {
    if (!args.size.empty()) parseSize(args.size);
    try {
        auto spec = pipeline::loadPreset(args.preset);
        for (const auto& o : args.overrides) pipeline::applyOverride(spec, o);
        if (!args.size.empty()) {
            const auto [w, h] = parseSize(args.size);
            spec.output.width = w;
            spec.output.height = h;
        }
        pipeline::validate(spec);
        return spec;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::string defaultCamera() { return (fs::path(NIGHTISP_CONFIG_DIR) / "camera.json").string(); }

// ---------------------------------------------------------------------------

struct RenderArgs {
    std::vector<std::string> inputs;
    SpecArgs spec;
    std::string out = ".";
    std::uint64_t seed = 0;
    std::string gainMap;
    std::string camera = defaultCamera();
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

int cmdRender(const RenderArgs& a) {
    const auto spec = buildSpec(a.spec);
    const auto inputs = expandInputs(a.inputs);
    if (inputs.empty()) {
        std::cerr << "render: no inputs\n";
        return kFailed;
    }
    fs::create_directories(a.out);
    std::optional<GainMap> gain;
    if (!a.gainMap.empty()) gain = rawio::readGainMap(a.gainMap);
    const auto opts = loadOptions(a.camera);

    pipeline::RunOptions runOpts;
    runOpts.seed = a.seed;
    runOpts.gainMap = gain ? &*gain : nullptr;
    const pipeline::Decoder decoder = [&opts](const fs::path& png, const fs::path& json) {
        return rawio::loadRaw(png, json, opts);
    };

    std::vector<std::string> lines(inputs.size()), errors(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < inputs.size(); k = next++) {
            try {
                const auto r = pipeline::renderFile(inputs[k], pipeline::sidecarFor(inputs[k]), spec, a.out, runOpts, decoder);
                std::ostringstream line;
                line << r.outputPath.string() << "  processing " << r.result.totalSeconds << " s";
                lines[k] = line.str();
            } catch (const std::exception& e) {
                errors[k] = inputs[k].string() + ": " + e.what();
            }
        }
    };
    const std::size_t jobs = std::min(std::max<std::size_t>(1, a.jobs), inputs.size());
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t failures = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (!errors[k].empty()) {
            ++failures;
            std::cerr << "error: " << errors[k] << '\n';
        } else {
            std::cout << lines[k] << '\n';
        }
    }
    if (failures) {
        std::cerr << failures << " of " << inputs.size() << " input(s) failed\n";
        return kFailed;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> inputs;
    SpecArgs spec;
    std::size_t repeats = 3;
    bool timingStrict = false;
    std::size_t jobs = 1;
    std::uint64_t seed = 0;
    std::string json;
    std::string gainMap;
    std::string camera = defaultCamera();
};

int cmdBench(const BenchArgs& a) {
    if (a.repeats == 0) throw UsageError("--repeats must be >= 1");
    const auto spec = buildSpec(a.spec);
    const auto opts = loadOptions(a.camera);
    std::vector<RawFrame> raws;
    for (const auto& p : expandInputs(a.inputs)) raws.push_back(rawio::loadRaw(p, pipeline::sidecarFor(p), opts));
    std::optional<GainMap> gain;
    if (!a.gainMap.empty()) gain = rawio::readGainMap(a.gainMap);

    pipeline::BenchOptions bo;
    bo.repeats = a.repeats;
    bo.jobs = a.jobs;
    bo.timingStrict = a.timingStrict;
    bo.run.seed = a.seed;
    bo.run.gainMap = gain ? &*gain : nullptr;
    const auto summary = pipeline::bench(raws, spec, bo);
    std::cout << summary.table();
    if (!a.json.empty()) {
        std::ofstream out(a.json);
        out << summary.toJson().dump(2) << '\n';
        if (!out) throw Error("cannot write " + a.json);
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::string> inputs;
    std::string out = "gain_map.bin";
    double sigma = rawio::kDefaultCalibrationSigma;
    double cap = rawio::kDefaultGainCap;
    std::string camera = defaultCamera();
};

int cmdCalibrate(const CalibrateArgs& a) {
    const auto inputs = expandInputs(a.inputs);
    if (inputs.empty()) {
        std::cerr << "calibrate: no inputs\n";
        return kFailed;
    }
    const auto opts = loadOptions(a.camera);
    std::vector<double> sum;
    MosaicF mean;
    for (const auto& p : inputs) {
        const auto m = mosaic::normalizeLevels(rawio::loadRaw(p, pipeline::sidecarFor(p), opts));
        if (sum.empty()) {
            mean = m;
            sum.assign(m.plane.size(), 0.0);
        } else if (m.width != mean.width || m.height != mean.height || !(m.cfa == mean.cfa)) {
            throw DimensionError(p.string() + ": calibration frame dimensions or CFA layout differ from the first frame");
        }
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += m.plane[i];
    }
    const auto n = static_cast<double>(inputs.size());
    for (std::size_t i = 0; i < sum.size(); ++i) mean.plane[i] = static_cast<float>(sum[i] / n);
    const auto map = rawio::buildGainMap(mean, a.sigma, a.cap);
    rawio::writeGainMap(a.out, map);
    std::cout << "wrote " << a.out << " from " << inputs.size() << " frame(s)\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string votes;
    std::string manifest;
    std::string scores;
    std::string times;
    double topVoters = 0.1;
    std::string mode = "literal";
    bool sameHalf = false;
    bool efficiency = false;
    std::string out = ".";
};

void writeJson(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw Error("cannot write " + path.string());
}

int cmdScore(const ScoreArgs& a) {
    if (a.efficiency && a.times.empty()) throw UsageError("--efficiency needs --times");
    if (a.scores.empty() && (a.votes.empty() || a.manifest.empty()))
        throw UsageError("score needs --votes with --images/--manifest, or --scores");
    fs::create_directories(a.out);

    std::map<std::string, double> scores;
    if (!a.scores.empty()) {
        scores = evalstudy::loadScores(a.scores);
    } else {
        if (!fs::exists(a.votes)) {
            std::cerr << "score: votes file not found: " << a.votes << '\n';
            return kFailed;
        }
        evalstudy::StudyOptions so;
        so.topVoterFraction = a.topVoters;
        so.score.mode = a.mode == "observed" ? evalstudy::ScoreMode::Observed : evalstudy::ScoreMode::Literal;
        so.score.sameAsHalf = a.sameHalf;
        const auto table =
            evalstudy::scoreStudy(evalstudy::loadVotes(a.votes), evalstudy::Manifest::load(a.manifest), so);
        writeJson(fs::path(a.out) / "scores.json", table.toJson());
        scores = table.solutionScores;
    }

    if (a.times.empty()) {
        for (const auto& [id, s] : scores) std::cout << id << ' ' << s << '\n';
        return kOk;
    }
    const auto board = evalstudy::leaderboard(scores, evalstudy::loadTimes(a.times));
    writeJson(fs::path(a.out) / "leaderboard.json", board.toJson());
    const auto text = board.table();
    if (a.efficiency) {
        std::cout << text;
    } else {
        std::cout << text.substr(0, text.find("\nefficiency"));
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
    std::string images;
    std::string host = "127.0.0.1";
    int port = 8080;
    double honeypotRate = 0.1;
    std::string store = "votes.jsonl";
    std::uint64_t seed = 0;
    double topVoters = 0.1;
    std::string ui;
};

evalstudy::StudyServer* gServer = nullptr;

void onSignal(int) {
    if (gServer) gServer->stop();
}

int cmdServe(const ServeArgs& a) {
    evalstudy::ServerConfig cfg;
    cfg.honeypotRate = a.honeypotRate;
    cfg.seed = a.seed;
    cfg.storePath = a.store;
    cfg.study.topVoterFraction = a.topVoters;
    cfg.uiDir = a.ui;
    evalstudy::StudyServer server(evalstudy::Manifest::load(a.images), cfg);
    const int port = server.start(a.host, a.port);
    std::cout << "serving on http://" << a.host << ':' << port << std::endl;
    gServer = &server;
    std::signal(SIGINT, onSignal);
    std::signal(SIGTERM, onSignal);
    server.wait();
    gServer = nullptr;
    return kOk;
}

void addSpecOptions(CLI::App* cmd, SpecArgs& s) {
    cmd->add_option("--preset", s.preset, "Preset name or path to a pipeline JSON file")->capture_default_str();
    cmd->add_option("--set", s.overrides, "Parameter override stage.param=value (repeatable)");
    cmd->add_option("--size", s.size, "Output canvas WxH (swapped for portrait frames)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nightisp: night-photography raw rendering, benchmarking and study scoring"};
    app.require_subcommand(1);

    RenderArgs render;
    auto* r = app.add_subcommand("render", "Render raw frames (<name>.png + <name>.json) to sRGB images");
    r->add_option("inputs", render.inputs, "Raw PNG files, directories or glob patterns");
    addSpecOptions(r, render.spec);
    r->add_option("--out", render.out, "Output directory")->capture_default_str();
    r->add_option("--seed", render.seed, "Seed for randomized stages")->capture_default_str();
    r->add_option("--gain-map", render.gainMap, "Lens-shading gain map written by calibrate");
    r->add_option("--camera", render.camera, "Camera config with the fallback colour matrix")->capture_default_str();
    r->add_option("--jobs", render.jobs, "Files rendered concurrently")->capture_default_str();

    BenchArgs benchArgs;
    auto* b = app.add_subcommand("bench", "Time the pipeline stages, excluding decode and encode");
    b->add_option("inputs", benchArgs.inputs, "Raw PNG files, directories or glob patterns");
    addSpecOptions(b, benchArgs.spec);
    b->add_option("--repeats", benchArgs.repeats, "Runs per image; the median is reported")->capture_default_str();
    b->add_flag("--timing-strict", benchArgs.timingStrict, "Process one image at a time");
    b->add_option("--jobs", benchArgs.jobs, "Images measured concurrently unless --timing-strict")->capture_default_str();
    b->add_option("--seed", benchArgs.seed, "Seed for randomized stages")->capture_default_str();
    b->add_option("--json", benchArgs.json, "Write the summary as JSON to this path");
    b->add_option("--gain-map", benchArgs.gainMap, "Lens-shading gain map written by calibrate");
    b->add_option("--camera", benchArgs.camera, "Camera config with the fallback colour matrix")->capture_default_str();

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Build a lens-shading gain map from flat white frames");
    c->add_option("inputs", cal.inputs, "Calibration raw PNG files, directories or glob patterns");
    c->add_option("--out", cal.out, "Gain map output path")->capture_default_str();
    c->add_option("--sigma", cal.sigma, "Smoothing sigma in mosaic pixels")->capture_default_str();
    c->add_option("--cap", cal.cap, "Maximum gain")->capture_default_str();
    c->add_option("--camera", cal.camera, "Camera config with the fallback colour matrix")->capture_default_str();

    ScoreArgs score;
    auto* s = app.add_subcommand("score", "Aggregate pairwise votes into quality and efficiency leaderboards");
    s->add_option("--votes", score.votes, "Vote store (JSON lines)");
    s->add_option("--images,--manifest", score.manifest, "Rendition manifest");
    s->add_option("--scores", score.scores, "Precomputed per-solution scores instead of votes");
    s->add_option("--times", score.times, "JSON map solution -> seconds or \"inf\"");
    s->add_option("--top-voters", score.topVoters, "Fraction of best-agreeing voters kept")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    s->add_option("--mode", score.mode, "literal or observed normalization")
        ->check(CLI::IsMember({"literal", "observed"}))
        ->capture_default_str();
    s->add_flag("--same-half", score.sameHalf, "Count a \"same\" answer as half a win for both sides");
    s->add_flag("--efficiency", score.efficiency, "Also print the efficiency table");
    s->add_option("--out", score.out, "Directory for scores.json and leaderboard.json")->capture_default_str();

    ServeArgs serve;
    auto* v = app.add_subcommand("serve", "Run the pairwise voting service");
    v->add_option("--images", serve.images, "Rendition manifest")->required();
    v->add_option("--host", serve.host, "Bind address")->capture_default_str();
    v->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str();
    v->add_option("--honeypot-rate", serve.honeypotRate, "Fraction of identical pairs")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    v->add_option("--store", serve.store, "Append-only vote store")->capture_default_str();
    v->add_option("--seed", serve.seed, "Pair scheduling seed")->capture_default_str();
    v->add_option("--top-voters", serve.topVoters, "Fraction of voters kept in /api/scores")->capture_default_str();
    v->add_option("--ui", serve.ui, "Static frontend directory served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (r->parsed()) return cmdRender(render);
        if (b->parsed()) return cmdBench(benchArgs);
        if (c->parsed()) return cmdCalibrate(cal);
        if (s->parsed()) return cmdScore(score);
        if (v->parsed()) return cmdServe(serve);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
