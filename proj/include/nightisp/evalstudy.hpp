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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nightisp::evalstudy {

using Json = nlohmann::json;

struct Rendition {
    std::string renditionId;
    std::string solutionId;
    std::string sceneId;
    std::filesystem::path imagePath;
};

/// Rendition list with unique ids and unique (solution, scene) pairs.
class Manifest {
public:
    Manifest() = default;
    explicit Manifest(std::vector<Rendition> renditions);

    /// JSON list of {rendition_id, solution_id, scene_id, image_path}; relative
    /// image paths resolve against the manifest's directory.
    static Manifest load(const std::filesystem::path& path);
    static Manifest fromJson(const Json& doc, const std::filesystem::path& baseDir = {});

    const std::vector<Rendition>& renditions() const noexcept { return renditions_; }
    const Rendition* find(std::string_view renditionId) const;
    std::set<std::string> solutions() const;

private:
    std::vector<Rendition> renditions_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

enum class Choice { Left, Right, Same };

std::string_view toString(Choice c);
/// Accepts "left", "right", "same"; nullopt otherwise.
std::optional<Choice> parseChoice(std::string_view text);

struct VoteRecord {
    std::string voteId;
    std::string left;
    std::string right;
    std::string voterId;
    Choice choice = Choice::Same;
    bool honeypot = false;
    std::int64_t timestamp = 0;  // milliseconds since the epoch

    friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

Json toJson(const VoteRecord& v);
/// Throws Error on missing or ill-typed fields.
VoteRecord voteFromJson(const Json& doc);

/// Line-delimited JSON, one VoteRecord per line.
std::vector<VoteRecord> loadVotes(const std::filesystem::path& path);

/// Seeded source of doubles in [0, 1) built from the top 53 bits of a
/// 64-bit Mersenne Twister, so draws match across standard libraries.
class Scheduler {
public:
    explicit Scheduler(std::uint64_t seed) : rng_(seed) {}
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 rng_;
};

/// Renditions grouped by scene; scenes with fewer than two renditions are dropped.
using ScenePool = std::map<std::string, std::vector<std::string>>;
ScenePool scenePool(const Manifest& manifest);

struct ScheduledPair {
    std::string left;
    std::string right;
    bool honeypot = false;
};

/// With probability honeypotRate an identical pair; otherwise a uniform scene
/// and a uniform unordered pair within it, sides shuffled. Throws EmptyPool.
ScheduledPair schedulePair(const ScenePool& pool, double honeypotRate, Scheduler& rng);

struct BanResult {
    std::vector<VoteRecord> clean;
    std::set<std::string> banned;
};

/// Any left/right answer on a honeypot bans the voter and removes every vote
/// they cast. Honeypot "same" answers stay in the clean list.
BanResult applyBans(const std::vector<VoteRecord>& votes);

struct VoterAgreement {
    std::string voterId;
    std::size_t votes = 0;    // non-honeypot votes
    std::size_t matched = 0;  // votes agreeing with a decided pair majority
    std::size_t decided = 0;  // votes on pairs that have a unique majority
    double agreement = 0.0;
};

/// Agreement of every voter with the per-pair majority (own vote included;
/// pairs with a tied plurality are skipped), best first: agreement, then vote
/// count, then voter id.
std::vector<VoterAgreement> rankVoters(const std::vector<VoteRecord>& votes);

/// Top ceil(fraction * V) voters of rankVoters. fraction must be in (0, 1].
std::set<std::string> selectTopVoters(const std::vector<VoteRecord>& votes, double fraction);

std::vector<VoteRecord> restrictToVoters(const std::vector<VoteRecord>& votes, const std::set<std::string>& voters);

enum class ScoreMode { Literal, Observed };

struct ScoreOptions {
    ScoreMode mode = ScoreMode::Literal;
    /// Counts a "same" answer as half a win for both sides instead of zero.
    bool sameAsHalf = false;
};

struct ScoreTable {
    std::map<std::string, double> renditionScores;
    std::map<std::string, double> solutionScores;
    std::size_t solutionCount = 0;  // N
    std::size_t voterCount = 0;     // T
    std::set<std::string> bannedVoters;
    ScoreMode mode = ScoreMode::Literal;

    Json toJson() const;
};

/// S_i = (1 / (N T)) sum_j sum_t A_ijt per rendition (observed mode divides
/// by the number of comparisons involving i instead). N counts the solutions
/// in the manifest, T the distinct voters in `votes`. When a voter answered
/// the same pair more than once, the latest (timestamp, vote id) counts.
/// Per-solution S averages S_i over that solution's scenes.
/// Throws UnknownRendition for votes naming renditions outside the manifest.
ScoreTable computeScores(const std::vector<VoteRecord>& votes, const Manifest& manifest, const ScoreOptions& options = {});

struct StudyOptions {
    double topVoterFraction = 1.0;
    ScoreOptions score;
};

/// Bans, then top-voter selection, then scoring.
ScoreTable scoreStudy(const std::vector<VoteRecord>& votes, const Manifest& manifest, const StudyOptions& options = {});

struct LeaderboardEntry {
    std::string solutionId;
    double meanScore = 0.0;
    double timeSeconds = 0.0;  // +infinity when unbounded
    std::size_t qualityRank = 0;
    std::optional<std::size_t> efficiencyRank;
};

struct Leaderboard {
    std::vector<LeaderboardEntry> quality;
    std::vector<LeaderboardEntry> efficiency;

    Json toJson() const;
    std::string table() const;
};

inline constexpr std::size_t kEfficiencyPool = 5;

/// Quality: score descending, then time ascending, then id. Efficiency: the
/// quality top five re-sorted by time ascending, unbounded last.
/// Throws MissingTime when a scored solution has no time entry.
Leaderboard leaderboard(const std::map<std::string, double>& scores, const std::map<std::string, double>& times);

/// JSON object solution_id -> seconds or "inf".
std::map<std::string, double> parseTimes(const Json& doc);
std::map<std::string, double> loadTimes(const std::filesystem::path& path);
/// JSON object solution_id -> score in [0, 1].
std::map<std::string, double> loadScores(const std::filesystem::path& path);

}  // namespace nightisp::evalstudy
