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

#include "nightisp/evalstudy.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

#include "nightisp/error.hpp"

namespace nightisp::evalstudy {

namespace fs = std::filesystem;

Manifest::Manifest(std::vector<Rendition> renditions) : renditions_(std::move(renditions)) {
    std::set<std::pair<std::string, std::string>> cells;
    for (std::size_t i = 0; i < renditions_.size(); ++i) {
        const auto& r = renditions_[i];
        if (r.renditionId.empty() || r.solutionId.empty() || r.sceneId.empty())
            throw Error("manifest entries need rendition_id, solution_id and scene_id");
        if (!index_.emplace(r.renditionId, i).second) throw Error("duplicate rendition_id " + r.renditionId);
        if (!cells.emplace(r.solutionId, r.sceneId).second)
            throw Error("solution " + r.solutionId + " has two renditions of scene " + r.sceneId);
    }
}

Manifest Manifest::fromJson(const Json& doc, const fs::path& baseDir) {
    const Json& list = doc.is_object() && doc.contains("renditions") ? doc.at("renditions") : doc;
    if (!list.is_array()) throw Error("manifest must be a JSON list of renditions");
    std::vector<Rendition> out;
    for (const auto& e : list) {
        if (!e.is_object()) throw Error("manifest entries must be objects");
        Rendition r;
        try {
            r.renditionId = e.at("rendition_id").get<std::string>();
            r.solutionId = e.at("solution_id").get<std::string>();
            r.sceneId = e.at("scene_id").get<std::string>();
            r.imagePath = e.value("image_path", std::string{});
        } catch (const Json::exception& ex) {
            throw Error(std::string("manifest entry: ") + ex.what());
        }
        if (!r.imagePath.empty() && r.imagePath.is_relative() && !baseDir.empty()) r.imagePath = baseDir / r.imagePath;
        out.push_back(std::move(r));
    }
    return Manifest(std::move(out));
}

Manifest Manifest::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    try {
        return fromJson(Json::parse(in), path.parent_path());
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

const Rendition* Manifest::find(std::string_view renditionId) const {
    const auto it = index_.find(renditionId);
    return it == index_.end() ? nullptr : &renditions_[it->second];
}

std::set<std::string> Manifest::solutions() const {
    std::set<std::string> out;
    for (const auto& r : renditions_) out.insert(r.solutionId);
    return out;
}

std::string_view toString(Choice c) {
    switch (c) {
    case Choice::Left: return "left";
    case Choice::Right: return "right";
    case Choice::Same: return "same";
    }
    return "same";
}

std::optional<Choice> parseChoice(std::string_view text) {
    if (text == "left") return Choice::Left;
    if (text == "right") return Choice::Right;
    if (text == "same") return Choice::Same;
    return std::nullopt;
}

Json toJson(const VoteRecord& v) {
    return {{"vote_id", v.voteId},   {"left", v.left},           {"right", v.right},       {"voter_id", v.voterId},
            {"choice", toString(v.choice)}, {"honeypot", v.honeypot}, {"timestamp", v.timestamp}};
}

VoteRecord voteFromJson(const Json& doc) {
    if (!doc.is_object()) throw Error("vote record must be an object");
    VoteRecord v;
    try {
        v.voteId = doc.at("vote_id").get<std::string>();
        if (doc.contains("pair") && doc.at("pair").is_object()) {
            v.left = doc.at("pair").at("left").get<std::string>();
            v.right = doc.at("pair").at("right").get<std::string>();
        } else {
            v.left = doc.at("left").get<std::string>();
            v.right = doc.at("right").get<std::string>();
        }
        v.voterId = doc.at("voter_id").get<std::string>();
        const auto choice = parseChoice(doc.at("choice").get<std::string>());
        if (!choice) throw Error("vote choice must be left, right or same");
        v.choice = *choice;
        v.honeypot = doc.value("honeypot", false);
        v.timestamp = doc.value("timestamp", std::int64_t{0});
    } catch (const Json::exception& e) {
        throw Error(std::string("vote record: ") + e.what());
    }
    if (v.left == v.right && !v.honeypot) throw Error("vote " + v.voteId + " compares a rendition with itself");
    return v;
}

std::vector<VoteRecord> loadVotes(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vote store " + path.string());
    std::vector<VoteRecord> votes;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        try {
            votes.push_back(voteFromJson(Json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return votes;
}

ScenePool scenePool(const Manifest& manifest) {
    ScenePool pool;
    for (const auto& r : manifest.renditions()) pool[r.sceneId].push_back(r.renditionId);
    for (auto it = pool.begin(); it != pool.end();) {
        if (it->second.size() < 2) {
            it = pool.erase(it);
        } else {
            std::sort(it->second.begin(), it->second.end());
            ++it;
        }
    }
    return pool;
}

ScheduledPair schedulePair(const ScenePool& pool, double honeypotRate, Scheduler& rng) {
    if (pool.empty()) throw EmptyPool("no scene has two or more renditions");
    if (!(honeypotRate >= 0.0 && honeypotRate <= 1.0)) throw Error("honeypot rate must be in [0, 1]");
    const bool honeypot = rng.uniform() < honeypotRate;
    auto scene = pool.begin();
    std::advance(scene, static_cast<std::ptrdiff_t>(rng.index(pool.size())));
    const auto& ids = scene->second;
    if (honeypot) {
        const auto& id = ids[rng.index(ids.size())];
        return {id, id, true};
    }
    const std::size_t i = rng.index(ids.size());
    std::size_t j = rng.index(ids.size() - 1);
    if (j >= i) ++j;
    if (rng.uniform() < 0.5) return {ids[j], ids[i], false};
    return {ids[i], ids[j], false};
}

BanResult applyBans(const std::vector<VoteRecord>& votes) {
    BanResult out;
    for (const auto& v : votes)
        if (v.honeypot && v.choice != Choice::Same) out.banned.insert(v.voterId);
    for (const auto& v : votes)
        if (!out.banned.count(v.voterId)) out.clean.push_back(v);
    return out;
}

namespace {

using PairKey = std::pair<std::string, std::string>;

/// Unordered pair key plus the choice expressed relative to it:
/// Left means the lexicographically smaller rendition won.
std::pair<PairKey, Choice> canonical(const VoteRecord& v) {
    if (v.left < v.right) return {{v.left, v.right}, v.choice};
    Choice c = v.choice;
    if (c == Choice::Left) c = Choice::Right;
    else if (c == Choice::Right) c = Choice::Left;
    return {{v.right, v.left}, c};
}

}  // namespace

std::vector<VoterAgreement> rankVoters(const std::vector<VoteRecord>& votes) {
    std::map<PairKey, std::array<std::size_t, 3>> tallies;
    for (const auto& v : votes) {
        if (v.honeypot) continue;
        const auto [key, c] = canonical(v);
        ++tallies[key][static_cast<std::size_t>(c)];
    }
    std::map<PairKey, Choice> majority;
    for (const auto& [key, t] : tallies) {
        const std::size_t best = *std::max_element(t.begin(), t.end());
        if (std::count(t.begin(), t.end(), best) == 1)
            majority[key] = static_cast<Choice>(std::max_element(t.begin(), t.end()) - t.begin());
    }

    std::map<std::string, VoterAgreement> byVoter;
    for (const auto& v : votes) {
        auto& a = byVoter[v.voterId];
        a.voterId = v.voterId;
        if (v.honeypot) continue;
        ++a.votes;
        const auto [key, c] = canonical(v);
        const auto it = majority.find(key);
        if (it == majority.end()) continue;
        ++a.decided;
        if (it->second == c) ++a.matched;
    }
    std::vector<VoterAgreement> ranked;
    for (auto& [id, a] : byVoter) {
        a.agreement = a.decided ? static_cast<double>(a.matched) / static_cast<double>(a.decided) : 0.0;
        ranked.push_back(a);
    }
    std::sort(ranked.begin(), ranked.end(), [](const VoterAgreement& x, const VoterAgreement& y) {
        if (x.agreement != y.agreement) return x.agreement > y.agreement;
        if (x.votes != y.votes) return x.votes > y.votes;
        return x.voterId < y.voterId;
    });
    return ranked;
}

std::set<std::string> selectTopVoters(const std::vector<VoteRecord>& votes, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("top voter fraction must be in (0, 1]");
    const auto ranked = rankVoters(votes);
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ranked.size()) - 1e-9));
    std::set<std::string> out;
    for (std::size_t i = 0; i < std::min(keep, ranked.size()); ++i) out.insert(ranked[i].voterId);
    return out;
}

std::vector<VoteRecord> restrictToVoters(const std::vector<VoteRecord>& votes, const std::set<std::string>& voters) {
    std::vector<VoteRecord> out;
    for (const auto& v : votes)
        if (voters.count(v.voterId)) out.push_back(v);
    return out;
}

ScoreTable computeScores(const std::vector<VoteRecord>& votes, const Manifest& manifest, const ScoreOptions& options) {
    for (const auto& v : votes)
        for (const auto* id : {&v.left, &v.right})
            if (!manifest.find(*id)) throw UnknownRendition("vote " + v.voteId + " names unknown rendition " + *id);

    ScoreTable table;
    table.mode = options.mode;
    table.solutionCount = manifest.solutions().size();
    std::set<std::string> voters;
    for (const auto& v : votes) voters.insert(v.voterId);
    table.voterCount = voters.size();

    // Latest answer per (voter, unordered pair).
    std::map<std::pair<std::string, PairKey>, const VoteRecord*> latest;
    for (const auto& v : votes) {
        if (v.honeypot || v.left == v.right) continue;
        const auto key = std::make_pair(v.voterId, canonical(v).first);
        auto [it, inserted] = latest.emplace(key, &v);
        if (!inserted && std::tie(it->second->timestamp, it->second->voteId) < std::tie(v.timestamp, v.voteId))
            it->second = &v;
    }

    std::map<std::string, double> wins;
    std::map<std::string, std::size_t> comparisons;
    const double sameCredit = options.sameAsHalf ? 0.5 : 0.0;
    for (const auto& [key, v] : latest) {
        ++comparisons[v->left];
        ++comparisons[v->right];
        switch (v->choice) {
        case Choice::Left: wins[v->left] += 1.0; break;
        case Choice::Right: wins[v->right] += 1.0; break;
        case Choice::Same:
            wins[v->left] += sameCredit;
            wins[v->right] += sameCredit;
            break;
        }
    }

    const double nt = static_cast<double>(table.solutionCount) * static_cast<double>(table.voterCount);
    for (const auto& r : manifest.renditions()) {
        const double w = wins.count(r.renditionId) ? wins.at(r.renditionId) : 0.0;
        double s = 0.0;
        if (options.mode == ScoreMode::Literal) {
            s = nt > 0.0 ? w / nt : 0.0;
        } else {
            const std::size_t n = comparisons.count(r.renditionId) ? comparisons.at(r.renditionId) : 0;
            s = n ? w / static_cast<double>(n) : 0.0;
        }
        table.renditionScores[r.renditionId] = s;
    }

    std::map<std::string, std::map<std::string, double>> perSolution;  // solution -> scene -> S_i
    for (const auto& r : manifest.renditions()) perSolution[r.solutionId][r.sceneId] = table.renditionScores[r.renditionId];
    for (const auto& [solution, scenes] : perSolution) {
        double sum = 0.0;
        for (const auto& [scene, s] : scenes) sum += s;
        table.solutionScores[solution] = sum / static_cast<double>(scenes.size());
    }
    return table;
}

ScoreTable scoreStudy(const std::vector<VoteRecord>& votes, const Manifest& manifest, const StudyOptions& options) {
    auto bans = applyBans(votes);
    const auto retained = selectTopVoters(bans.clean, options.topVoterFraction);
    auto table = computeScores(restrictToVoters(bans.clean, retained), manifest, options.score);
    table.bannedVoters = std::move(bans.banned);
    return table;
}

Json ScoreTable::toJson() const {
    return {{"mode", mode == ScoreMode::Literal ? "literal" : "observed"},
            {"N", solutionCount},
            {"T", voterCount},
            {"banned_voters", bannedVoters},
            {"renditions", renditionScores},
            {"solutions", solutionScores}};
}

namespace {

Json timeJson(double t) { return std::isinf(t) ? Json("inf") : Json(t); }

Json entryJson(const LeaderboardEntry& e) {
    Json j = {{"solution_id", e.solutionId},
              {"mean_score", e.meanScore},
              {"time_seconds", timeJson(e.timeSeconds)},
              {"quality_rank", e.qualityRank}};
    j["efficiency_rank"] = e.efficiencyRank ? Json(*e.efficiencyRank) : Json(nullptr);
    return j;
}

}  // namespace

Leaderboard leaderboard(const std::map<std::string, double>& scores, const std::map<std::string, double>& times) {
    Leaderboard board;
    for (const auto& [id, score] : scores) {
        const auto it = times.find(id);
        if (it == times.end()) throw MissingTime("no time entry for solution " + id);
        if (std::isnan(it->second) || it->second < 0.0) throw Error("time for " + id + " must be >= 0 or inf");
        board.quality.push_back({id, score, it->second, 0, std::nullopt});
    }
    std::sort(board.quality.begin(), board.quality.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
        if (a.meanScore != b.meanScore) return a.meanScore > b.meanScore;
        if (a.timeSeconds != b.timeSeconds) return a.timeSeconds < b.timeSeconds;
        return a.solutionId < b.solutionId;
    });
    for (std::size_t i = 0; i < board.quality.size(); ++i) board.quality[i].qualityRank = i + 1;

    const std::size_t pool = std::min(kEfficiencyPool, board.quality.size());
    board.efficiency.assign(board.quality.begin(), board.quality.begin() + static_cast<std::ptrdiff_t>(pool));
    std::stable_sort(board.efficiency.begin(), board.efficiency.end(),
                     [](const LeaderboardEntry& a, const LeaderboardEntry& b) { return a.timeSeconds < b.timeSeconds; });
    for (std::size_t i = 0; i < pool; ++i) {
        board.efficiency[i].efficiencyRank = i + 1;
        for (auto& q : board.quality)
            if (q.solutionId == board.efficiency[i].solutionId) q.efficiencyRank = i + 1;
    }
    return board;
}

Json Leaderboard::toJson() const {
    Json q = Json::array(), e = Json::array();
    for (const auto& x : quality) q.push_back(entryJson(x));
    for (const auto& x : efficiency) e.push_back(entryJson(x));
    return {{"quality", q}, {"efficiency", e}};
}

std::string Leaderboard::table() const {
    std::size_t width = 10;
    for (const auto& x : quality) width = std::max(width, x.solutionId.size() + 2);
    std::ostringstream out;
    auto rows = [&](const char* title, const std::vector<LeaderboardEntry>& list, bool efficiency) {
        out << title << '\n'
            << std::left << std::setw(6) << "rank" << std::setw(static_cast<int>(width)) << "solution" << std::right
            << std::setw(8) << "score" << std::setw(10) << "time, s" << '\n';
        for (const auto& x : list) {
            std::ostringstream t;
            if (std::isinf(x.timeSeconds)) t << "inf";
            else t << std::fixed << std::setprecision(1) << x.timeSeconds;
            out << std::left << std::setw(6) << (efficiency ? *x.efficiencyRank : x.qualityRank)
                << std::setw(static_cast<int>(width)) << x.solutionId << std::right << std::fixed << std::setprecision(2)
                << std::setw(8) << x.meanScore << std::setw(10) << t.str() << '\n';
        }
    };
    rows("quality", quality, false);
    out << '\n';
    rows("efficiency", efficiency, true);
    return out.str();
}

std::map<std::string, double> parseTimes(const Json& doc) {
    if (!doc.is_object()) throw Error("times must be a JSON object of solution -> seconds");
    std::map<std::string, double> out;
    for (const auto& [id, v] : doc.items()) {
        if (v.is_number()) {
            out[id] = v.get<double>();
        } else if (v.is_string()) {
            std::string s = v.get<std::string>();
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (s != "inf" && s != "infinity") throw Error("time for " + id + " must be a number or \"inf\"");
            out[id] = std::numeric_limits<double>::infinity();
        } else {
            throw Error("time for " + id + " must be a number or \"inf\"");
        }
        if (std::isnan(out[id]) || out[id] < 0.0) throw Error("time for " + id + " must be >= 0");
    }
    return out;
}

namespace {

Json readJsonFile(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace

std::map<std::string, double> loadTimes(const fs::path& path) { return parseTimes(readJsonFile(path)); }

std::map<std::string, double> loadScores(const fs::path& path) {
    const Json doc = readJsonFile(path);
    const Json& map = doc.is_object() && doc.contains("solutions") ? doc.at("solutions") : doc;
    if (!map.is_object()) throw Error("scores must be a JSON object of solution -> score");
    std::map<std::string, double> out;
    for (const auto& [id, v] : map.items()) {
        if (!v.is_number()) throw Error("score for " + id + " must be a number");
        out[id] = v.get<double>();
    }
    return out;
}

}  // namespace nightisp::evalstudy
