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

// Reference implementations written independently of the library code paths
// they check. Kept deliberately naive.

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <rapidjson/document.h>

#include "nightisp/evalstudy.hpp"

namespace nightisp::testing {

struct OracleRendition {
    std::string id;
    std::string solution;
    std::string scene;
};

struct OracleScores {
    std::map<std::string, double> rendition;
    std::map<std::string, double> solution;
};

/// S_i = (1 / (N T)) sum_j sum_t A_ijt by explicit loops over every rendition
/// j of the same scene and every voter t. A_ijt is looked up by scanning all
/// votes for the latest answer of t on {i, j}.
inline OracleScores bruteForceScores(const std::vector<evalstudy::VoteRecord>& votes,
                                     const std::vector<OracleRendition>& renditions) {
    std::set<std::string> solutions, voters;
    for (const auto& r : renditions) solutions.insert(r.solution);
    for (const auto& v : votes) voters.insert(v.voterId);
    const double n = static_cast<double>(solutions.size());
    const double t = static_cast<double>(voters.size());

    auto preferred = [&](const std::string& i, const std::string& j, const std::string& voter) {
        const evalstudy::VoteRecord* last = nullptr;
        for (const auto& v : votes) {
            if (v.honeypot || v.voterId != voter) continue;
            const bool match = (v.left == i && v.right == j) || (v.left == j && v.right == i);
            if (!match) continue;
            if (!last || std::tie(last->timestamp, last->voteId) < std::tie(v.timestamp, v.voteId)) last = &v;
        }
        if (!last) return 0;
        if (last->choice == evalstudy::Choice::Left) return last->left == i ? 1 : 0;
        if (last->choice == evalstudy::Choice::Right) return last->right == i ? 1 : 0;
        return 0;
    };

    OracleScores out;
    for (const auto& ri : renditions) {
        long long sum = 0;
        for (const auto& rj : renditions) {
            if (rj.scene != ri.scene || rj.id == ri.id) continue;
            for (const auto& voter : voters) sum += preferred(ri.id, rj.id, voter);
        }
        out.rendition[ri.id] = (n * t) > 0 ? static_cast<double>(sum) / (n * t) : 0.0;
    }
    for (const auto& s : solutions) {
        std::vector<std::pair<std::string, double>> perScene;
        for (const auto& r : renditions)
            if (r.solution == s) perScene.emplace_back(r.scene, out.rendition[r.id]);
        std::sort(perScene.begin(), perScene.end());
        double sum = 0.0;
        for (const auto& [scene, v] : perScene) sum += v;
        out.solution[s] = sum / static_cast<double>(perScene.size());
    }
    return out;
}

struct OracleSidecar {
    double blackLevel = 0.0;
    double whiteLevel = 0.0;
    std::array<double, 3> asShotNeutral{};
    std::string cfa;
    std::string frameId;
};

/// Reads the level and neutral fields with rapidjson instead of the library's parser.
inline OracleSidecar readSidecarRapidjson(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    rapidjson::Document doc;
    doc.Parse(ss.str().c_str());
    auto level = [&](const char* key) {
        const auto& v = doc[key];
        if (v.IsNumber()) return v.GetDouble();
        double sum = 0.0;
        for (const auto& e : v.GetArray()) sum += e.GetDouble();
        return sum / v.Size();
    };
    OracleSidecar s;
    s.blackLevel = level("black_level");
    s.whiteLevel = level("white_level");
    for (rapidjson::SizeType i = 0; i < 3; ++i) s.asShotNeutral[i] = doc["as_shot_neutral"][i].GetDouble();
    s.cfa = doc["cfa_pattern"].GetString();
    s.frameId = doc["frame_id"].GetString();
    return s;
}

}  // namespace nightisp::testing
