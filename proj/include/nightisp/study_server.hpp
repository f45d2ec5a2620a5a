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
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nightisp/evalstudy.hpp"

namespace httplib {
class Server;
}

namespace nightisp::evalstudy {

struct ServerConfig {
    double honeypotRate = 0.1;
    std::uint64_t seed = 0;
    std::filesystem::path storePath = "votes.jsonl";
    StudyOptions study;
    std::filesystem::path uiDir;  // served at / when set
};

/// Pairwise-vote HTTP service.
///
///   GET  /api/pair?voter=<id>     -> {pair_id, left_url, right_url}
///   POST /api/vote                 {pair_id, voter, choice} -> 200 | 400 | 404 | 409
///   GET  /api/scores              -> ScoreTable after bans and voter selection
///   GET  /img/<pair_id>/<side>    -> image bytes for one side of an issued pair
///   GET  /img/<rendition_id>      -> image bytes
///
/// Pair URLs name the pair, not the rendition, so a honeypot's two sides are
/// indistinguishable to the client. Votes are appended and flushed to the
/// store before the response is sent.
class StudyServer {
public:
    StudyServer(Manifest manifest, ServerConfig config);
    ~StudyServer();
    StudyServer(const StudyServer&) = delete;
    StudyServer& operator=(const StudyServer&) = delete;

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from elsewhere.
    void wait();
    void stop();

    std::vector<VoteRecord> votes() const;

private:
    struct IssuedPair {
        std::string left;
        std::string right;
        std::string voter;
        bool honeypot = false;
    };

    void routes();
    std::string issuePairId();

    Manifest manifest_;
    ServerConfig config_;
    ScenePool pool_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;

    mutable std::mutex mutex_;
    Scheduler scheduler_;
    std::mt19937_64 idRng_;
    std::uint64_t counter_ = 0;
    std::map<std::string, IssuedPair> issued_;
    std::set<std::string> voted_;
    std::vector<VoteRecord> votes_;
};

}  // namespace nightisp::evalstudy
