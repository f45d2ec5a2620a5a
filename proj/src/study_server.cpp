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

#include "nightisp/study_server.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <httplib.h>

#include "nightisp/error.hpp"
#include "nightisp/imageio.hpp"

namespace nightisp::evalstudy {

namespace {

void sendJson(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void sendError(httplib::Response& res, int status, const std::string& message) {
    sendJson(res, status, {{"error", message}});
}

std::string contentType(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    return "application/octet-stream";
}

std::int64_t nowMillis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

StudyServer::StudyServer(Manifest manifest, ServerConfig config)
    : manifest_(std::move(manifest)),
      config_(std::move(config)),
      pool_(scenePool(manifest_)),
      server_(std::make_unique<httplib::Server>()),
      scheduler_(config_.seed),
      idRng_(config_.seed ^ 0x9e3779b97f4a7c15ULL) {
    if (pool_.empty()) throw EmptyPool("manifest has no scene with two or more renditions");
    if (!(config_.honeypotRate >= 0.0 && config_.honeypotRate < 1.0)) throw Error("honeypot rate must be in [0, 1)");
    if (std::filesystem::exists(config_.storePath)) {
        votes_ = loadVotes(config_.storePath);
        for (const auto& v : votes_) {
            voted_.insert(v.voteId);
            issued_[v.voteId] = {v.left, v.right, v.voterId, v.honeypot};
        }
    }
    routes();
}

StudyServer::~StudyServer() { stop(); }

std::string StudyServer::issuePairId() {
    char buf[40];
    std::snprintf(buf, sizeof buf, "p%06llx%016llx", static_cast<unsigned long long>(++counter_),
                  static_cast<unsigned long long>(idRng_()));
    return buf;
}

void StudyServer::routes() {
    auto& svr = *server_;

    svr.Get("/api/pair", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string voter = req.get_param_value("voter");
        if (voter.empty()) return sendError(res, 400, "voter query parameter is required");
        std::lock_guard lock(mutex_);
        const auto pair = schedulePair(pool_, config_.honeypotRate, scheduler_);
        std::string id;
        do id = issuePairId();
        while (issued_.count(id));
        issued_[id] = {pair.left, pair.right, voter, pair.honeypot};
        sendJson(res, 200, {{"pair_id", id}, {"left_url", "/img/" + id + "/left"}, {"right_url", "/img/" + id + "/right"}});
    });

    svr.Post("/api/vote", [this](const httplib::Request& req, httplib::Response& res) {
        Json body;
        try {
            body = Json::parse(req.body);
        } catch (const Json::parse_error&) {
            return sendError(res, 400, "body must be JSON");
        }
        if (!body.is_object() || !body.contains("pair_id") || !body["pair_id"].is_string() || !body.contains("voter") ||
            !body["voter"].is_string() || !body.contains("choice") || !body["choice"].is_string())
            return sendError(res, 400, "vote needs string fields pair_id, voter and choice");
        const auto choice = parseChoice(body["choice"].get<std::string>());
        if (!choice) return sendError(res, 400, "choice must be left, right or same");
        const std::string pairId = body["pair_id"].get<std::string>();
        const std::string voter = body["voter"].get<std::string>();

        std::lock_guard lock(mutex_);
        const auto it = issued_.find(pairId);
        if (it == issued_.end()) return sendError(res, 404, "unknown pair " + pairId);
        if (voted_.count(pairId)) return sendError(res, 409, "pair " + pairId + " already has a vote");
        if (it->second.voter != voter) return sendError(res, 400, "pair was issued to another voter");

        VoteRecord v{pairId, it->second.left, it->second.right, voter, *choice, it->second.honeypot, nowMillis()};
        {
            std::ofstream out(config_.storePath, std::ios::app);
            out << toJson(v).dump() << '\n';
            out.flush();
            if (!out) return sendError(res, 500, "vote store write failed");
        }
        voted_.insert(pairId);
        votes_.push_back(v);
        sendJson(res, 200, {{"status", "recorded"}, {"pair_id", pairId}});
    });

    svr.Get("/api/scores", [this](const httplib::Request&, httplib::Response& res) {
        std::vector<VoteRecord> snapshot;
        {
            std::lock_guard lock(mutex_);
            snapshot = votes_;
        }
        try {
            sendJson(res, 200, scoreStudy(snapshot, manifest_, config_.study).toJson());
        } catch (const std::exception& e) {
            sendError(res, 500, e.what());
        }
    });

    auto serveFile = [](httplib::Response& res, const std::filesystem::path& path) {
        try {
            const auto bytes = imageio::readFile(path);
            res.set_content(std::string(bytes.begin(), bytes.end()), contentType(path));
        } catch (const std::exception&) {
            sendError(res, 404, "image unavailable");
        }
    };

    svr.Get(R"(/img/([^/]+)/(left|right))", [this, serveFile](const httplib::Request& req, httplib::Response& res) {
        std::string rendition;
        {
            std::lock_guard lock(mutex_);
            const auto it = issued_.find(req.matches[1].str());
            if (it == issued_.end()) return sendError(res, 404, "unknown pair");
            rendition = req.matches[2].str() == "left" ? it->second.left : it->second.right;
        }
        const Rendition* r = manifest_.find(rendition);
        if (!r) return sendError(res, 404, "unknown rendition");
        serveFile(res, r->imagePath);
    });

    svr.Get(R"(/img/([^/]+))", [this, serveFile](const httplib::Request& req, httplib::Response& res) {
        const Rendition* r = manifest_.find(req.matches[1].str());
        if (!r) return sendError(res, 404, "unknown rendition");
        serveFile(res, r->imagePath);
    });

    if (!config_.uiDir.empty() && !svr.set_mount_point("/", config_.uiDir.string()))
        throw Error("cannot mount ui directory " + config_.uiDir.string());
}

int StudyServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
    } else if (!server_->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void StudyServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void StudyServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::vector<VoteRecord> StudyServer::votes() const {
    std::lock_guard lock(mutex_);
    return votes_;
}

}  // namespace nightisp::evalstudy
