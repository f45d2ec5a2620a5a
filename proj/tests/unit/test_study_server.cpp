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

#include <gtest/gtest.h>

#include <fstream>

#include <httplib.h>

#include "nightisp/imageio.hpp"
#include "nightisp/study_server.hpp"
#include "synth.hpp"

using namespace nightisp;
using namespace nightisp::evalstudy;
namespace nt = nightisp::testing;

namespace {

struct Fixture {
    nt::TempDir dir{"server"};
    Manifest manifest;

    Fixture() {
        std::vector<Rendition> rs;
        for (const char* sol : {"A", "B", "C"})
            for (const char* scene : {"s1", "s2"}) {
                const std::string id = std::string(sol) + "_" + scene;
                const auto path = dir.path() / (id + ".png");
                imageio::writeFile(path, imageio::encodePng({2, 2, std::vector<std::uint8_t>(12, sol[0])}));
                rs.push_back({id, sol, scene, path});
            }
        manifest = Manifest(rs);
    }

    ServerConfig config(double honeypotRate) const {
        ServerConfig c;
        c.honeypotRate = honeypotRate;
        c.seed = 11;
        c.storePath = dir.path() / "votes.jsonl";
        return c;
    }
};

std::size_t lineCount(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

Json getPair(httplib::Client& cli, const std::string& voter) {
    auto res = cli.Get("/api/pair?voter=" + voter);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    return Json::parse(res->body);
}

int postVote(httplib::Client& cli, const std::string& pairId, const std::string& voter, const std::string& choice) {
    const Json body = {{"pair_id", pairId}, {"voter", voter}, {"choice", choice}};
    auto res = cli.Post("/api/vote", body.dump(), "application/json");
    return res ? res->status : -1;
}

}  // namespace

TEST(StudyServer, RoundTripAndDuplicate) {
    Fixture f;
    StudyServer server(f.manifest, f.config(0.0));
    const int port = server.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);

    const Json pair = getPair(cli, "alice");
    EXPECT_FALSE(pair.contains("honeypot"));
    const std::string pid = pair["pair_id"];
    auto img = cli.Get(pair["left_url"].get<std::string>());
    ASSERT_TRUE(img);
    EXPECT_EQ(img->status, 200);
    EXPECT_EQ(img->get_header_value("Content-Type"), "image/png");

    EXPECT_EQ(postVote(cli, pid, "alice", "left"), 200);
    EXPECT_EQ(lineCount(f.dir.path() / "votes.jsonl"), 1u);
    EXPECT_EQ(postVote(cli, pid, "alice", "right"), 409);
    EXPECT_EQ(lineCount(f.dir.path() / "votes.jsonl"), 1u);

    auto scores = cli.Get("/api/scores");
    ASSERT_TRUE(scores);
    const Json table = Json::parse(scores->body);
    EXPECT_EQ(table["T"], 1);
    double total = 0.0;
    for (const auto& [id, v] : table["renditions"].items()) total += v.get<double>();
    EXPECT_GT(total, 0.0);
    server.stop();
}

TEST(StudyServer, ErrorStatuses) {
    Fixture f;
    StudyServer server(f.manifest, f.config(0.0));
    const int port = server.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);

    EXPECT_EQ(cli.Get("/api/pair")->status, 400);
    EXPECT_EQ(postVote(cli, "nope", "bob", "left"), 404);
    const std::string pid = getPair(cli, "bob")["pair_id"];
    EXPECT_EQ(postVote(cli, pid, "bob", "maybe"), 400);
    EXPECT_EQ(cli.Post("/api/vote", "{not json", "application/json")->status, 400);
    EXPECT_EQ(cli.Post("/api/vote", R"({"pair_id": 3})", "application/json")->status, 400);
    EXPECT_EQ(cli.Get("/img/unknown_rendition")->status, 404);
    EXPECT_EQ(cli.Get("/img/A_s1")->status, 200);
    EXPECT_EQ(cli.Get("/img/nopair/left")->status, 404);
    server.stop();
}

TEST(StudyServer, HoneypotViolatorExcludedFromScores) {
    Fixture f;
    {
        StudyServer server(f.manifest, f.config(0.5));
        const int port = server.start("127.0.0.1", 0);
        httplib::Client cli("127.0.0.1", port);
        bool violated = false;
        for (int i = 0; i < 60; ++i) {
            for (const char* voter : {"honest", "cheater"}) {
                const Json pair = getPair(cli, voter);
                const auto left = cli.Get(pair["left_url"].get<std::string>());
                const auto right = cli.Get(pair["right_url"].get<std::string>());
                const bool same = left->body == right->body;
                std::string choice = same && std::string(voter) == "honest" ? "same" : "left";
                if (same && std::string(voter) == "cheater") violated = true;
                ASSERT_EQ(postVote(cli, pair["pair_id"], voter, choice), 200);
            }
        }
        ASSERT_TRUE(violated);
        const Json table = Json::parse(cli.Get("/api/scores")->body);
        EXPECT_EQ(table["banned_voters"], Json::array({"cheater"}));
        EXPECT_EQ(table["T"], 1);
        server.stop();
    }
    // The store survives a restart and keeps rejecting re-votes.
    StudyServer again(f.manifest, f.config(0.5));
    EXPECT_EQ(again.votes().size(), 120u);
    const int port = again.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);
    EXPECT_EQ(postVote(cli, again.votes().front().voteId, "honest", "left"), 409);
    again.stop();
}

TEST(StudyServer, RejectsBadConfig) {
    Fixture f;
    EXPECT_ANY_THROW(StudyServer(f.manifest, f.config(1.0)));
    EXPECT_ANY_THROW(StudyServer(Manifest({{"a", "A", "s", "a.png"}}), f.config(0.1)));
}
