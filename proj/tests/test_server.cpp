#include "reception/server.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace reception;

namespace {

class ServerTest : public ::testing::Test {
protected:
    void SetUp() override {
        std::vector<Chunk> chunks;
        for (int i = 0; i < 6; ++i) {
            chunks.push_back({"a#" + std::to_string(i), "a", "A", 0, 1, 0, 1, "text " + std::to_string(i)});
        }
        catalog = ChunkCatalog(chunks);
        std::vector<Candidate> cs;
        for (std::size_t r = 1; r <= 3; ++r) {
            Candidate c;
            c.candidate_id = "q1:" + std::to_string(r);
            c.query_id = "q1";
            c.rank = r;
            c.pool_size = 3;
            c.chunk_id = "a#" + std::to_string(r);
            cs.push_back(c);
        }
        store.enqueue(cs);
        server = std::make_unique<AnnotationServer>(store, catalog);
        port = server->bind_any_port("127.0.0.1");
        ASSERT_GT(port, 0);
        thread = std::thread([this] { server->listen_after_bind(); });
        server->wait_until_ready();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    void TearDown() override {
        server->stop();
        if (thread.joinable()) thread.join();
    }

    httplib::Result label(const std::string& body) {
        return client->Post("/api/label", body, "application/json");
    }

    AnnotationStore store;
    ChunkCatalog catalog;
    std::unique_ptr<AnnotationServer> server;
    std::unique_ptr<httplib::Client> client;
    std::thread thread;
    int port = -1;
};

}  // namespace

TEST_F(ServerTest, NextLabelProgressExport) {
    auto r = client->Get("/api/next?annotator=ann");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    auto c = Json::parse(r->body);
    EXPECT_EQ(c["candidate_id"], "q1:1");

    r = label(R"({"candidate_id":"q1:1","label":"Paraphrase","annotator":"ann","duration_seconds":9.5})");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(Json::parse(r->body)["label"], "Paraphrase");

    r = label(R"({"candidate_id":"q1:2","label":"NoMatch","annotator":"ann"})");
    ASSERT_EQ(r->status, 200);

    r = client->Get("/api/progress?query=q1");
    ASSERT_EQ(r->status, 200);
    auto p = Json::parse(r->body);
    EXPECT_EQ(p["annotated"], 2);
    EXPECT_EQ(p["counts"]["Paraphrase"], 1);
    EXPECT_DOUBLE_EQ(p["significant_density"].get<double>(), 0.5);
    EXPECT_EQ(p["decision"], "deepen");

    r = client->Get("/api/queries");
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(Json::parse(r->body).size(), 1u);

    r = client->Get("/api/export");
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(std::count(r->body.begin(), r->body.end(), '\n'), 2);
    EXPECT_NE(r->body.find("\"duration_seconds\":9.5"), std::string::npos);
}

TEST_F(ServerTest, EmptyQueueIs204) {
    for (int i = 0; i < 3; ++i) {
        auto r = client->Get(("/api/next?annotator=a" + std::to_string(i)).c_str());
        ASSERT_EQ(r->status, 200);
    }
    auto r = client->Get("/api/next?annotator=late");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 204);
}

TEST_F(ServerTest, BadRequests) {
    EXPECT_EQ(client->Get("/api/next")->status, 400);
    EXPECT_EQ(client->Get("/api/progress")->status, 400);
    EXPECT_EQ(label("not json")->status, 400);
    EXPECT_EQ(label(R"({"candidate_id":"q1:1"})")->status, 400);
    EXPECT_EQ(label(R"({"candidate_id":"q1:1","label":"Unsure","annotator":"a"})")->status, 400);
    EXPECT_EQ(label(R"({"candidate_id":"q1:1","label":"LexicalMatch","annotator":"a"})")->status, 400);
    EXPECT_EQ(label(R"({"candidate_id":"nope","label":"NoMatch","annotator":"a"})")->status, 404);
    EXPECT_EQ(client->Get("/api/context?chunk=zz")->status, 404);
    EXPECT_EQ(client->Get("/api/context?chunk=a%230&radius=x")->status, 400);
    EXPECT_EQ(store.history_size(), 0u);
}

TEST_F(ServerTest, ContextWindow) {
    auto r = client->Get("/api/context?chunk=a%233&radius=2");
    ASSERT_EQ(r->status, 200);
    auto j = Json::parse(r->body);
    ASSERT_EQ(j["chunks"].size(), 5u);
    EXPECT_EQ(j["chunks"][0]["chunk_id"], "a#1");
    EXPECT_EQ(j["chunks"][2]["is_hit"], true);
    EXPECT_EQ(j["chunks"][4]["text"], "text 5");
}
