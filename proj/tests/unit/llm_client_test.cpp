#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "synspace/error.hpp"
#include "synspace/llm_client.hpp"

using namespace synspace;
namespace fs = std::filesystem;

namespace {

// Local OpenAI-style stub. `mode` selects the reply.
class StubServer {
 public:
  enum class Mode { Ok, Malformed, RateLimitedOnce, AlwaysRateLimited };

  explicit StubServer(Mode mode) : mode_(mode) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_body_ = req.body;
      if (mode_ == Mode::AlwaysRateLimited || (mode_ == Mode::RateLimitedOnce && requests_ == 1)) {
        res.status = 429;
        res.set_header("Retry-After", "0");
        return;
      }
      if (mode_ == Mode::Malformed) {
        res.set_content("<html>oops</html>", "text/html");
        return;
      }
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"sunflower, helianthus, sun flower"}}]})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int requests() const { return requests_; }
  const std::string& last_body() const { return last_body_; }

 private:
  Mode mode_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
  std::string last_body_;
};

fs::path fresh_cache_path(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("synspace_llm_" + name + ".jsonl");
  fs::remove(p);
  return p;
}

}  // namespace

TEST(LlmClient, FreshPromptIsPersistedThenCached) {
  StubServer stub(StubServer::Mode::Ok);
  const auto path = fresh_cache_path("fresh");
  const DecodingParams params{"stub-model", 0.0, 64};
  {
    LlmClient client(LlmEndpoint{stub.url(), "secret"}, std::make_shared<LlmCache>(path));
    const auto first = client.query("prompt one", params);
    EXPECT_EQ(first, (std::vector<std::string>{"sunflower", "helianthus", "sun flower"}));
    EXPECT_EQ(client.network_calls(), 1u);
    EXPECT_EQ(client.query("prompt one", params), first);
    EXPECT_EQ(client.network_calls(), 1u);
    EXPECT_EQ(client.cache_hits(), 1u);
    EXPECT_NE(stub.last_body().find("\"prompt one\""), std::string::npos);
  }
  // A new client over the same file never touches the network.
  LlmClient offline(std::nullopt, std::make_shared<LlmCache>(path));
  EXPECT_EQ(offline.query("prompt one", params).size(), 3u);
  EXPECT_EQ(offline.network_calls(), 0u);
  EXPECT_EQ(offline.cache_hits(), 1u);
  EXPECT_EQ(stub.requests(), 1);
  // Different decoding parameters are a different key.
  EXPECT_THROW(offline.query("prompt one", DecodingParams{"stub-model", 0.7, 64}), Error);
}

TEST(LlmClient, MalformedBodyKeepsRawText) {
  StubServer stub(StubServer::Mode::Malformed);
  LlmClient client(LlmEndpoint{stub.url()}, nullptr);
  try {
    client.query("p", {});
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("<html>oops</html>"), std::string::npos);
  }
}

TEST(LlmClient, HonoursRetryAfter) {
  StubServer stub(StubServer::Mode::RateLimitedOnce);
  LlmClient client(LlmEndpoint{stub.url()}, nullptr);
  EXPECT_EQ(client.query("p", {}).size(), 3u);
  EXPECT_EQ(client.network_calls(), 2u);
}

TEST(LlmClient, GivesUpWhenStillRateLimited) {
  StubServer stub(StubServer::Mode::AlwaysRateLimited);
  LlmClient client(LlmEndpoint{stub.url(), "", 2}, nullptr);
  try {
    client.query("p", {});
    FAIL() << "expected RateLimited";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RateLimited);
  }
  EXPECT_EQ(stub.requests(), 3);
}

TEST(LlmClient, UnreachableEndpointIsNetworkError) {
  LlmClient client(LlmEndpoint{"http://127.0.0.1:1/v1/chat/completions"}, nullptr);
  try {
    client.query("p", {});
    FAIL() << "expected NetworkError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NetworkError);
  }
}

TEST(CompletionText, AcceptedShapes) {
  EXPECT_EQ(extract_completion_text(R"({"choices":[{"message":{"content":"a"}}]})"), "a");
  EXPECT_EQ(extract_completion_text(R"({"text":"b"})"), "b");
  EXPECT_EQ(extract_completion_text(R"({"content":[{"type":"text","text":"c"}]})"), "c");
  EXPECT_THROW(extract_completion_text(R"({"choices":[]})"), Error);
}

TEST(LlmCache, KeyDependsOnPromptAndParams) {
  const DecodingParams a{"m", 0.0, 10};
  EXPECT_EQ(llm_cache_key("x", a), llm_cache_key("x", a));
  EXPECT_NE(llm_cache_key("x", a), llm_cache_key("y", a));
  EXPECT_NE(llm_cache_key("x", a), llm_cache_key("x", DecodingParams{"m", 0.0, 11}));
  EXPECT_EQ(llm_cache_key("x", a).size(), 64u);
}

TEST(LlmCache, ConcurrentReadersDuringAppends) {
  const auto path = fresh_cache_path("concurrent");
  LlmCache cache(path);
  std::atomic<bool> done{false};
  std::thread reader([&] {
    while (!done) (void)cache.lookup("k0");
  });
  for (int i = 0; i < 50; ++i) cache.append({"k" + std::to_string(i), "p", {}, "r", {"r"}});
  done = true;
  reader.join();
  EXPECT_EQ(cache.size(), 50u);
  EXPECT_EQ(LlmCache(path).size(), 50u);
}
