#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/parallel.hpp"
#include "copilot/gateway/gateway.hpp"
#include "support.hpp"

using namespace copilot;
using namespace copilot::gateway;
using nlohmann::json;

namespace {

// Minimal chat-completions server counting requests. The first `fail_first`
// requests get HTTP 503.
class StubServer {
 public:
  explicit StubServer(int fail_first = 0) : fail_left_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      if (fail_left_ > 0) {
        --fail_left_;
        res.status = 503;
        return;
      }
      const auto body = json::parse(req.body);
      last_model_ = body.at("model").get<std::string>();
      const std::string prompt = body.at("messages").back().at("content").get<std::string>();
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}}}}.dump(),
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
  int calls() const { return calls_; }
  std::string last_model() const { return last_model_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::atomic<int> fail_left_;
  std::string last_model_;
};

ModelEndpoint endpoint_for(const StubServer& s, int retries = 3) {
  ModelEndpoint ep;
  ep.name = "stub";
  ep.base_url = s.url();
  ep.model = "stub-model";
  ep.max_retries = retries;
  ep.backoff_base = std::chrono::milliseconds(1);
  ep.timeout = std::chrono::milliseconds(5000);
  return ep;
}

}  // namespace

TEST(Fingerprint, StableAndSensitive) {
  const auto a = CompletionRequest::from_prompt("hello");
  EXPECT_EQ(fingerprint("m", a), fingerprint("m", a));
  EXPECT_NE(fingerprint("m", a), fingerprint("n", a));
  EXPECT_NE(fingerprint("m", a), fingerprint("m", CompletionRequest::from_prompt("hello!")));
  EXPECT_NE(fingerprint("m", a), fingerprint("m", CompletionRequest::from_prompt("hello", 10)));
  // Line endings and surrounding whitespace are normalized away.
  EXPECT_EQ(fingerprint("m", CompletionRequest::from_prompt("a\r\nb ")),
            fingerprint("m", CompletionRequest::from_prompt("a\nb")));
}

TEST(Scripted, FingerprintRule) {
  const auto req = CompletionRequest::from_prompt("what is the answer");
  Gateway gw;
  gw.register_endpoint("m", scripted_model({ScriptRule::fingerprint(fingerprint("m", req), "42")}));
  EXPECT_EQ(gw.complete("m", req), "42");
}

TEST(Scripted, SubstringOrderAndGap) {
  Gateway gw;
  gw.register_endpoint("m", scripted_model({ScriptRule::substring("SQL", "SELECT 1"),
                                            ScriptRule::substring("SQL query", "SELECT 2")}));
  EXPECT_EQ(gw.complete("m", "write a SQL query"), "SELECT 1");
  EXPECT_THROW(gw.complete("m", "nothing relevant"), ScriptGap);
}

TEST(GatewayTest, RejectsBadRequestsAndEndpoints) {
  Gateway gw;
  gw.register_endpoint("m", scripted_model({ScriptRule::fallback("x")}));
  EXPECT_THROW(gw.register_endpoint("m", scripted_model({ScriptRule::fallback("y")})), ConfigError);
  EXPECT_THROW(gw.complete("m", "   "), ConfigError);
  EXPECT_THROW(gw.complete("m", CompletionRequest::from_prompt("a", 0)), ConfigError);
  EXPECT_THROW(gw.complete("unknown", "a"), ConfigError);
  gw.mark_degraded("m", "credential missing");
  EXPECT_THROW(gw.complete("m", "a"), GatewayError);
}

TEST(GatewayTest, ReplayMissNeverCallsBackend) {
  Gateway gw(GatewayMode::Replay);
  gw.register_endpoint("m", scripted_model({ScriptRule::fallback("x")}));
  EXPECT_THROW(gw.complete("m", "hello"), ReplayMiss);
  EXPECT_EQ(gw.backend_calls("m"), 0u);
}

TEST(GatewayTest, RecordThenReplayFromFile) {
  testsupport::TempDir dir;
  const std::string path = dir.file("t/transcript.jsonl");
  {
    Gateway rec(GatewayMode::Record, Transcript::open(path));
    rec.register_endpoint("m", scripted_model({ScriptRule::dynamic(
                                   ScriptRule::Matcher::Any, "",
                                   [](const CompletionRequest& r) { return "len " + std::to_string(r.flattened().size()); })}));
    EXPECT_EQ(rec.complete("m", "abc"), "len 3");
    EXPECT_EQ(rec.complete("m", "abcd"), "len 4");
    EXPECT_EQ(rec.complete("m", "abc"), "len 3");
    EXPECT_EQ(rec.backend_calls("m"), 2u);
  }
  Gateway rep(GatewayMode::Replay, Transcript::open(path));
  EXPECT_EQ(rep.transcript().size(), 2u);
  EXPECT_EQ(rep.complete("m", "abcd"), "len 4");
  EXPECT_EQ(rep.transcript().reference(), path);
  EXPECT_THROW(rep.complete("m", "other"), ReplayMiss);
}

TEST(GatewayTest, ConcurrencyCapIsRespected) {
  std::atomic<int> inside{0}, peak{0};
  Gateway gw;
  gw.register_endpoint("m",
                       scripted_model({ScriptRule::dynamic(ScriptRule::Matcher::Any, "",
                                                           [&](const CompletionRequest&) {
                                                             const int now = ++inside;
                                                             int p = peak.load();
                                                             while (now > p && !peak.compare_exchange_weak(p, now)) {
                                                             }
                                                             std::this_thread::sleep_for(std::chrono::milliseconds(5));
                                                             --inside;
                                                             return std::string("ok");
                                                           })}),
                       2);
  parallel_for(24, 8, [&](std::size_t i) { gw.complete("m", "q" + std::to_string(i)); });
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(gw.backend_calls("m"), 24u);
}

TEST(HttpBackend, RecordModeDedupsAgainstStubServer) {
  StubServer server;
  Gateway gw(GatewayMode::Record);
  gw.register_endpoint("stub", std::make_shared<HttpChatBackend>(endpoint_for(server)));
  EXPECT_EQ(gw.complete("stub", "ping"), "echo: ping");
  EXPECT_EQ(gw.complete("stub", "ping"), "echo: ping");
  EXPECT_EQ(server.calls(), 1);
  EXPECT_EQ(server.last_model(), "stub-model");
  EXPECT_EQ(gw.transcript().size(), 1u);
}

TEST(HttpBackend, LiveModeCallsEveryTime) {
  StubServer server;
  Gateway gw(GatewayMode::Live);
  gw.register_endpoint("stub", std::make_shared<HttpChatBackend>(endpoint_for(server)));
  gw.complete("stub", "ping");
  gw.complete("stub", "ping");
  EXPECT_EQ(server.calls(), 2);
}

TEST(HttpBackend, RetriesTransientFailures) {
  StubServer server(2);
  HttpChatBackend backend(endpoint_for(server, 3));
  EXPECT_EQ(backend.complete(CompletionRequest::from_prompt("x"), ""), "echo: x");
  EXPECT_EQ(server.calls(), 3);
}

TEST(HttpBackend, GivesUpAfterRetries) {
  StubServer server(100);
  HttpChatBackend backend(endpoint_for(server, 2));
  EXPECT_THROW(backend.complete(CompletionRequest::from_prompt("x"), ""), GatewayError);
  EXPECT_EQ(server.calls(), 3);
}

TEST(HttpBackend, UnreachableHostIsGatewayError) {
  ModelEndpoint ep;
  ep.name = "down";
  ep.base_url = "http://127.0.0.1:1/v1/chat/completions";
  ep.max_retries = 1;
  ep.backoff_base = std::chrono::milliseconds(1);
  ep.timeout = std::chrono::milliseconds(500);
  HttpChatBackend backend(ep);
  try {
    backend.complete(CompletionRequest::from_prompt("x"), "");
    FAIL() << "expected GatewayError";
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.endpoint(), "down");
  }
}

TEST(HttpBackend, MissingCredentialIsGatewayError) {
  StubServer server;
  auto ep = endpoint_for(server);
  ep.auth_ref = "COPILOT_TEST_UNSET_TOKEN_VAR";
  HttpChatBackend backend(ep);
  EXPECT_THROW(backend.complete(CompletionRequest::from_prompt("x"), ""), GatewayError);
  EXPECT_EQ(server.calls(), 0);
}
