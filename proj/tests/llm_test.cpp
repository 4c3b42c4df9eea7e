#include <atomic>
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "larf/annotator.hpp"
#include "larf/errors.hpp"
#include "larf/llm.hpp"
#include "support/mock_backend.hpp"

using namespace larf;
using testing::MockChatServer;

namespace {

LLMConfig config_for(const MockChatServer& server, int retries = 0) {
  LLMConfig config;
  config.base_url = server.base_url();
  config.api_key = "test-key";
  config.model_name = "mock-model";
  config.max_retries = retries;
  config.request_timeout = std::chrono::milliseconds(5000);
  return config;
}

ChatRequest sample_request() {
  ChatRequest r;
  r.model = "mock-model";
  r.messages = {{"system", "be brief"}, {"user", "hello"}};
  r.temperature = 0.25;
  r.max_tokens = 64;
  return r;
}

}  // namespace

TEST_CASE("wire format follows the chat-completion schema") {
  const auto body = to_wire(sample_request());
  CHECK(body == nlohmann::json::parse(R"({
    "model": "mock-model",
    "messages": [{"role": "system", "content": "be brief"}, {"role": "user", "content": "hello"}],
    "temperature": 0.25,
    "max_tokens": 64})"));
  ChatRequest anonymous = sample_request();
  anonymous.model.clear();
  CHECK_FALSE(to_wire(anonymous).contains("model"));
}

TEST_CASE("a successful completion returns the message content") {
  nlohmann::json seen;
  MockChatServer server([&](const nlohmann::json& body, const httplib::Request&) {
    seen = body;
    return std::make_pair(200, MockChatServer::completion_body("<strong>hello</strong>"));
  });
  HttpChatBackend backend(config_for(server));
  const auto reply = backend.complete(sample_request());
  CHECK(reply.content == "<strong>hello</strong>");
  CHECK(reply.raw["object"] == "chat.completion");
  CHECK(seen == to_wire(sample_request()));
  CHECK(server.authorization_headers() == std::vector<std::string>{"Bearer test-key"});
}

TEST_CASE("no authorization header is sent without a key") {
  MockChatServer server([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(200, MockChatServer::completion_body("x"));
  });
  auto config = config_for(server);
  config.api_key.clear();
  HttpChatBackend(config).complete(sample_request());
  CHECK(server.authorization_headers() == std::vector<std::string>{""});
}

TEST_CASE("a trailing slash on the base url is tolerated") {
  MockChatServer server([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(200, MockChatServer::completion_body("ok"));
  });
  auto config = config_for(server);
  config.base_url += "/";
  CHECK(HttpChatBackend(config).complete(sample_request()).content == "ok");
}

TEST_CASE("rejected keys raise an auth error without retrying") {
  for (int status : {401, 403}) {
    MockChatServer server([status](const nlohmann::json&, const httplib::Request&) {
      return std::make_pair(status, std::string(R"({"error":"bad key"})"));
    });
    HttpChatBackend backend(config_for(server, 2));
    CHECK_THROWS_AS(backend.complete(sample_request()), AuthError);
    CHECK(server.hits() == 1);
  }
}

TEST_CASE("server errors are retried and then reported") {
  MockChatServer server([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(500, std::string("{}"));
  });
  HttpChatBackend backend(config_for(server, 2));
  CHECK_THROWS_AS(backend.complete(sample_request()), TransportError);
  CHECK(server.hits() == 3);
}

TEST_CASE("a rate limit followed by success recovers") {
  std::atomic<int> calls{0};
  MockChatServer server([&](const nlohmann::json&, const httplib::Request&) {
    if (calls++ == 0) return std::make_pair(429, std::string("{}"));
    return std::make_pair(200, MockChatServer::completion_body("later"));
  });
  HttpChatBackend backend(config_for(server, 1));
  CHECK(backend.complete(sample_request()).content == "later");
  CHECK(server.hits() == 2);
}

TEST_CASE("client errors and malformed bodies are transport errors") {
  MockChatServer bad_request([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(400, std::string(R"({"error":"nope"})"));
  });
  CHECK_THROWS_AS(HttpChatBackend(config_for(bad_request, 2)).complete(sample_request()),
                  TransportError);
  CHECK(bad_request.hits() == 1);

  MockChatServer garbage([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(200, std::string("not json"));
  });
  CHECK_THROWS_AS(HttpChatBackend(config_for(garbage)).complete(sample_request()), TransportError);

  MockChatServer no_choices([](const nlohmann::json&, const httplib::Request&) {
    return std::make_pair(200, std::string(R"({"choices":[]})"));
  });
  CHECK_THROWS_AS(HttpChatBackend(config_for(no_choices)).complete(sample_request()),
                  TransportError);
}

TEST_CASE("an unreachable endpoint is a transport error") {
  int port = 0;
  {
    MockChatServer gone([](const nlohmann::json&, const httplib::Request&) {
      return std::make_pair(200, std::string("{}"));
    });
    port = gone.port();
  }
  LLMConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.max_retries = 1;
  config.request_timeout = std::chrono::milliseconds(2000);
  CHECK_THROWS_AS(HttpChatBackend(config).complete(sample_request()), TransportError);
}

TEST_CASE("in-flight requests stay within the cap") {
  std::atomic<int> current{0}, peak{0};
  MockChatServer server([&](const nlohmann::json&, const httplib::Request&) {
    const int now = ++current;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --current;
    return std::make_pair(200, MockChatServer::completion_body("ok"));
  });
  auto config = config_for(server);
  config.max_in_flight = 2;
  HttpChatBackend backend(config);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { backend.complete(sample_request()); });
  }
  for (auto& t : threads) t.join();
  CHECK(server.hits() == 8);
  CHECK(peak.load() <= 2);
  CHECK(peak.load() >= 1);
}

TEST_CASE("limiter permits are released") {
  InflightLimiter limiter(3);
  {
    InflightLimiter::Permit a(limiter), b(limiter);
    CHECK(limiter.in_flight() == 2);
  }
  CHECK(limiter.in_flight() == 0);
  CHECK(InflightLimiter(0).capacity() == 1);
}

TEST_CASE("configuration comes from the environment") {
  ::setenv("LARF_API_BASE", "http://localhost:9/v1", 1);
  ::setenv("LARF_MODEL", "local-model", 1);
  ::setenv("LARF_API_KEY", "secret", 1);
  const auto config = LLMConfig::from_env();
  CHECK(config.base_url == "http://localhost:9/v1");
  CHECK(config.model_name == "local-model");
  CHECK(config.api_key == "secret");
  ::unsetenv("LARF_API_BASE");
  ::unsetenv("LARF_MODEL");
  ::unsetenv("LARF_API_KEY");
  const auto defaults = LLMConfig::from_env();
  CHECK(defaults.base_url == "https://api.openai.com/v1");
  CHECK(defaults.model_name.empty());
  CHECK(defaults.api_key.empty());
  CHECK(defaults.max_in_flight == 4);
}

TEST_CASE("configuration validation") {
  LLMConfig config;
  config.max_retries = -1;
  CHECK_THROWS_AS(config.validate(), RangeError);
  config.max_retries = 0;
  config.request_timeout = std::chrono::milliseconds(0);
  CHECK_THROWS_AS(config.validate(), RangeError);
  config.request_timeout = std::chrono::milliseconds(1);
  config.max_in_flight = 0;
  CHECK_THROWS_AS(config.validate(), RangeError);
}

TEST_CASE("annotation over http against a replaying endpoint") {
  const std::string html = testing::read_data_file("fig1_annotated.html");
  MockChatServer server([&](const nlohmann::json& body, const httplib::Request&) {
    CHECK(body["messages"][0]["content"] == build_default_prompt());
    return std::make_pair(200, MockChatServer::completion_body(html));
  });
  const std::string source = testing::read_data_file("fig1_source.txt");
  const auto result = annotate(source, PromptSpec{}, config_for(server));
  CHECK(result.report.passed);
  CHECK(result.attempts == 1);
  REQUIRE(result.exchanges.size() == 1);
  CHECK(result.exchanges[0].request["messages"][1]["content"] == source);
  CHECK(result.exchanges[0].response["choices"][0]["message"]["content"] == html);
  CHECK_FALSE(result.exchanges[0].request.dump().find("test-key") != std::string::npos);
}
