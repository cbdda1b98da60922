#include <doctest.h>

#include <atomic>

#include "groundbot/core/errors.hpp"
#include "groundbot/llm/http_backend.hpp"
#include "groundbot/llm/scripted_backend.hpp"
#include "groundbot/llm/tokenizer.hpp"
#include "mock_llm_server.hpp"

using namespace groundbot;
using namespace groundbot::llm;

namespace {

std::vector<WireMessage> convo(std::string last) {
  return {{"system", "You are a robot."}, {"user", std::move(last)}};
}

BackendErrorKind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const BackendError& e) {
    return e.kind();
  }
  FAIL("expected BackendError");
  return BackendErrorKind::transport;
}

}  // namespace

TEST_CASE("token counter") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("Sure, I can show you the banana.") == 9);
  CHECK(tokenize("Sure, I can show you the banana.") ==
        std::vector<std::string>{"Sure", ",", "I", "can", "show", "you", "the", "banana", "."});
  CHECK(count_tokens("that's a good one!") == 5);
  CHECK(count_tokens("<point(banana)>") == 6);
  CHECK(count_tokens("a b c") == 3);
}

TEST_CASE("token counts are additive across a space join") {
  const std::vector<std::string> samples{"", "Hi.", "it's 3.50", "<express(sadness)>", "x'", "'y", "a\tb"};
  for (const auto& a : samples) {
    for (const auto& b : samples) CHECK(count_tokens(a) + count_tokens(b) == count_tokens(a + " " + b));
  }
}

TEST_CASE("scripted backend replays entries in order") {
  ScriptedBackend backend({{MatchKind::exact, "Respond in first person to you, the NICOL robot, being asked: Can you show me the banana?",
                            "Sure, I can show you the banana. <point(banana)> Here it is, on the table in front of me.\n"},
                           {MatchKind::normalized_prefix, "  ACKNOWLEDGE this", "Understood."}});
  auto a = backend.complete(convo("Respond in first person to you, the NICOL robot, being asked: Can you show me the banana?"), {});
  CHECK(a == "Sure, I can show you the banana. <point(banana)> Here it is, on the table in front of me.");
  CHECK(backend.complete(convo("Acknowledge   this updated status information."), {}) == "Understood.");
  CHECK(backend.remaining() == 0);
  CHECK(error_kind([&] { backend.complete(convo("more"), {}); }) == BackendErrorKind::fixture_exhausted);
}

TEST_CASE("scripted backend reports mismatches with both texts") {
  ScriptedBackend backend({{MatchKind::exact, "expected prompt", "x"}});
  try {
    backend.complete(convo("actual prompt"), {});
    FAIL("no throw");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::fixture_mismatch);
    CHECK(std::string(e.what()).find("expected prompt") != std::string::npos);
    CHECK(std::string(e.what()).find("actual prompt") != std::string::npos);
  }
  CHECK(backend.consumed() == 0);
}

TEST_CASE("empty fixture is exhausted immediately") {
  ScriptedBackend backend({});
  CHECK(error_kind([&] { backend.complete(convo("hi"), {}); }) == BackendErrorKind::fixture_exhausted);
}

TEST_CASE("completion preconditions") {
  ScriptedBackend backend({{MatchKind::normalized_prefix, "", "x"}});
  CHECK_THROWS_AS(backend.complete(std::vector<WireMessage>{}, {}), PreconditionError);
  CHECK_THROWS_AS(backend.complete(std::vector<WireMessage>{{"user", "hi"}}, {}), PreconditionError);
}

TEST_CASE("fixture files") {
  auto f = parse_fixture(
      "{\"match_kind\":\"exact\",\"prompt\":\"a\",\"response\":\"b\"}\n\n{\"prompt\":\"c\",\"response\":\"d\"}\n");
  REQUIRE(f.size() == 2);
  CHECK(f[0].match == MatchKind::exact);
  CHECK(f[1].match == MatchKind::normalized_prefix);
  CHECK(parse_fixture(serialize_fixture(f)).size() == 2);
  CHECK_THROWS(parse_fixture("{\"prompt\":\"x\"}"));
  CHECK_THROWS(parse_fixture("{\"match_kind\":\"regex\",\"response\":\"x\"}"));
  CHECK_THROWS(parse_fixture("not json"));
}

TEST_CASE("http backend speaks the chat-completions wire format") {
  test::MockLlmServer server([](const nlohmann::json&) { return std::pair{200, test::MockLlmServer::completion("Hello there.  \n")}; });
  HttpChatBackend backend({server.url(), "secret", 0, 0.0});
  CompletionParams params;
  params.model_id = "gpt-4-0613";
  auto answer = backend.complete(convo("Hi, who are you?"), params);
  CHECK(answer == "Hello there.");
  auto reqs = server.requests();
  REQUIRE(reqs.size() == 1);
  CHECK(reqs[0]["model"] == "gpt-4-0613");
  CHECK(reqs[0]["temperature"].get<double>() == doctest::Approx(0.2));
  CHECK(reqs[0]["max_tokens"] == 512);
  CHECK(reqs[0]["messages"][0]["role"] == "system");
  CHECK(reqs[0]["messages"][1]["content"] == "Hi, who are you?");
  CHECK(server.auth_headers()[0] == "Bearer secret");
  CHECK(backend.endpoint_path() == "/v1/chat/completions");
}

TEST_CASE("http backend error mapping") {
  SUBCASE("context overflow") {
    test::MockLlmServer server([](const nlohmann::json&) {
      return std::pair{400, std::string(R"({"error":{"code":"context_length_exceeded","message":"This model's maximum context length is 4097 tokens."}})")};
    });
    HttpChatBackend backend({server.url(), "", 2, 0.0});
    CHECK(error_kind([&] { backend.complete(convo("x"), {}); }) == BackendErrorKind::context_overflow);
    CHECK(server.requests().size() == 1);
  }
  SUBCASE("client error is remote and not retried") {
    test::MockLlmServer server([](const nlohmann::json&) { return std::pair{404, std::string(R"({"error":"model not found"})")}; });
    HttpChatBackend backend({server.url(), "", 2, 0.0});
    try {
      backend.complete(convo("x"), {});
      FAIL("no throw");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendErrorKind::remote);
      CHECK(e.status() == 404);
      CHECK(e.body().find("model not found") != std::string::npos);
    }
    CHECK(server.requests().size() == 1);
  }
  SUBCASE("transient server errors are retried") {
    std::atomic<int> calls{0};
    test::MockLlmServer server([&](const nlohmann::json&) {
      if (calls++ < 2) return std::pair{503, std::string("{}")};
      return std::pair{200, test::MockLlmServer::completion("ok")};
    });
    HttpChatBackend backend({server.url(), "", 2, 0.0});
    CHECK(backend.complete(convo("x"), {}) == "ok");
    CHECK(calls == 3);
  }
  SUBCASE("malformed success body") {
    test::MockLlmServer server([](const nlohmann::json&) { return std::pair{200, std::string("{\"choices\":[]}")}; });
    HttpChatBackend backend({server.url(), "", 0, 0.0});
    CHECK(error_kind([&] { backend.complete(convo("x"), {}); }) == BackendErrorKind::remote);
  }
}

TEST_CASE("http backend transport failure after retries") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpChatBackend backend({"http://127.0.0.1:" + std::to_string(port), "", 1, 0.0});
  CompletionParams params;
  params.timeout_s = 1.0;
  CHECK(error_kind([&] { backend.complete(convo("x"), params); }) == BackendErrorKind::transport);
}

TEST_CASE("backend URL handling") {
  CHECK(HttpChatBackend({"http://host:1/v1"}).endpoint_path() == "/v1/chat/completions");
  CHECK(HttpChatBackend({"http://host:1/api/"}).endpoint_path() == "/api/v1/chat/completions");
  CHECK_THROWS_AS(HttpChatBackend({"host:1"}), ConfigError);
  CHECK_THROWS_AS(HttpChatBackend({"ftp://host"}), ConfigError);
}
