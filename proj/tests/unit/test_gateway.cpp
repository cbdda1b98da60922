#include <doctest.h>

#include <chrono>
#include <future>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "groundbot/core/errors.hpp"
#include "groundbot/gateway/event_log.hpp"
#include "groundbot/gateway/server.hpp"
#include "mock_llm_server.hpp"
#include "sse.hpp"
#include "support.hpp"

using namespace groundbot;
using namespace groundbot::gateway;
using nlohmann::json;

namespace {

GatewayConfig test_config() {
  GatewayConfig c;
  c.port = 0;
  c.fixture_dir = GROUNDBOT_FIXTURE_DIR;
  c.time_scale = 0;
  return c;
}

struct Client {
  explicit Client(int port) : http("127.0.0.1", port) { http.set_read_timeout(20, 0); }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto r = http.Post(path, body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto r = http.Get(path);
    REQUIRE(r);
    return {r->status, r->body.empty() || r->get_header_value("Content-Type") != "application/json"
                           ? json()
                           : json::parse(r->body)};
  }
  std::vector<test::SseEvent> events(const std::string& id, const std::string& query = "once=1",
                                     const httplib::Headers& headers = {}) {
    auto r = http.Get("/sessions/" + id + "/events?" + query, headers);
    REQUIRE(r);
    REQUIRE(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "text/event-stream");
    return test::parse_sse(r->body);
  }

  httplib::Client http;
};

const json kNicolObjects = json::array({"banana", "lemon", "pear", "red bowl"});

std::string create_nicol(Client& c) {
  auto [status, body] = c.post("/sessions", {{"backend", "scripted"},
                                             {"fixture", "nicol_session.jsonl"},
                                             {"objects", kNicolObjects}});
  REQUIRE(status == 201);
  return body["id"].get<std::string>();
}

bool is_execution_kind(const std::string& k) {
  return k == "UTTERANCE_START" || k == "UTTERANCE_END" || k == "ACTION_START" || k == "ACTION_END" ||
         k == "ANOMALY_FILTERED";
}

}  // namespace

TEST_CASE("event log keeps order, evicts oldest and reports the gap") {
  EventLog log(3, [] { return 5.0; });
  for (int i = 0; i < 5; ++i) log.append("K", std::to_string(i));
  CHECK(log.last_seq() == 5);
  auto all = log.since(0);
  REQUIRE(all.events.size() == 3);
  CHECK(all.missed == 2);
  CHECK(all.events[0].seq == 3);
  CHECK(all.events[2].payload == "4");
  CHECK(log.since(2).missed == 0);
  CHECK(log.since(4).events.size() == 1);
  CHECK(log.since(5).events.empty());
  CHECK(all.events[0].to_json() == R"({"seq":3,"kind":"K","payload":2,"ts":5.0})");
  CHECK(all.events[0].to_sse() == "id: 3\nevent: K\ndata: {\"seq\":3,\"kind\":\"K\",\"payload\":2,\"ts\":5.0}\n\n");
  CHECK_THROWS_AS(EventLog(0), PreconditionError);
}

TEST_CASE("event log wait wakes on append and on close") {
  EventLog log;
  auto start = std::chrono::steady_clock::now();
  CHECK(log.wait(0, std::chrono::milliseconds(30)).events.empty());
  CHECK(std::chrono::steady_clock::now() - start >= std::chrono::milliseconds(25));

  auto fut = std::async(std::launch::async, [&] { return log.wait(0, std::chrono::seconds(10)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  log.append("A", "{}");
  CHECK(fut.get().events.size() == 1);

  auto closed = std::async(std::launch::async, [&] { return log.wait(1, std::chrono::seconds(10)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  start = std::chrono::steady_clock::now();
  log.close();
  CHECK(closed.get().events.empty());
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(2));
}

TEST_CASE("gateway config file and environment overrides") {
  auto c = parse_gateway_config(R"({"port": 9001, "backend": {"kind": "scripted", "fixture": "x.jsonl"},
                                    "synth": {"base_latency": 0.3, "time_scale": 0.5},
                                    "world": {"give": 2.0, "wait_for_motion_end": false},
                                    "tracker": {"min_hits": 2, "vote_window": 5}})");
  CHECK(c.port == 9001);
  CHECK(c.backend.kind == BackendKind::scripted);
  CHECK(c.synth.base_latency == 0.3);
  CHECK(c.time_scale == 0.5);
  CHECK(c.world.motion.give == 2.0);
  CHECK_FALSE(c.execution.wait_for_motion_end);
  CHECK(c.tracker.min_hits == 2);
  CHECK(c.tracker.vote_window == 5);
  CHECK(c.tracker.max_misses == 10);
  CHECK_THROWS_AS(parse_gateway_config(R"({"tracker": {"iou_gate": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_gateway_config(R"({"prot": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_gateway_config(R"({"port": "x"})"), ConfigError);
  CHECK_THROWS_AS(parse_gateway_config(R"({"synth": {"time_scale": -1}})"), ConfigError);
  CHECK_THROWS_AS(parse_gateway_config("nope"), ConfigError);

  std::map<std::string, std::string> env{{"GROUNDBOT_PORT", "7000"},
                                         {"GROUNDBOT_BACKEND_URL", "http://llm:1234/api"},
                                         {"OPENAI_API_KEY", "sk-test"},
                                         {"GROUNDBOT_MODEL", "m1"},
                                         {"GROUNDBOT_SYNTH_BASE_LATENCY", "0.25"},
                                         {"GROUNDBOT_TRACKER_MAX_MISSES", "4"}};
  auto lookup = [&](const char* k) -> std::optional<std::string> {
    auto it = env.find(k);
    return it == env.end() ? std::nullopt : std::optional(it->second);
  };
  apply_env_overrides(c, lookup);
  CHECK(c.port == 7000);
  CHECK(c.backend.http.base_url == "http://llm:1234/api");
  CHECK(c.backend.http.api_key == "sk-test");
  CHECK(c.backend.completion.model_id == "m1");
  CHECK(c.synth.base_latency == 0.25);
  CHECK(c.tracker.max_misses == 4);
  env["GROUNDBOT_TIME_SCALE"] = "fast";
  CHECK_THROWS_AS(apply_env_overrides(c, lookup), ConfigError);
}

TEST_CASE("session spec validation") {
  auto cfg = test_config();
  CHECK_THROWS_AS(parse_session_spec(json{{"backend", "quantum"}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"colour", "red"}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"backend", "scripted"}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"backend", "scripted"}, {"fixture", "../secret"}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"backend", "scripted"}, {"fixture", "missing.jsonl"}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"time_scale", -2}}, cfg), ConfigError);
  CHECK_THROWS_AS(parse_session_spec(json{{"fixture", "nicol_session.jsonl"}}, cfg), ConfigError);
  auto spec = parse_session_spec(
      json{{"backend", "scripted"},
           {"script", json::array({{{"response", "Hi."}}})},
           {"objects", json::array({"lemon", {{"name", "pear"}, {"x", 0.1}, {"y", 0.2}}})}},
      cfg);
  REQUIRE(spec.script.size() == 1);
  REQUIRE(spec.objects.size() == 2);
  CHECK_FALSE(spec.objects[0].position.has_value());
  CHECK(spec.objects[1].position->y == 0.2);
}

TEST_CASE("scripted end-to-end run over HTTP") {
  Gateway gw(test_config());
  Client c(gw.start());
  auto id = create_nicol(c);

  auto [s0, state0] = c.get("/sessions/" + id + "/state");
  REQUIRE(s0 == 200);
  CHECK(state0["world"]["objects"].size() == 4);
  CHECK(state0["chat"]["status_pending"] == true);

  auto [s1, hi] = c.post("/sessions/" + id + "/utterance", {{"text", "Hi, who are you?"}});
  REQUIRE(s1 == 200);
  CHECK(hi["plan"]["segments"][0]["kind"] == "SAY");
  CHECK(hi["plan"]["segments"][0]["text"].get<std::string>().starts_with("I am NICOL"));

  const std::string request = "Point at the sour fruit and then give me the other yellow one";
  auto [s2, turn] = c.post("/sessions/" + id + "/utterance", {{"text", request}});
  REQUIRE(s2 == 200);
  auto segs = turn["plan"]["segments"];
  REQUIRE(segs.size() == 4);
  CHECK(segs[0]["action"] == "point");
  CHECK(segs[0]["argument"] == "lemon");
  CHECK(segs[2]["action"] == "give");
  CHECK(segs[2]["argument"] == "banana");
  CHECK(turn["failures"].empty());

  auto events = c.events(id, "after=" + std::to_string(turn["first_seq"].get<std::uint64_t>() - 1) + "&once=1");
  REQUIRE_FALSE(events.empty());
  CHECK(events.front().event == "TURN_START");
  CHECK(events.back().event == "TURN_END");
  CHECK(events.back().data["seq"] == turn["last_seq"]);

  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(std::stoull(events[i].id) == turn["first_seq"].get<std::uint64_t>() + i);
    CHECK(events[i].data["kind"] == events[i].event);
  }

  SUBCASE("execution events match a local replay of the same plan") {
    embodiment::World world;
    for (const auto& o : state0["world"]["objects"]) {
      world.mutate(embodiment::TableOp::add(o["name"], {o["x"].get<double>(), o["y"].get<double>()}));
    }
    auto fixture = llm::load_fixture(test::fixture_path("nicol_session.jsonl"));
    auto plan = protocol::parse_response(fixture[4].response, protocol::default_registry());
    auto expected = embodiment::execute_plan(plan, world, embodiment::MockSynthesizer({}, 0));
    std::vector<json> got;
    for (const auto& e : events) {
      if (is_execution_kind(e.event)) got.push_back(e.data["payload"]);
    }
    REQUIRE(got.size() == expected.events.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == json::parse(embodiment::event_to_json(expected.events[i])));
    }
  }

  SUBCASE("give moves the banana toward the user") {
    double before = -1, after = -1;
    bool giving = false;
    for (const auto& e : events) {
      if (e.event == "ACTION_START" && e.data["payload"]["action"] == "give") giving = true;
      if (e.event != "STATE") continue;
      for (const auto& o : e.data["payload"]["objects"]) {
        if (o["name"] != "banana") continue;
        (giving ? after : before) = o["y"].get<double>();
      }
    }
    CHECK(before >= 0);
    CHECK(after > before);
  }

  SUBCASE("transcript holds the whole conversation") {
    auto r = c.http.Get("/sessions/" + id + "/transcript");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->body.find(request) != std::string::npos);
  }
}

TEST_CASE("event stream resumes from a cursor") {
  Gateway gw(test_config());
  Client c(gw.start());
  auto id = create_nicol(c);
  auto all = c.events(id);
  REQUIRE(all.size() >= 5);
  CHECK(all[0].event == "SESSION_STARTED");
  auto tail = c.events(id, "after=3&once=1");
  REQUIRE(tail.size() == all.size() - 3);
  CHECK(tail[0].id == "4");
  auto via_header = c.events(id, "once=1", {{"Last-Event-ID", "3"}});
  CHECK(via_header.size() == tail.size());
  CHECK(c.get("/sessions/" + id + "/events?after=x").first == 400);
}

TEST_CASE("evicted events are reported as a gap") {
  auto cfg = test_config();
  cfg.event_buffer = 4;
  Gateway gw(cfg);
  Client c(gw.start());
  auto id = create_nicol(c);
  auto events = c.events(id);
  REQUIRE(events.size() == 5);
  CHECK(events[0].event == "GAP");
  CHECK(events[0].data["payload"]["missed"].get<int>() > 0);
}

TEST_CASE("live subscription sees the turn as it happens") {
  auto cfg = test_config();
  cfg.time_scale = 0.05;
  Gateway gw(cfg);
  Client c(gw.start());
  auto id = create_nicol(c);
  auto last = c.get("/sessions/" + id + "/state").second["last_seq"].get<std::uint64_t>();

  std::string stream;
  auto reader = std::async(std::launch::async, [&] {
    httplib::Client sub("127.0.0.1", gw.port());
    sub.set_read_timeout(20, 0);
    return sub.Get("/sessions/" + id + "/events?after=" + std::to_string(last),
                   [&](const char* data, std::size_t n) {
                     stream.append(data, n);
                     return stream.find("event: TURN_END") == std::string::npos;
                   });
  });
  auto [status, turn] = c.post("/sessions/" + id + "/utterance", {{"text", "Hi, who are you?"}});
  CHECK(status == 200);
  reader.wait();
  auto live = test::parse_sse(stream);
  auto replay = c.events(id, "after=" + std::to_string(last) + "&once=1");
  REQUIRE(live.size() <= replay.size());
  REQUIRE_FALSE(live.empty());
  for (std::size_t i = 0; i < live.size(); ++i) CHECK(live[i].data == replay[i].data);
  CHECK(live.back().event == "TURN_END");
}

TEST_CASE("a second utterance during a turn gets 409") {
  auto cfg = test_config();
  cfg.time_scale = 1.0;
  Gateway gw(cfg);
  Client c(gw.start());
  auto [status, body] = c.post("/sessions", {{"backend", "scripted"},
                                             {"priming", false},
                                             {"script", json::array({{{"response", "One moment. Still talking."}},
                                                                     {{"response", "Second."}}})}});
  REQUIRE(status == 201);
  auto id = body["id"].get<std::string>();
  auto first = std::async(std::launch::async, [&] {
    Client other(gw.port());
    return other.post("/sessions/" + id + "/utterance", {{"text", "Talk to me."}}).first;
  });
  bool busy = false;
  for (int i = 0; i < 200 && !busy; ++i) {
    busy = c.get("/sessions/" + id + "/state").second["busy"].get<bool>();
    if (!busy) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  REQUIRE(busy);
  CHECK(c.get("/sessions/" + id + "/state").second["chat"].is_null());
  CHECK(c.post("/sessions/" + id + "/utterance", {{"text", "Hello?"}}).first == 409);
  CHECK(c.http.Get("/sessions/" + id + "/transcript")->status == 409);
  CHECK(first.get() == 200);
  CHECK(c.post("/sessions/" + id + "/utterance", {{"text", "Hello?"}}).first == 200);
}

TEST_CASE("world edits and gestures reach the next status update") {
  Gateway gw(test_config());
  Client c(gw.start());
  auto [status, body] = c.post(
      "/sessions",
      {{"backend", "scripted"},
       {"priming", false},
       {"object_facts", false},
       {"script", json::array({{{"prompt", "The list of objects currently located on the table in front of you is "
                                           "[lemon].\nThe user has just made a wave gesture."},
                                {"response", "Understood."}},
                               {{"match_kind", "exact"},
                                {"prompt", "Respond in first person to you, the NICOL robot, being asked: Hello"},
                                {"response", "Hello! <look(lemon)> I see a lemon."}}})}});
  REQUIRE(status == 201);
  auto id = body["id"].get<std::string>();

  auto [ws, world] = c.post("/sessions/" + id + "/world", {{"op", "add"}, {"name", "lemon"}});
  REQUIRE(ws == 200);
  CHECK(world["added"] == json::array({"lemon"}));
  CHECK(world["state"]["chat"]["current_objects"] == json::array({"lemon"}));

  auto [gs, g] = c.post("/sessions/" + id + "/gesture", {{"gesture", "Wave"}});
  REQUIRE(gs == 200);
  CHECK(g["state"]["chat"]["pending_gestures"] == json::array({"wave"}));
  CHECK(g["state"]["chat"]["pending_status"].get<std::string>().find("wave gesture") != std::string::npos);

  auto [us, turn] = c.post("/sessions/" + id + "/utterance", {{"text", "Hello"}});
  CHECK(us == 200);
  CHECK(turn["plan"]["segments"][1]["action"] == "look");

  CHECK(c.post("/sessions/" + id + "/gesture", {{"gesture", "dance"}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/world", {{"op", "remove"}, {"name", "apple"}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/world", {{"op", "add"}, {"name", "lemon"}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/world", {{"op", "add"}, {"name", "pear"}, {"x", 9}, {"y", 0}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/world", {{"op", "move"}, {"name", "lemon"}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/world", {{"op", "fly"}, {"name", "lemon"}}).first == 400);
  auto [ms, moved] = c.post("/sessions/" + id + "/world", {{"op", "move"}, {"name", "lemon"}, {"x", 0.2}, {"y", 0.7}});
  CHECK(ms == 200);
  CHECK(moved["state"]["world"]["objects"][0]["y"] == 0.7);
  auto [rs, removed] = c.post("/sessions/" + id + "/world", {{"op", "remove"}, {"name", "lemon"}});
  CHECK(rs == 200);
  CHECK(removed["removed"] == json::array({"lemon"}));
}

TEST_CASE("posted detections reach the table through the tracker") {
  auto cfg = test_config();
  cfg.tracker.max_misses = 2;
  Gateway gw(cfg);
  Client c(gw.start());
  auto [status, body] = c.post("/sessions", {{"backend", "scripted"},
                                             {"priming", false},
                                             {"object_facts", false},
                                             {"script", json::array({{{"response", "Understood."}}})}});
  REQUIRE(status == 201);
  auto id = body["id"].get<std::string>();
  const json lemon{{"label", "lemon"}, {"bbox", {0.4, 0.4, 0.1, 0.1}}, {"score", 0.9}};

  // min_hits is 3: two frames leave the track tentative.
  auto [s1, r1] = c.post("/sessions/" + id + "/detections", {{"frames", {{lemon}, {lemon}}}});
  REQUIRE(s1 == 200);
  CHECK(r1["added"].empty());
  auto [s2, r2] = c.post("/sessions/" + id + "/detections", {{"detections", {lemon}}});
  REQUIRE(s2 == 200);
  CHECK(r2["added"] == json::array({"lemon"}));
  CHECK(r2["state"]["world"]["objects"][0]["name"] == "lemon");
  CHECK(r2["state"]["chat"]["current_objects"] == json::array({"lemon"}));

  // A dropout within max_misses keeps the object; a longer one removes it.
  auto [s3, r3] = c.post("/sessions/" + id + "/detections", {{"frames", {json::array(), json::array(), {lemon}}}});
  REQUIRE(s3 == 200);
  CHECK(r3["removed"].empty());
  auto [s4, r4] = c.post("/sessions/" + id + "/detections",
                         {{"frames", {json::array(), json::array(), json::array()}}});
  REQUIRE(s4 == 200);
  CHECK(r4["removed"] == json::array({"lemon"}));
  CHECK(r4["state"]["world"]["objects"].empty());

  CHECK(c.post("/sessions/" + id + "/detections", {{"frames", {{{{"label", "x"}}}}}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/detections", {{"frames", 3}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/detections", json::object()).first == 400);
  CHECK(c.post("/sessions/nope/detections", {{"frames", json::array()}}).first == 404);
}

TEST_CASE("error statuses") {
  test::MockLlmServer llm([](const json& body) -> std::pair<int, std::string> {
    if (body["model"] == "nope") return {404, R"({"error": {"message": "model nope does not exist"}})"};
    return {200, test::MockLlmServer::completion("Understood.")};
  });
  auto cfg = test_config();
  cfg.backend.http.base_url = llm.url();
  cfg.max_sessions = 3;
  Gateway gw(cfg);
  Client c(gw.start());

  auto [bad_model, err] = c.post("/sessions", {{"model", "nope"}});
  CHECK(bad_model == 502);
  CHECK(err["status"] == 404);
  CHECK(err["body"].get<std::string>().find("does not exist") != std::string::npos);

  auto [ok, created] = c.post("/sessions", json::object());
  CHECK(ok == 201);
  auto id = created["id"].get<std::string>();
  CHECK(created["backend"] == "live");

  CHECK(c.post("/sessions", {{"backend", "nope"}}).first == 400);
  CHECK(c.post("/sessions", {{"objects", json::array({"a", "a"})}}).first == 400);
  auto raw = c.http.Post("/sessions", "{not json", "application/json");
  CHECK(raw->status == 400);

  for (const std::string path : {"/utterance", "/world", "/gesture"}) {
    CHECK(c.post("/sessions/missing" + path, json::object()).first == 404);
  }
  CHECK(c.get("/sessions/missing/state").first == 404);
  CHECK(c.http.Get("/sessions/missing/events")->status == 404);
  CHECK(c.post("/sessions/" + id + "/utterance", {{"text", "   "}}).first == 400);
  CHECK(c.post("/sessions/" + id + "/utterance", json::object()).first == 400);

  CHECK(c.post("/sessions", json::object()).first == 201);
  CHECK(c.post("/sessions", json::object()).first == 201);
  CHECK(c.post("/sessions", json::object()).first == 503);

  CHECK(c.get("/health").second["sessions"] == 3);
  CHECK(c.http.Delete("/sessions/" + id)->status == 204);
  CHECK(c.get("/sessions/" + id + "/state").first == 404);
  CHECK(c.http.Delete("/sessions/" + id)->status == 404);
}
