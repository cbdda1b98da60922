#include <pthread.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "groundbot/chat/session.hpp"
#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/eval/game.hpp"
#include "groundbot/eval/metrics.hpp"
#include "groundbot/gateway/runtime.hpp"
#include "groundbot/gateway/server.hpp"
#include "groundbot/llm/http_backend.hpp"
#include "groundbot/llm/scripted_backend.hpp"
#include "groundbot/protocol/prompts.hpp"

using namespace groundbot;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

std::string text_or_stdin(const std::string& text) {
  if (text != "-") return text;
  return std::string(std::istreambuf_iterator<char>(std::cin), {});
}

struct ServeOptions {
  std::string config;
  std::string host;
  int port = -1;
  std::string fixture_dir;
  std::string ui_dir;
  double time_scale = -1;
};

int serve(const ServeOptions& o) {
  gateway::GatewayConfig cfg;
  if (!o.config.empty()) cfg = gateway::load_gateway_config(o.config);
  gateway::apply_env_overrides(cfg);
  if (!o.host.empty()) cfg.host = o.host;
  if (o.port >= 0) cfg.port = o.port;
  if (!o.fixture_dir.empty()) cfg.fixture_dir = o.fixture_dir;
  if (!o.ui_dir.empty()) cfg.ui_dir = o.ui_dir;
  if (o.time_scale >= 0) cfg.time_scale = o.time_scale;
  // Server threads inherit the blocked mask; the main thread waits for the signal.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  gateway::Gateway gw(cfg);
  int port = gw.start();
  std::cerr << "serving on http://" << cfg.host << ":" << port << " (default backend "
            << gateway::to_string(cfg.backend.kind) << ")" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down" << std::endl;
  gw.stop();
  return 0;
}

struct ChatEvalOptions {
  std::string transcripts;
  std::string annotations;
  std::string out;
  std::string model = "model";
};

int eval_chat(const ChatEvalOptions& o) {
  auto transcripts = eval::load_transcript_dir(o.transcripts);
  if (!o.annotations.empty()) eval::apply_annotations(transcripts, read_file(o.annotations));
  auto report = eval::chat_report(transcripts);
  auto csv = eval::chat_csv({{o.model, report}});
  if (o.out.empty() || o.out == "-") {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
  }
  std::cerr << report.transcripts << " transcripts over " << report.prompts << " prompts, " << report.anomalies
            << " anomalies\n";
  return 0;
}

struct GameEvalOptions {
  std::string objects;
  std::string fixture;
  std::string annotations;
  std::string out;
  std::string logs;
  int trials = 5;
};

int eval_game(const GameEvalOptions& o) {
  auto table = eval::load_attribute_table(o.objects);
  eval::GameConfig cfg;
  cfg.objects = table.names();
  cfg.trials_per_object = o.trials;
  eval::SessionFactory factory;
  if (!o.fixture.empty()) {
    factory = eval::fixture_session_factory(eval::load_game_fixture(o.fixture), chat::wall_clock);
  } else {
    gateway::GatewayConfig gc;
    gateway::apply_env_overrides(gc);
    auto backend = std::make_shared<llm::HttpChatBackend>(gc.backend.http);
    factory = [backend, gc](const std::string&, int) {
      chat::SessionConfig sc = gc.session;
      sc.completion = gc.backend.completion;
      return chat::ChatSession::start(sc, protocol::default_registry(), protocol::nicol_profile(), backend);
    };
  }
  eval::GameOverrides overrides;
  if (!o.annotations.empty()) overrides = eval::parse_game_overrides(read_file(o.annotations));
  auto logs = eval::run_guess_my_object(factory, cfg, eval::AttributeJudge(table), overrides);
  auto csv = eval::game_csv(eval::game_report(logs, cfg.objects));
  if (o.out.empty() || o.out == "-") {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
  }
  if (!o.logs.empty()) write_file(o.logs, eval::game_logs_to_jsonl(logs));
  return 0;
}

struct CollectOptions {
  std::string prompts;
  std::string fixture;
  std::string out;
  int trials = 5;
};

// Runs every prompt on a fresh session per trial and writes one JSONL file of
// transcripts, ready for `eval chat`.
int eval_collect(const CollectOptions& o) {
  auto doc = nlohmann::json::parse(read_file(o.prompts));
  std::vector<std::string> objects = doc.value("objects", std::vector<std::string>{});
  gateway::GatewayConfig gc;
  gateway::apply_env_overrides(gc);
  std::shared_ptr<llm::LlmBackend> backend;
  if (!o.fixture.empty()) {
    backend = std::make_shared<llm::ScriptedBackend>(llm::load_fixture(o.fixture));
  } else {
    backend = std::make_shared<llm::HttpChatBackend>(gc.backend.http);
  }
  std::vector<eval::Transcript> out;
  for (const auto& p : doc.at("prompts")) {
    for (int trial = 0; trial < o.trials; ++trial) {
      chat::SessionConfig sc = gc.session;
      sc.completion = gc.backend.completion;
      auto session = chat::ChatSession::start(sc, protocol::default_registry(), protocol::nicol_profile(), backend);
      session.ingest_world_diff(WorldDiff{objects, {}, {}});
      auto plan = session.user_turn(p.at("text").get<std::string>());
      const auto& answer = session.messages().back().text;
      out.push_back(eval::make_transcript(p.at("id").get<std::string>(), trial, answer));
      std::cerr << p.at("id").get<std::string>() << "#" << trial << " done\n";
    }
  }
  std::filesystem::create_directories(o.out);
  write_file((std::filesystem::path(o.out) / "transcripts.jsonl").string(), eval::transcripts_to_jsonl(out));
  return 0;
}

int print_prompt(const std::string& kind, const std::vector<std::string>& args) {
  auto profile = protocol::nicol_profile();
  if (kind == "system") {
    std::cout << protocol::render_system_prompt(profile, protocol::default_registry());
  } else if (kind == "priming") {
    std::cout << protocol::render_priming_query();
  } else if (kind == "user") {
    if (args.size() != 1) throw PreconditionError("prompt user takes one utterance");
    std::cout << protocol::render_user_prompt(profile, args[0]);
  } else if (kind == "facts") {
    std::cout << protocol::render_object_facts_query(args);
  } else {
    throw PreconditionError("unknown prompt kind '" + kind + "' (system, priming, user, facts)");
  }
  std::cout << "\n";
  return 0;
}

int parse_answer(const std::string& text) {
  auto plan = protocol::parse_response(text_or_stdin(text), protocol::default_registry());
  std::cout << gateway::plan_to_json(plan).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded conversational robot agent: gateway server, prompt tools and evaluation harness"};
  app.require_subcommand(1);
  std::string level;
  app.add_option("--log-level", level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  serve_cmd->add_option("--config", serve_opts.config, "Gateway config JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve_opts.host, "Bind address");
  serve_cmd->add_option("--port", serve_opts.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--fixture-dir", serve_opts.fixture_dir, "Directory of scripted fixtures");
  serve_cmd->add_option("--ui-dir", serve_opts.ui_dir, "Static UI files to serve at /");
  serve_cmd->add_option("--time-scale", serve_opts.time_scale, "Real-time factor for playback, 0 = instant")
      ->check(CLI::NonNegativeNumber);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluation harness");
  eval_cmd->require_subcommand(1);

  ChatEvalOptions chat_opts;
  auto* chat_cmd = eval_cmd->add_subcommand("chat", "Chat analysis table from transcripts");
  chat_cmd->add_option("--transcripts", chat_opts.transcripts, "Directory of *.jsonl transcripts")
      ->required()
      ->check(CLI::ExistingDirectory);
  chat_cmd->add_option("--annotations", chat_opts.annotations, "Annotation JSONL")->check(CLI::ExistingFile);
  chat_cmd->add_option("--out", chat_opts.out, "CSV output path, - for stdout");
  chat_cmd->add_option("--model", chat_opts.model, "Row label in the table");

  GameEvalOptions game_opts;
  auto* game_cmd = eval_cmd->add_subcommand("game", "Play Guess My Object and tabulate the results");
  game_cmd->add_option("--objects", game_opts.objects, "Attribute table JSON")->required()->check(CLI::ExistingFile);
  game_cmd->add_option("--fixture", game_opts.fixture, "Scripted game fixture (live backend when omitted)")
      ->check(CLI::ExistingFile);
  game_cmd->add_option("--trials", game_opts.trials, "Trials per object")->check(CLI::PositiveNumber);
  game_cmd->add_option("--annotations", game_opts.annotations, "Manual reasoning/agreement judgements JSONL")
      ->check(CLI::ExistingFile);
  game_cmd->add_option("--out", game_opts.out, "CSV output path, - for stdout");
  game_cmd->add_option("--logs", game_opts.logs, "Write per-trial game logs as JSONL");

  CollectOptions collect_opts;
  auto* collect_cmd = eval_cmd->add_subcommand("collect", "Run the prompt set and save transcripts");
  collect_cmd->add_option("--prompts", collect_opts.prompts, "Prompt set JSON")->required()->check(CLI::ExistingFile);
  collect_cmd->add_option("--fixture", collect_opts.fixture, "Scripted backend fixture")->check(CLI::ExistingFile);
  collect_cmd->add_option("--trials", collect_opts.trials, "Trials per prompt")->check(CLI::PositiveNumber);
  collect_cmd->add_option("--out", collect_opts.out, "Output directory")->required();

  std::string prompt_kind;
  std::vector<std::string> prompt_args;
  auto* prompt_cmd = app.add_subcommand("prompt", "Print a rendered prompt");
  prompt_cmd->add_option("kind", prompt_kind, "system, priming, user or facts")->required();
  prompt_cmd->add_option("args", prompt_args, "Utterance or object names");

  std::string parse_text;
  auto* parse_cmd = app.add_subcommand("parse", "Parse an LLM answer into a response plan");
  parse_cmd->add_option("text", parse_text, "Answer text, - for stdin")->required();

  CLI11_PARSE(app, argc, argv);
  if (level == "debug") log::set_level(log::Level::debug);
  if (level == "info") log::set_level(log::Level::info);
  if (level == "warn") log::set_level(log::Level::warn);
  if (level == "error") log::set_level(log::Level::error);
  if (level == "off") log::set_level(log::Level::off);

  try {
    if (*serve_cmd) return serve(serve_opts);
    if (*chat_cmd) return eval_chat(chat_opts);
    if (*game_cmd) return eval_game(game_opts);
    if (*collect_cmd) return eval_collect(collect_opts);
    if (*prompt_cmd) return print_prompt(prompt_kind, prompt_args);
    if (*parse_cmd) return parse_answer(parse_text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
