#include "groundbot/eval/game.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/core/text.hpp"
#include "groundbot/protocol/prompts.hpp"
#include "groundbot/protocol/sentences.hpp"

namespace groundbot::eval {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Lowercase words separated by single spaces and padded with one space on
// each side, so " phrase " finds whole-word matches. Apostrophes are dropped
// ("isn't" -> "isnt"), other punctuation separates words.
std::string padded_words(std::string_view s) {
  std::string out = " ";
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (c == '\'') continue;
    if (std::isalnum(u) || u >= 0x80) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (out.back() != ' ') {
      out.push_back(' ');
    }
  }
  if (out.back() != ' ') out.push_back(' ');
  return out;
}

bool contains_phrase(const std::string& padded, std::string_view phrase) {
  return padded.find(padded_words(phrase)) != std::string::npos;
}

bool negated(const std::string& padded) {
  static const std::vector<std::string> words{"not",  "no",    "never", "nor",   "neither", "isnt",
                                              "wasnt", "doesnt", "didnt", "arent", "werent"};
  return std::any_of(words.begin(), words.end(),
                     [&](const std::string& w) { return padded.find(" " + w + " ") != std::string::npos; });
}

std::string spoken_text(const protocol::ResponsePlan& plan) {
  std::vector<std::string> parts;
  for (const auto& s : plan.segments) {
    if (s.kind == protocol::SegmentKind::say) parts.push_back(s.text);
  }
  return text::join(parts, " ");
}

std::string fill(std::string_view tmpl, std::string_view key, std::string_view value) {
  std::string out(tmpl);
  const std::string k = "{" + std::string(key) + "}";
  for (auto pos = out.find(k); pos != std::string::npos; pos = out.find(k, pos + value.size())) {
    out.replace(pos, k.size(), value);
  }
  return out;
}

std::optional<bool> opt_bool(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<bool>();
}

nlohmann::json opt_json(const std::optional<bool>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::size_t ratio_count(const std::vector<const GameLog*>& logs, bool (*pred)(const GameLog&)) {
  return static_cast<std::size_t>(std::count_if(logs.begin(), logs.end(), [&](const GameLog* l) { return pred(*l); }));
}

std::optional<double> rate(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

AttributeTable::AttributeTable(std::vector<ObjectProfile> objects) : objects_(std::move(objects)) {
  std::set<std::string> names;
  std::set<std::string> vocab;
  for (auto& o : objects_) {
    o.name = text::normalize(o.name);
    if (o.name.empty()) throw ConfigError("game object with empty name");
    if (!names.insert(o.name).second) throw ConfigError("duplicate game object '" + o.name + "'");
    for (auto& p : o.properties) {
      p = text::normalize(p);
      if (p.empty()) throw ConfigError("empty property on '" + o.name + "'");
      vocab.insert(p);
    }
  }
  vocabulary_.assign(vocab.begin(), vocab.end());
  std::stable_sort(vocabulary_.begin(), vocabulary_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

std::vector<std::string> AttributeTable::names() const {
  std::vector<std::string> out;
  for (const auto& o : objects_) out.push_back(o.name);
  return out;
}

const ObjectProfile* AttributeTable::find(std::string_view name) const {
  auto n = text::normalize(name);
  for (const auto& o : objects_) {
    if (o.name == n) return &o;
  }
  return nullptr;
}

bool AttributeTable::has(std::string_view object, std::string_view property) const {
  const auto* o = find(object);
  if (!o) throw PreconditionError("unknown game object '" + std::string(object) + "'");
  auto p = text::normalize(property);
  return std::find(o->properties.begin(), o->properties.end(), p) != o->properties.end();
}

AttributeTable parse_attribute_table(std::string_view json) {
  auto j = nlohmann::json::parse(json);
  std::vector<ObjectProfile> objects;
  for (const auto& o : j.at("objects")) {
    objects.push_back({o.at("name").get<std::string>(), o.value("properties", std::vector<std::string>{})});
  }
  return AttributeTable(std::move(objects));
}

AttributeTable load_attribute_table(const std::string& path) { return parse_attribute_table(read_file(path)); }

std::optional<std::string> detect_guess(std::string_view text, const std::vector<std::string>& objects) {
  for (const auto& sentence : protocol::split_sentences(text)) {
    if (sentence.find('?') == std::string::npos) continue;
    auto words = padded_words(sentence);
    for (const auto& name : objects) {
      for (std::string_view article : {"the ", "a ", "an "}) {
        auto pattern = " is it " + std::string(article) + padded_words(name).substr(1);
        if (words.ends_with(pattern)) return text::normalize(name);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> last_question(std::string_view text) {
  auto sentences = protocol::split_sentences(text);
  for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) {
    if (it->find('?') != std::string::npos) return *it;
  }
  return std::nullopt;
}

std::optional<bool> AttributeJudge::answer(std::string_view target, std::string_view question) const {
  if (auto guess = detect_guess(question, table_.names())) return *guess == text::normalize(target);
  auto words = padded_words(question);
  for (const auto& p : table_.vocabulary()) {
    if (contains_phrase(words, p)) return table_.has(target, p);
  }
  return std::nullopt;
}

bool AttributeJudge::reasoning_ok(std::string_view target, std::string_view explanation) const {
  auto name = text::normalize(target);
  if (!contains_phrase(padded_words(explanation), name)) return false;
  for (const auto& sentence : protocol::split_sentences(explanation)) {
    auto words = padded_words(sentence);
    if (!contains_phrase(words, name) || negated(words)) continue;
    for (const auto& p : table_.vocabulary()) {
      if (p != name && contains_phrase(words, p) && !table_.has(name, p)) return false;
    }
  }
  return true;
}

bool AttributeJudge::agreement_ok(std::string_view target, std::string_view reply) const {
  auto words = padded_words(reply);
  std::optional<std::string> first;
  auto best = std::string::npos;
  for (const auto& name : table_.names()) {
    auto pos = words.find(padded_words(name));
    if (pos < best) {
      best = pos;
      first = name;
    }
  }
  return first && *first == text::normalize(target);
}

std::string_view to_string(GameOutcome o) {
  switch (o) {
    case GameOutcome::win: return "win";
    case GameOutcome::loss: return "loss";
    case GameOutcome::invalid: return "invalid";
  }
  return "?";
}

std::string_view to_string(GamePhase p) {
  switch (p) {
    case GamePhase::introduction: return "introduction";
    case GamePhase::question_answer: return "question_answer";
    case GamePhase::reasoning_check: return "reasoning_check";
    case GamePhase::agreement_check: return "agreement_check";
  }
  return "?";
}

GameOverrides parse_game_overrides(std::string_view jsonl) {
  GameOverrides out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::pair key{text::normalize(j.at("object").get<std::string>()), j.at("trial").get<int>()};
      out[key] = GameOverride{opt_bool(j, "reasoning_ok"), opt_bool(j, "agreement_ok")};
    } catch (const std::exception& ex) {
      throw std::runtime_error("override line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

GameLog play_game(chat::ChatSession& session, const std::string& target, int trial, const GameConfig& config,
                  const AttributeJudge& judge, const GameOverride& override_) {
  if (config.max_questions == 0) throw PreconditionError("max_questions must be positive");
  const auto& p = config.prompts;
  GameLog log;
  log.target = text::normalize(target);
  log.trial = trial;

  auto turn = [&](GamePhase phase, const std::string& user) {
    auto plan = session.user_turn(user);
    for (const auto& call : plan.actions()) {
      if (call.action == "express") log.used_express = true;
      if (call.action == "look" || call.action == "point" || call.action == "give") log.used_motion = true;
    }
    log.anomalies += plan.anomalies.size();
    log.phases.push_back({phase, user, spoken_text(plan)});
    return log.phases.back().robot;
  };

  auto reply = turn(GamePhase::introduction, fill(p.introduction, "max", std::to_string(config.max_questions)));
  int idle = 0;
  while (true) {
    auto question = last_question(reply);
    if (!question) {
      // One nudge per missing question; a second silent turn forfeits.
      if (++idle > 1) {
        log.outcome = GameOutcome::loss;
        break;
      }
      reply = turn(GamePhase::question_answer, p.nudge);
      continue;
    }
    idle = 0;
    auto guess = detect_guess(*question, config.objects);
    auto answer = guess ? std::optional<bool>(*guess == log.target) : judge.answer(log.target, *question);
    log.questions.push_back({*question, answer, guess});

    std::string user;
    if (guess && *guess == log.target) {
      log.outcome = GameOutcome::win;
      user = p.correct;
    } else if (log.questions.size() >= config.max_questions) {
      log.outcome = GameOutcome::loss;
      user = fill(p.lost, "target", log.target);
    } else {
      user = !answer ? p.unknown : (*answer ? p.yes : p.no);
    }
    reply = turn(GamePhase::question_answer, user);
    if (log.outcome != GameOutcome::invalid) break;
  }

  bool won = log.outcome == GameOutcome::win;
  auto explanation = turn(GamePhase::reasoning_check, won ? p.reasoning_win : p.reasoning_loss);
  log.reasoning_ok = override_.reasoning_ok ? override_.reasoning_ok : judge.reasoning_ok(log.target, explanation);
  auto agreement = turn(GamePhase::agreement_check, p.agreement);
  log.agreement_ok = override_.agreement_ok ? override_.agreement_ok : judge.agreement_ok(log.target, agreement);
  return log;
}

std::vector<GameLog> run_guess_my_object(const SessionFactory& factory, const GameConfig& config,
                                         const AttributeJudge& judge, const GameOverrides& overrides) {
  if (config.objects.empty()) throw PreconditionError("the game needs objects on the table");
  if (config.trials_per_object <= 0) throw PreconditionError("trials_per_object must be positive");
  std::vector<GameLog> logs;
  for (const auto& object : config.objects) {
    auto target = text::normalize(object);
    for (int trial = 0; trial < config.trials_per_object; ++trial) {
      auto it = overrides.find({target, trial});
      try {
        auto session = factory(target, trial);
        session.ingest_world_diff(WorldDiff{config.objects, {}, {}});
        logs.push_back(play_game(session, target, trial, config, judge, it == overrides.end() ? GameOverride{}
                                                                                              : it->second));
      } catch (const llm::BackendError& e) {
        log::warn("game " + target + "#" + std::to_string(trial) + " invalid: " + e.what());
        GameLog bad;
        bad.target = target;
        bad.trial = trial;
        bad.outcome = GameOutcome::invalid;
        bad.error = e.what();
        logs.push_back(std::move(bad));
      }
    }
  }
  return logs;
}

const std::vector<std::string>& game_metric_labels() {
  static const std::vector<std::string> labels{"Win rate",       "Questions asked", "Win explanation", "Loss explanation",
                                               "Expressiveness", "Motion used",     "Agreement",       "Minor anomalies"};
  return labels;
}

std::optional<double> GameReportRow::value(std::string_view label) const {
  for (const auto& m : metrics) {
    if (m.label == label) return m.value;
  }
  throw PreconditionError("no metric named " + std::string(label));
}

const GameReportRow& GameReport::row(std::string_view object) const {
  for (const auto& r : rows) {
    if (r.object == object) return r;
  }
  throw PreconditionError("no report row for " + std::string(object));
}

GameReport game_report(const std::vector<GameLog>& logs, const std::vector<std::string>& object_order) {
  std::vector<std::string> order;
  for (const auto& o : object_order) {
    auto n = text::normalize(o);
    if (std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
  }
  for (const auto& l : logs) {
    if (std::find(order.begin(), order.end(), l.target) == order.end()) order.push_back(l.target);
  }

  const auto& labels = game_metric_labels();
  GameReport report;
  for (const auto& object : order) {
    std::vector<const GameLog*> valid, wins, losses;
    GameReportRow row;
    row.object = object;
    for (const auto& l : logs) {
      if (l.target != object) continue;
      if (l.outcome == GameOutcome::invalid) {
        ++row.invalid;
        continue;
      }
      valid.push_back(&l);
      (l.outcome == GameOutcome::win ? wins : losses).push_back(&l);
    }
    row.trials = valid.size();
    std::size_t asked = 0;
    for (const auto* l : wins) asked += l->question_count();
    auto reasoned = [](const GameLog& l) { return l.reasoning_ok.value_or(false); };
    row.metrics = {
        {labels[0], rate(wins.size(), valid.size())},
        {labels[1], rate(asked, wins.size())},
        {labels[2], rate(ratio_count(wins, reasoned), wins.size())},
        {labels[3], rate(ratio_count(losses, reasoned), losses.size())},
        {labels[4], rate(ratio_count(valid, [](const GameLog& l) { return l.used_express; }), valid.size())},
        {labels[5], rate(ratio_count(valid, [](const GameLog& l) { return l.used_motion; }), valid.size())},
        {labels[6], rate(ratio_count(valid, [](const GameLog& l) { return l.agreement_ok.value_or(false); }),
                         valid.size())},
        {labels[7], rate(ratio_count(valid, [](const GameLog& l) { return l.anomalies > 0; }), valid.size())}};
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string game_csv(const GameReport& report) {
  std::string out = "Object";
  for (const auto& l : game_metric_labels()) out += "," + l;
  out += "\n";
  for (const auto& row : report.rows) {
    out += row.object;
    for (const auto& m : row.metrics) out += "," + format_value(m.value);
    out += "\n";
  }
  return out;
}

std::string game_logs_to_jsonl(const std::vector<GameLog>& logs) {
  std::string out;
  for (const auto& l : logs) {
    nlohmann::json questions = nlohmann::json::array();
    for (const auto& q : l.questions) {
      questions.push_back({{"question", q.question},
                           {"answer", opt_json(q.answer)},
                           {"guess", q.guess ? nlohmann::json(*q.guess) : nlohmann::json()}});
    }
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : l.phases) {
      phases.push_back({{"phase", to_string(p.phase)}, {"user", p.user}, {"robot", p.robot}});
    }
    nlohmann::json j{{"object", l.target},
                     {"trial", l.trial},
                     {"outcome", to_string(l.outcome)},
                     {"questions", questions},
                     {"phases", phases},
                     {"reasoning_ok", opt_json(l.reasoning_ok)},
                     {"agreement_ok", opt_json(l.agreement_ok)},
                     {"used_express", l.used_express},
                     {"used_motion", l.used_motion},
                     {"anomalies", l.anomalies}};
    if (!l.error.empty()) j["error"] = l.error;
    out += j.dump() + "\n";
  }
  return out;
}

GameFixture parse_game_fixture(std::string_view json) {
  auto j = nlohmann::json::parse(json);
  GameFixture f;
  if (j.contains("session")) {
    f.priming = j["session"].value("priming", false);
    f.object_facts = j["session"].value("object_facts", false);
  }
  for (const auto& t : j.at("trials")) {
    std::string lines;
    for (const auto& e : t.at("script")) lines += e.dump() + "\n";
    std::pair key{text::normalize(t.at("object").get<std::string>()), t.at("trial").get<int>()};
    if (!f.scripts.emplace(key, llm::parse_fixture(lines)).second) {
      throw std::runtime_error("duplicate fixture trial " + key.first + "#" + std::to_string(key.second));
    }
  }
  return f;
}

GameFixture load_game_fixture(const std::string& path) { return parse_game_fixture(read_file(path)); }

SessionFactory fixture_session_factory(GameFixture fixture, chat::Clock clock) {
  return [fixture = std::move(fixture), clock = std::move(clock)](const std::string& target, int trial) {
    auto it = fixture.scripts.find({text::normalize(target), trial});
    auto backend = std::make_shared<llm::ScriptedBackend>(it == fixture.scripts.end() ? llm::ScriptFixture{}
                                                                                      : it->second);
    chat::SessionConfig config;
    config.priming = fixture.priming;
    config.object_facts = fixture.object_facts;
    return chat::ChatSession::start(config, protocol::default_registry(), protocol::nicol_profile(), backend, clock);
  };
}

}  // namespace groundbot::eval
