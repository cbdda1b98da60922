#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groundbot/chat/session.hpp"
#include "groundbot/eval/metrics.hpp"
#include "groundbot/llm/scripted_backend.hpp"

namespace groundbot::eval {

// Properties are lowercase words or phrases true of the object
// ("yellow", "fruit", "grows on trees").
struct ObjectProfile {
  std::string name;
  std::vector<std::string> properties;
};

class AttributeTable {
 public:
  AttributeTable() = default;
  // Throws ConfigError on duplicate or empty names.
  explicit AttributeTable(std::vector<ObjectProfile> objects);

  const std::vector<ObjectProfile>& objects() const { return objects_; }
  std::vector<std::string> names() const;
  const ObjectProfile* find(std::string_view name) const;
  bool has(std::string_view object, std::string_view property) const;
  // Every property of any object, longest first.
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  std::vector<ObjectProfile> objects_;
  std::vector<std::string> vocabulary_;
};

// {"objects": [{"name": "lemon", "properties": ["yellow", ...]}, ...]}
AttributeTable parse_attribute_table(std::string_view json);
AttributeTable load_attribute_table(const std::string& path);

// Table object named by a question ending "is it the X" (or "a X", "an X").
// The bare form "is it X" is a property question ("is it orange?").
std::optional<std::string> detect_guess(std::string_view text, const std::vector<std::string>& objects);

// Last sentence ending in '?', if any.
std::optional<std::string> last_question(std::string_view text);

// Rule-based user side of the game. Answers truthfully from the attribute
// table: a question naming a table object is an identity check, otherwise the
// longest known property phrase in the question decides. Returns nullopt when
// the question uses no known property.
class AttributeJudge {
 public:
  explicit AttributeJudge(AttributeTable table) : table_(std::move(table)) {}

  std::optional<bool> answer(std::string_view target, std::string_view question) const;

  // Reasoning check: the explanation names the target and no non-negated
  // sentence naming the target claims a property it lacks.
  bool reasoning_ok(std::string_view target, std::string_view explanation) const;

  // Agreement check: the first table object named is the target.
  bool agreement_ok(std::string_view target, std::string_view reply) const;

  const AttributeTable& table() const { return table_; }

 private:
  AttributeTable table_;
};

enum class GameOutcome { win, loss, invalid };
enum class GamePhase { introduction, question_answer, reasoning_check, agreement_check };

std::string_view to_string(GameOutcome o);
std::string_view to_string(GamePhase p);

struct PhaseRecord {
  GamePhase phase = GamePhase::introduction;
  std::string user;
  std::string robot;
};

struct QuestionRecord {
  std::string question;
  std::optional<bool> answer;  // nullopt when the judge could not answer
  std::optional<std::string> guess;
};

struct GameLog {
  std::string target;
  int trial = 0;
  GameOutcome outcome = GameOutcome::invalid;
  std::vector<QuestionRecord> questions;
  std::vector<PhaseRecord> phases;
  std::optional<bool> reasoning_ok;
  std::optional<bool> agreement_ok;
  bool used_express = false;
  bool used_motion = false;
  std::size_t anomalies = 0;
  std::string error;  // set for invalid trials

  std::size_t question_count() const { return questions.size(); }
};

struct GamePrompts {
  std::string introduction =
      "Let's play a game called Guess My Object. I am thinking of one of the objects on the table in front of you. "
      "You can ask me up to {max} yes or no questions, one at a time, to find out which one it is. To make a guess, "
      "ask \"Is it the <object>?\". Each guess counts as one of your questions. Please ask your first question.";
  std::string yes = "Yes.";
  std::string no = "No.";
  std::string correct = "Yes, you got it!";
  std::string lost = "No. That was your last question. I was thinking of the {target}.";
  std::string unknown = "I can only answer yes or no to that.";
  std::string nudge = "Please ask your next yes or no question.";
  std::string reasoning_win = "Well done! Can you explain the strategy you used to work out which object I chose?";
  std::string reasoning_loss = "Can you explain what went wrong in your questioning?";
  std::string agreement = "To make sure we agree, which object did I choose?";
};

struct GameConfig {
  std::vector<std::string> objects;  // placed on the table, also the report order
  int trials_per_object = 5;
  std::size_t max_questions = 4;
  GamePrompts prompts;
};

// Manual judgements that replace the rule-based ones.
struct GameOverride {
  std::optional<bool> reasoning_ok;
  std::optional<bool> agreement_ok;
};
using GameOverrides = std::map<std::pair<std::string, int>, GameOverride>;

// JSONL records {object, trial, reasoning_ok?, agreement_ok?}.
GameOverrides parse_game_overrides(std::string_view jsonl);

using SessionFactory = std::function<chat::ChatSession(const std::string& target, int trial)>;

// Plays one game on a started session with the table objects already placed.
// Backend failures propagate.
GameLog play_game(chat::ChatSession& session, const std::string& target, int trial, const GameConfig& config,
                  const AttributeJudge& judge, const GameOverride& override_ = {});

// Every object is the target trials_per_object times, each trial on a fresh
// session. A backend failure marks the trial invalid and the run continues.
std::vector<GameLog> run_guess_my_object(const SessionFactory& factory, const GameConfig& config,
                                         const AttributeJudge& judge, const GameOverrides& overrides = {});

const std::vector<std::string>& game_metric_labels();

struct GameReportRow {
  std::string object;
  std::vector<MetricRow> metrics;  // game_metric_labels() order
  std::size_t trials = 0;          // valid trials
  std::size_t invalid = 0;

  std::optional<double> value(std::string_view label) const;
};

struct GameReport {
  std::vector<GameReportRow> rows;

  const GameReportRow& row(std::string_view object) const;
};

// Invalid trials are excluded. Questions asked and win explanation average
// over winning trials, loss explanation over losing trials; a rate with no
// trials to average is absent. Rows follow object_order, then first appearance.
GameReport game_report(const std::vector<GameLog>& logs, const std::vector<std::string>& object_order = {});

// Header "Object,<labels>" and one row per object.
std::string game_csv(const GameReport& report);

std::string game_logs_to_jsonl(const std::vector<GameLog>& logs);

// Scripted game runs: {"session": {"priming": bool, "object_facts": bool},
// "trials": [{"object": "lemon", "trial": 0, "script": [fixture entries]}]}.
// A trial without a script replays an empty fixture and ends up invalid.
struct GameFixture {
  bool priming = false;
  bool object_facts = false;
  std::map<std::pair<std::string, int>, llm::ScriptFixture> scripts;
};

GameFixture parse_game_fixture(std::string_view json);
GameFixture load_game_fixture(const std::string& path);
SessionFactory fixture_session_factory(GameFixture fixture, chat::Clock clock);

}  // namespace groundbot::eval
