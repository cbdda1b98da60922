#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/protocol/actions.hpp"
#include "groundbot/protocol/parser.hpp"

namespace groundbot::eval {

// Human judgements for one answer. The harness never fills these itself.
struct Annotations {
  bool task_completed = false;
  bool grounded = false;
  bool reasoning_ok = false;
  bool communication_ok = false;

  bool operator==(const Annotations&) const = default;
};

struct Transcript {
  std::string prompt_id;
  int trial = 0;
  std::string answer;
  protocol::ResponsePlan plan;
  std::optional<Annotations> annotations;
};

Transcript make_transcript(std::string prompt_id, int trial, std::string answer,
                           const protocol::ActionRegistry& registry = protocol::default_registry());

// Mean approximate token count. Precondition: answers nonempty.
double response_length(const std::vector<std::string>& answers);

// Lowercased word tokens of the answer; punctuation tokens are dropped.
std::vector<std::string> word_set(std::string_view answer);

// Mean pairwise Jaccard index of the answers' word sets, computed in exact
// rational arithmetic and rounded once. Two empty sets count as identical.
// Precondition: at least two answers.
double jaccard_diversity(const std::vector<std::string>& answers);

struct BehaviorRates {
  double expressiveness = 0;
  double perception_manipulation = 0;

  bool operator==(const BehaviorRates&) const = default;
};

// Fraction of plans executing at least one express action, and at least one
// look/point/give. Anomalies never count. Precondition: plans nonempty.
BehaviorRates behavior_rates(const std::vector<protocol::ResponsePlan>& plans);

std::size_t count_anomalies(const std::vector<protocol::ResponsePlan>& plans);

// One metric cell; nullopt renders as "-".
struct MetricRow {
  std::string label;
  std::optional<double> value;

  bool operator==(const MetricRow&) const = default;
};

const std::vector<std::string>& chat_metric_labels();

struct ChatReport {
  std::vector<MetricRow> rows;  // chat_metric_labels() order
  std::size_t transcripts = 0;
  std::size_t prompts = 0;
  std::size_t anomalies = 0;

  std::optional<double> value(std::string_view label) const;
};

// Pure function of the transcript set; input order does not matter.
// Similarity is averaged per prompt over prompts with two or more trials.
// Annotation rows are absent when no transcript is annotated; a partially
// annotated set is a PreconditionError, as is an empty set.
ChatReport chat_report(std::vector<Transcript> transcripts);

// Shortest round-trip decimal, "-" when absent.
std::string format_value(std::optional<double> v);

// Header "Model,<labels>" and one row per report.
std::string chat_csv(const std::vector<std::pair<std::string, ChatReport>>& reports);

// Transcript files: JSONL records {prompt_id, trial, answer}. Annotation
// files: JSONL records {prompt_id, trial, task_completed, grounded,
// reasoning_ok, communication_ok}. Parse errors name the line.
std::vector<Transcript> parse_transcripts(std::string_view jsonl);
std::vector<Transcript> load_transcript_dir(const std::string& dir);
// Throws PreconditionError for unknown or duplicate (prompt_id, trial) keys.
void apply_annotations(std::vector<Transcript>& transcripts, std::string_view jsonl);
std::string transcripts_to_jsonl(const std::vector<Transcript>& transcripts);

}  // namespace groundbot::eval
