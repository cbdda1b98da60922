#include "groundbot/eval/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/log.hpp"
#include "groundbot/core/text.hpp"
#include "groundbot/llm/tokenizer.hpp"

namespace groundbot::eval {

namespace {

__extension__ using i128 = __int128;

// Sum of fractions kept exact while it fits; falls back to long double.
class Fraction {
 public:
  void add(long long num, long long den) {
    approx_ += static_cast<long double>(num) / static_cast<long double>(den);
    add_exact(num, den);
  }

  void add(const Fraction& other) {
    approx_ += other.approx_;
    if (!other.exact_) {
      exact_ = false;
      return;
    }
    add_exact(static_cast<long long>(other.num_), static_cast<long long>(other.den_));
  }

  void divide(long long k) {
    approx_ /= static_cast<long double>(k);
    if (!exact_) return;
    i128 n = num_;
    i128 d = den_ * k;
    reduce(n, d);
    if (!fits(d)) {
      exact_ = false;
      return;
    }
    num_ = n;
    den_ = d;
  }

  double value() const {
    if (!exact_) return static_cast<double>(approx_);
    // Operands below 2^53 are exact doubles, so one division rounds correctly.
    if (num_ < kExactInt && den_ < kExactInt) return static_cast<double>(num_) / static_cast<double>(den_);
    return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
  }

 private:
  static constexpr i128 kExactInt = static_cast<i128>(1) << 53;

  void add_exact(long long num, long long den) {
    if (!exact_) return;
    i128 n = num_ * den + static_cast<i128>(num) * den_;
    i128 d = den_ * den;
    reduce(n, d);
    if (!fits(n) || !fits(d)) {
      exact_ = false;
      log::debug("jaccard sum left exact range, using long double");
      return;
    }
    num_ = n;
    den_ = d;
  }

  static i128 gcd(i128 a, i128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static void reduce(i128& n, i128& d) {
    i128 g = gcd(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
  }
  static bool fits(i128 v) { return v >= 0 && v < (static_cast<i128>(1) << 62); }

  i128 num_ = 0;
  i128 den_ = 1;
  bool exact_ = true;
  long double approx_ = 0;
};

// num/den rounded to nearest double. Exact for integer operands below 2^53.
double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

Fraction pairwise_sum(const std::vector<std::set<std::string>>& sets) {
  Fraction sum;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      const auto& a = sets[i];
      const auto& b = sets[j];
      std::size_t common = 0;
      for (const auto& w : a) common += b.count(w);
      std::size_t uni = a.size() + b.size() - common;
      if (uni == 0) {
        sum.add(1, 1);
      } else {
        sum.add(static_cast<long long>(common), static_cast<long long>(uni));
      }
    }
  }
  return sum;
}

std::vector<std::set<std::string>> word_sets(const std::vector<std::string>& answers) {
  std::vector<std::set<std::string>> sets;
  sets.reserve(answers.size());
  for (const auto& a : answers) {
    auto w = word_set(a);
    sets.emplace_back(w.begin(), w.end());
  }
  return sets;
}

bool is_word(std::string_view tok) {
  return std::any_of(tok.begin(), tok.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
  });
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <typename F>
void for_each_record(std::string_view jsonl, const std::string& what, F&& f) {
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      f(nlohmann::json::parse(line));
    } catch (const PreconditionError&) {
      throw;
    } catch (const std::exception& ex) {
      throw std::runtime_error(what + " line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

using Key = std::pair<std::string, int>;

}  // namespace

Transcript make_transcript(std::string prompt_id, int trial, std::string answer,
                           const protocol::ActionRegistry& registry) {
  Transcript t;
  t.prompt_id = std::move(prompt_id);
  t.trial = trial;
  t.plan = protocol::parse_response(answer, registry);
  t.answer = std::move(answer);
  return t;
}

double response_length(const std::vector<std::string>& answers) {
  if (answers.empty()) throw PreconditionError("response_length needs at least one answer");
  std::size_t total = 0;
  for (const auto& a : answers) total += llm::count_tokens(a);
  return ratio(total, answers.size());
}

std::vector<std::string> word_set(std::string_view answer) {
  std::vector<std::string> out;
  for (auto& tok : llm::tokenize(answer)) {
    if (is_word(tok)) out.push_back(text::to_lower(tok));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard_diversity(const std::vector<std::string>& answers) {
  if (answers.size() < 2) throw PreconditionError("jaccard_diversity needs at least two answers");
  auto sum = pairwise_sum(word_sets(answers));
  sum.divide(static_cast<long long>(answers.size() * (answers.size() - 1) / 2));
  return sum.value();
}

BehaviorRates behavior_rates(const std::vector<protocol::ResponsePlan>& plans) {
  if (plans.empty()) throw PreconditionError("behavior_rates needs at least one plan");
  std::size_t expressive = 0;
  std::size_t motion = 0;
  for (const auto& plan : plans) {
    bool e = false;
    bool m = false;
    for (const auto& call : plan.actions()) {
      if (call.action == "express") e = true;
      if (call.action == "look" || call.action == "point" || call.action == "give") m = true;
    }
    expressive += e;
    motion += m;
  }
  return {ratio(expressive, plans.size()), ratio(motion, plans.size())};
}

std::size_t count_anomalies(const std::vector<protocol::ResponsePlan>& plans) {
  std::size_t n = 0;
  for (const auto& p : plans) n += p.anomalies.size();
  return n;
}

const std::vector<std::string>& chat_metric_labels() {
  static const std::vector<std::string> labels{
      "Response length",           "Response similarity", "Task completion",  "Grounding",
      "Perception & manipulation", "Expressiveness",      "Reasoning skills", "Communication skills"};
  return labels;
}

std::optional<double> ChatReport::value(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r.value;
  }
  throw PreconditionError("no metric named " + std::string(label));
}

ChatReport chat_report(std::vector<Transcript> transcripts) {
  if (transcripts.empty()) throw PreconditionError("chat_report needs at least one transcript");
  std::sort(transcripts.begin(), transcripts.end(), [](const Transcript& a, const Transcript& b) {
    return std::tie(a.prompt_id, a.trial) < std::tie(b.prompt_id, b.trial);
  });

  std::vector<std::string> answers;
  std::vector<protocol::ResponsePlan> plans;
  std::map<std::string, std::vector<std::string>> by_prompt;
  std::size_t annotated = 0;
  std::size_t task = 0, grounded = 0, reasoning = 0, communication = 0;
  for (const auto& t : transcripts) {
    answers.push_back(t.answer);
    plans.push_back(t.plan);
    by_prompt[t.prompt_id].push_back(t.answer);
    if (t.annotations) {
      ++annotated;
      task += t.annotations->task_completed;
      grounded += t.annotations->grounded;
      reasoning += t.annotations->reasoning_ok;
      communication += t.annotations->communication_ok;
    }
  }
  if (annotated != 0 && annotated != transcripts.size()) {
    throw PreconditionError("annotations cover " + std::to_string(annotated) + " of " +
                            std::to_string(transcripts.size()) + " transcripts");
  }

  std::optional<double> similarity;
  Fraction over_prompts;
  long long scored = 0;
  for (const auto& [id, group] : by_prompt) {
    if (group.size() < 2) continue;
    auto s = pairwise_sum(word_sets(group));
    s.divide(static_cast<long long>(group.size() * (group.size() - 1) / 2));
    over_prompts.add(s);
    ++scored;
  }
  if (scored > 0) {
    over_prompts.divide(scored);
    similarity = over_prompts.value();
  }

  auto rates = behavior_rates(plans);
  auto annotation = [&](std::size_t count) -> std::optional<double> {
    if (annotated == 0) return std::nullopt;
    return ratio(count, annotated);
  };

  const auto& labels = chat_metric_labels();
  ChatReport report;
  report.rows = {{labels[0], response_length(answers)},
                 {labels[1], similarity},
                 {labels[2], annotation(task)},
                 {labels[3], annotation(grounded)},
                 {labels[4], rates.perception_manipulation},
                 {labels[5], rates.expressiveness},
                 {labels[6], annotation(reasoning)},
                 {labels[7], annotation(communication)}};
  report.transcripts = transcripts.size();
  report.prompts = by_prompt.size();
  report.anomalies = count_anomalies(plans);
  return report;
}

std::string format_value(std::optional<double> v) {
  if (!v) return "-";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string chat_csv(const std::vector<std::pair<std::string, ChatReport>>& reports) {
  std::string out = "Model";
  for (const auto& l : chat_metric_labels()) out += "," + csv_field(l);
  out += "\n";
  for (const auto& [name, report] : reports) {
    out += csv_field(name);
    for (const auto& r : report.rows) out += "," + format_value(r.value);
    out += "\n";
  }
  return out;
}

std::vector<Transcript> parse_transcripts(std::string_view jsonl) {
  std::vector<Transcript> out;
  for_each_record(jsonl, "transcript", [&](const nlohmann::json& j) {
    out.push_back(make_transcript(j.at("prompt_id").get<std::string>(), j.at("trial").get<int>(),
                                  j.at("answer").get<std::string>()));
  });
  return out;
}

std::vector<Transcript> load_transcript_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Transcript> out;
  for (const auto& p : files) {
    auto part = parse_transcripts(read_file(p.string()));
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

void apply_annotations(std::vector<Transcript>& transcripts, std::string_view jsonl) {
  std::map<Key, Transcript*> index;
  for (auto& t : transcripts) {
    if (!index.emplace(Key{t.prompt_id, t.trial}, &t).second) {
      throw PreconditionError("duplicate transcript " + t.prompt_id + "#" + std::to_string(t.trial));
    }
  }
  std::set<Key> seen;
  for_each_record(jsonl, "annotation", [&](const nlohmann::json& j) {
    Key key{j.at("prompt_id").get<std::string>(), j.at("trial").get<int>()};
    auto name = key.first + "#" + std::to_string(key.second);
    auto it = index.find(key);
    if (it == index.end()) throw PreconditionError("annotation for unknown transcript " + name);
    if (!seen.insert(key).second) throw PreconditionError("duplicate annotation for " + name);
    it->second->annotations = Annotations{j.at("task_completed").get<bool>(), j.at("grounded").get<bool>(),
                                          j.at("reasoning_ok").get<bool>(), j.at("communication_ok").get<bool>()};
  });
}

std::string transcripts_to_jsonl(const std::vector<Transcript>& transcripts) {
  std::string out;
  for (const auto& t : transcripts) {
    nlohmann::json j{{"prompt_id", t.prompt_id}, {"trial", t.trial}, {"answer", t.answer}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace groundbot::eval
