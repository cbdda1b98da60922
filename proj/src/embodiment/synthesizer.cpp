#include "groundbot/embodiment/synthesizer.hpp"

#include <chrono>
#include <thread>

#include "groundbot/core/errors.hpp"

namespace groundbot::embodiment {

MockSynthesizer::MockSynthesizer(SynthConfig config, double time_scale) : config_(config), time_scale_(time_scale) {
  if (config_.base_latency < 0 || config_.latency_per_char < 0 || config_.duration_per_char < 0) {
    throw ConfigError("synthesizer timings must be non-negative");
  }
  if (time_scale_ < 0) throw ConfigError("time scale must be non-negative");
}

double MockSynthesizer::latency(const std::string& sentence) const {
  return config_.base_latency + config_.latency_per_char * static_cast<double>(sentence.size());
}

double MockSynthesizer::duration(const std::string& sentence) const {
  return config_.duration_per_char * static_cast<double>(sentence.size());
}

UtteranceHandle MockSynthesizer::synth(std::string sentence) const {
  if (sentence.empty()) throw PreconditionError("cannot synthesize an empty sentence");
  UtteranceHandle h;
  h.latency = latency(sentence);
  h.duration = duration(sentence);
  h.sentence = std::move(sentence);
  h.state = std::make_shared<std::atomic<SynthState>>(SynthState::queued);
  const auto wait = std::chrono::duration<double>(h.latency * time_scale_);
  auto state = h.state;
  h.ready = std::async(std::launch::async, [wait, state] {
              if (wait.count() > 0) std::this_thread::sleep_for(wait);
              state->store(SynthState::ready);
            }).share();
  return h;
}

}  // namespace groundbot::embodiment
