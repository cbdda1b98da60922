#pragma once

#include <atomic>
#include <future>
#include <memory>
#include <string>

namespace groundbot::embodiment {

// Latency L = base + per_char * len, playback duration D = duration_per_char * len.
struct SynthConfig {
  double base_latency = 0.1;
  double latency_per_char = 0.005;
  double duration_per_char = 0.06;
};

enum class SynthState { queued, ready, playing, done };

struct UtteranceHandle {
  std::string sentence;
  double latency = 0.0;
  double duration = 0.0;
  std::shared_future<void> ready;
  std::shared_ptr<std::atomic<SynthState>> state;

  SynthState current() const { return state->load(); }
};

// Stand-in for a TTS model. Each synth() call runs on its own thread and
// becomes ready after the scaled latency; time_scale 0 makes it instant.
class MockSynthesizer {
 public:
  explicit MockSynthesizer(SynthConfig config = {}, double time_scale = 1.0);

  double latency(const std::string& sentence) const;
  double duration(const std::string& sentence) const;

  // Throws PreconditionError for an empty sentence.
  UtteranceHandle synth(std::string sentence) const;

  const SynthConfig& config() const { return config_; }
  double time_scale() const { return time_scale_; }

 private:
  SynthConfig config_;
  double time_scale_;
};

}  // namespace groundbot::embodiment
