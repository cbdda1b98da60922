#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "groundbot/perception/pose.hpp"

namespace groundbot::perception {

enum class PhaseKind { flight, rest };

std::string_view to_string(PhaseKind k);

// Frames [begin, end) of the window. start is the first frame's time; end is
// the next phase's start, or the last frame's time for the final phase.
struct MotionPhase {
  PhaseKind kind = PhaseKind::rest;
  std::size_t begin = 0;
  std::size_t end = 0;
  double start = 0.0;
  double stop = 0.0;

  double duration() const { return stop - start; }
  bool operator==(const MotionPhase&) const = default;
};

struct SegmentParams {
  double speed_hi = 120.0;  // px/s to enter FLIGHT
  double speed_lo = 60.0;   // px/s to leave FLIGHT
  double min_phase = 0.15;  // seconds
};

// Fastest wrist speed per frame (backward difference; frame 0 is 0).
std::vector<double> wrist_speeds(std::span<const PoseFrame> window);

// Hysteresis on wrist speed, then phases shorter than min_phase merged into a
// neighbour. Output alternates and tiles the window. Throws PreconditionError
// for an empty window.
std::vector<MotionPhase> segment_motion(std::span<const PoseFrame> window, const SegmentParams& params = {});

enum class Gesture { none, wave, grasp, pause, stop };

std::string_view to_string(Gesture g);

struct GestureParams {
  int wave_reversals = 2;
  double reversal_deadband = 8.0;   // px of travel before a direction change counts
  double pause_hold = 1.0;          // s
  double stop_hold = 0.4;           // s
  double above_margin = 10.0;       // px a wrist must clear to count as above
  double stop_max_lean = 0.45;      // |dx/dy| of the forearm
  double stop_max_lateral_sd = 8.0; // px
  double table_y = 360.0;           // px, table plane in the image
  double table_tolerance = 22.0;    // px
  double decel_ratio = 0.5;         // late flight speed / peak speed
};

// The arm that travelled furthest in the window.
Side active_side(std::span<const PoseFrame> window);

// Rule-based label for one window. Rules are tried phase by phase in time
// order; the first phase that satisfies one decides.
Gesture classify_gesture(std::span<const MotionPhase> phases, std::span<const PoseFrame> window,
                         const GestureParams& params = {});

struct DetectorParams {
  OneEuroParams filter;
  SegmentParams segment;
  GestureParams gesture;
  double window = 3.0;      // s of history kept
  double refractory = 1.5;  // s after an emission with no new gesture
  double min_window = 0.3;  // s of data before classifying
};

struct GestureEvent {
  Gesture gesture = Gesture::none;
  double timestamp = 0.0;
};

// Streaming detector: filters frames, keeps a sliding window, and emits at
// most one gesture per window. The window is cleared after each emission.
class GestureDetector {
 public:
  explicit GestureDetector(DetectorParams params = {});

  std::optional<GestureEvent> push(const PoseFrame& raw);
  void reset();

  const std::deque<PoseFrame>& window() const { return window_; }

 private:
  DetectorParams params_;
  PoseFilter filter_;
  std::deque<PoseFrame> window_;
  std::optional<double> last_emit_;
};

}  // namespace groundbot::perception
