#include "groundbot/perception/gesture.hpp"

#include <algorithm>
#include <cmath>

#include "groundbot/core/errors.hpp"

namespace groundbot::perception {

std::string_view to_string(PhaseKind k) { return k == PhaseKind::flight ? "FLIGHT" : "REST"; }

std::string_view to_string(Gesture g) {
  switch (g) {
    case Gesture::none: return "none";
    case Gesture::wave: return "wave";
    case Gesture::grasp: return "grasp";
    case Gesture::pause: return "pause";
    case Gesture::stop: return "stop";
  }
  return "?";
}

std::vector<double> wrist_speeds(std::span<const PoseFrame> w) {
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double dt = w[i].timestamp - w[i - 1].timestamp;
    if (dt <= 0) continue;
    for (auto j : {Joint::right_wrist, Joint::left_wrist}) {
      const double d = std::hypot(w[i][j].x - w[i - 1][j].x, w[i][j].y - w[i - 1][j].y);
      out[i] = std::max(out[i], d / dt);
    }
  }
  return out;
}

std::vector<MotionPhase> segment_motion(std::span<const PoseFrame> w, const SegmentParams& p) {
  if (w.empty()) throw PreconditionError("cannot segment an empty window");
  const auto speeds = wrist_speeds(w);
  const std::size_t n = w.size();

  struct Run {
    PhaseKind kind;
    std::size_t begin, end;
  };
  std::vector<Run> runs;
  PhaseKind state = PhaseKind::rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (state == PhaseKind::rest && speeds[i] > p.speed_hi) state = PhaseKind::flight;
    else if (state == PhaseKind::flight && speeds[i] < p.speed_lo) state = PhaseKind::rest;
    if (runs.empty() || runs.back().kind != state) runs.push_back({state, i, i + 1});
    else runs.back().end = i + 1;
  }

  auto start_of = [&](const Run& r) { return w[r.begin].timestamp; };
  auto stop_of = [&](const Run& r) { return r.end < n ? w[r.end].timestamp : w[n - 1].timestamp; };

  // Flip the shortest too-short run until none remain; flipping coalesces it
  // with both neighbours, so kinds keep alternating.
  while (runs.size() > 1) {
    std::size_t shortest = runs.size();
    double best = p.min_phase;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      double d = stop_of(runs[k]) - start_of(runs[k]);
      if (d < best) {
        best = d;
        shortest = k;
      }
    }
    if (shortest == runs.size()) break;
    std::vector<Run> merged;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      Run r = runs[k];
      if (k == shortest) r.kind = r.kind == PhaseKind::flight ? PhaseKind::rest : PhaseKind::flight;
      if (!merged.empty() && merged.back().kind == r.kind) merged.back().end = r.end;
      else merged.push_back(r);
    }
    runs = std::move(merged);
  }

  std::vector<MotionPhase> out;
  for (const auto& r : runs) out.push_back({r.kind, r.begin, r.end, start_of(r), stop_of(r)});
  return out;
}

Side active_side(std::span<const PoseFrame> w) {
  auto extent = [&](Joint j) {
    double x0 = 1e18, x1 = -1e18, y0 = 1e18, y1 = -1e18;
    for (const auto& f : w) {
      x0 = std::min(x0, f[j].x);
      x1 = std::max(x1, f[j].x);
      y0 = std::min(y0, f[j].y);
      y1 = std::max(y1, f[j].y);
    }
    return (x1 - x0) + (y1 - y0);
  };
  return extent(Joint::left_wrist) > extent(Joint::right_wrist) ? Side::left : Side::right;
}

namespace {

struct Means {
  Keypoint shoulder, elbow, wrist;
  double wrist_x_sd = 0.0;
};

Means means(std::span<const PoseFrame> w, std::size_t begin, std::size_t end, const Arm& a) {
  Means m;
  const double n = static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    m.shoulder.x += w[i][a.shoulder].x / n;
    m.shoulder.y += w[i][a.shoulder].y / n;
    m.elbow.x += w[i][a.elbow].x / n;
    m.elbow.y += w[i][a.elbow].y / n;
    m.wrist.x += w[i][a.wrist].x / n;
    m.wrist.y += w[i][a.wrist].y / n;
  }
  double var = 0.0;
  for (std::size_t i = begin; i < end; ++i) var += std::pow(w[i][a.wrist].x - m.wrist.x, 2) / n;
  m.wrist_x_sd = std::sqrt(var);
  return m;
}

int x_reversals(std::span<const PoseFrame> w, const MotionPhase& ph, const Arm& a, const GestureParams& p) {
  int reversals = 0;
  int dir = 0;
  bool have = false;
  double ext = 0.0;
  for (std::size_t i = ph.begin; i < ph.end; ++i) {
    const auto& wr = w[i][a.wrist];
    if (!(wr.y < w[i][a.elbow].y - p.above_margin)) continue;
    const double x = wr.x;
    if (!have) {
      have = true;
      ext = x;
      continue;
    }
    if (dir == 0) {
      if (std::abs(x - ext) > p.reversal_deadband) {
        dir = x > ext ? 1 : -1;
        ext = x;
      }
    } else if (dir > 0) {
      if (x > ext) ext = x;
      else if (ext - x > p.reversal_deadband) {
        ++reversals;
        dir = -1;
        ext = x;
      }
    } else {
      if (x < ext) ext = x;
      else if (x - ext > p.reversal_deadband) {
        ++reversals;
        dir = 1;
        ext = x;
      }
    }
  }
  return reversals;
}

bool is_grasp(std::span<const PoseFrame> w, std::span<const MotionPhase> phases, std::size_t k,
              const std::vector<double>& speeds, const Arm& a, const GestureParams& p) {
  if (k + 1 >= phases.size() || phases[k + 1].kind != PhaseKind::rest) return false;
  const auto& ph = phases[k];
  if (ph.end - ph.begin < 4) return false;
  const auto& rest = phases[k + 1];
  const auto m = means(w, rest.begin, rest.end, a);
  if (std::abs(m.wrist.y - p.table_y) > p.table_tolerance) return false;
  if (m.wrist.y < m.elbow.y - p.above_margin) return false;
  double peak = 0.0;
  std::size_t peak_at = ph.begin;
  for (std::size_t i = ph.begin; i < ph.end; ++i) {
    if (speeds[i] > peak) {
      peak = speeds[i];
      peak_at = i;
    }
  }
  const std::size_t tail = std::max<std::size_t>(3, (ph.end - ph.begin) / 6);
  double late = 0.0;
  for (std::size_t i = ph.end - tail; i < ph.end; ++i) late += speeds[i] / static_cast<double>(tail);
  return peak_at < ph.end - tail && late <= p.decel_ratio * peak;
}

}  // namespace

Gesture classify_gesture(std::span<const MotionPhase> phases, std::span<const PoseFrame> w, const GestureParams& p) {
  if (phases.empty() || w.empty()) return Gesture::none;
  const Arm a = arm(active_side(w));
  const auto speeds = wrist_speeds(w);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const auto& ph = phases[k];
    if (ph.kind == PhaseKind::flight) {
      if (x_reversals(w, ph, a, p) >= p.wave_reversals) return Gesture::wave;
      if (is_grasp(w, phases, k, speeds, a, p)) return Gesture::grasp;
      continue;
    }
    if (k == 0 || phases[k - 1].kind != PhaseKind::flight || ph.end <= ph.begin) continue;
    const auto m = means(w, ph.begin, ph.end, a);
    const bool above_shoulder = m.wrist.y < m.shoulder.y - p.above_margin;
    if (above_shoulder && ph.duration() >= p.pause_hold) return Gesture::pause;
    const double rise = m.elbow.y - m.wrist.y;
    if (!above_shoulder && rise > p.above_margin && std::abs(m.wrist.x - m.elbow.x) <= p.stop_max_lean * rise &&
        m.wrist_x_sd <= p.stop_max_lateral_sd && ph.duration() >= p.stop_hold) {
      return Gesture::stop;
    }
  }
  return Gesture::none;
}

GestureDetector::GestureDetector(DetectorParams params) : params_(params), filter_(params.filter) {}

std::optional<GestureEvent> GestureDetector::push(const PoseFrame& raw) {
  auto frame = filter_.filter(raw);
  if (!frame) return std::nullopt;
  const double t = frame->timestamp;
  window_.push_back(*frame);
  while (!window_.empty() && window_.front().timestamp < t - params_.window) window_.pop_front();
  if (last_emit_ && t - *last_emit_ < params_.refractory) return std::nullopt;
  if (window_.back().timestamp - window_.front().timestamp < params_.min_window) return std::nullopt;

  std::vector<PoseFrame> frames(window_.begin(), window_.end());
  auto phases = segment_motion(frames, params_.segment);
  auto g = classify_gesture(phases, frames, params_.gesture);
  if (g == Gesture::none) return std::nullopt;
  last_emit_ = t;
  window_.clear();
  return GestureEvent{g, t};
}

void GestureDetector::reset() {
  filter_.reset();
  window_.clear();
  last_emit_.reset();
}

}  // namespace groundbot::perception
