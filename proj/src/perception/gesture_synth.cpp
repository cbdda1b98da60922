#include "groundbot/perception/gesture_synth.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace groundbot::perception {
namespace {

constexpr double kFps = 30.0;

struct P {
  double x = 0.0;
  double y = 0.0;
};

P lerp(P a, P b, double u) { return {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u}; }

// Minimum-jerk position profile.
double minjerk(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }

struct ArmPose {
  P elbow;
  P wrist;
};

// Piecewise arm motion: each piece maps local time in [0, duration] to a pose.
struct Piece {
  double duration;
  std::function<ArmPose(double)> at;
};

class Script {
 public:
  explicit Script(ArmPose start) : last_(start) {}

  void hold(double d) {
    ArmPose p = last_;
    pieces_.push_back({d, [p](double) { return p; }});
  }
  void move(double d, ArmPose to) {
    ArmPose from = last_;
    pieces_.push_back({d, [from, to, d](double t) {
                         double u = minjerk(std::clamp(t / d, 0.0, 1.0));
                         return ArmPose{lerp(from.elbow, to.elbow, u), lerp(from.wrist, to.wrist, u)};
                       }});
    last_ = to;
  }
  void drift(double d, P wrist_offset) {
    ArmPose from = last_;
    ArmPose to{from.elbow, {from.wrist.x + wrist_offset.x, from.wrist.y + wrist_offset.y}};
    pieces_.push_back({d, [from, to, d](double t) {
                         double u = std::clamp(t / d, 0.0, 1.0);
                         return ArmPose{from.elbow, lerp(from.wrist, to.wrist, u)};
                       }});
    last_ = to;
  }
  void wave(double d, double amplitude, double freq) {
    ArmPose c = last_;
    pieces_.push_back({d, [c, amplitude, freq](double t) {
                         double s = std::sin(2.0 * std::numbers::pi * freq * t);
                         return ArmPose{c.elbow, {c.wrist.x + amplitude * s, c.wrist.y + 0.15 * amplitude * std::abs(s)}};
                       }});
    // The wave ends where the sine ends.
    double s_end = std::sin(2.0 * std::numbers::pi * freq * d);
    last_ = {c.elbow, {c.wrist.x + amplitude * s_end, c.wrist.y + 0.15 * amplitude * std::abs(s_end)}};
  }

  double total() const {
    double t = 0.0;
    for (const auto& p : pieces_) t += p.duration;
    return t;
  }

  ArmPose at(double t) const {
    for (const auto& p : pieces_) {
      if (t <= p.duration) return p.at(t);
      t -= p.duration;
    }
    return last_;
  }

 private:
  ArmPose last_;
  std::vector<Piece> pieces_;
};

}  // namespace

GestureStream synth_gesture(Gesture kind, double noise_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  GestureStream out;
  out.label = kind;
  out.side = rng() % 2 ? Side::left : Side::right;
  const double cx = 320.0 + U(-40, 40);
  const double s = U(0.9, 1.1);
  const double sy = 190.0 + U(-10, 10);
  // Outward direction in the image for the active arm (the person's right is image left).
  const double o = out.side == Side::right ? -1.0 : 1.0;

  const P shoulder{cx + o * 50.0 * s, sy};
  const P other_shoulder{cx - o * 50.0 * s, sy};
  auto rest_of = [&](P sh, double dir) {
    return ArmPose{{sh.x + dir * 10.0 * s, 300.0 + U(-5, 5)}, {sh.x - dir * 25.0 * s, 405.0 + U(-8, 8)}};
  };
  const ArmPose rest = rest_of(shoulder, o);
  const ArmPose other = rest_of(other_shoulder, -o);

  Script arm(rest);
  arm.hold(U(0.3, 0.7));
  switch (kind) {
    case Gesture::wave: {
      ArmPose up{{shoulder.x + o * U(30, 45) * s, sy + U(45, 65)}, {shoulder.x + o * U(20, 45) * s, sy - U(40, 60)}};
      arm.move(U(0.35, 0.5), up);
      double f = U(1.5, 2.5);
      arm.wave(U(1.5, 3.0) / f, U(25, 50), f);
      arm.move(U(0.35, 0.5), rest);
      arm.hold(U(0.3, 0.6));
      break;
    }
    case Gesture::pause: {
      ArmPose up{{shoulder.x + o * U(15, 30) * s, sy + U(50, 70)}, {shoulder.x + o * U(0, 15) * s, sy - U(45, 70)}};
      arm.move(U(0.35, 0.5), up);
      arm.drift(U(1.3, 2.0), {U(-3, 3), U(-3, 3)});
      arm.move(U(0.35, 0.5), rest);
      arm.hold(U(0.2, 0.4));
      break;
    }
    case Gesture::stop: {
      P elbow{shoulder.x + o * U(5, 20) * s, sy + U(80, 95)};
      ArmPose up{elbow, {elbow.x + U(-6, 6), sy + U(22, 40)}};
      arm.move(U(0.35, 0.5), up);
      arm.drift(U(0.7, 1.2), {U(-2, 2), U(-2, 2)});
      arm.move(U(0.35, 0.5), rest);
      arm.hold(U(0.2, 0.4));
      break;
    }
    case Gesture::grasp: {
      double dx = U(90, 160) * (rng() % 2 ? 1.0 : -1.0);
      ArmPose reach{{rest.elbow.x + dx * 0.5, rest.elbow.y - U(10, 25)}, {rest.wrist.x + dx, 360.0 + U(-8, 8)}};
      arm.move(U(0.5, 0.7), reach);
      arm.hold(U(0.6, 1.2));
      break;
    }
    case Gesture::none: {
      switch (rng() % 4) {
        case 0: arm.hold(U(2.0, 3.0)); break;
        case 1: arm.drift(2.0, {U(-20, 20), U(-10, 10)}); arm.hold(U(0.3, 0.8)); break;
        case 2: {
          ArmPose shuffled{rest.elbow, {rest.wrist.x + o * U(40, 80), rest.wrist.y + U(5, 20)}};
          arm.move(U(0.35, 0.5), shuffled);
          arm.hold(U(1.0, 1.5));
          break;
        }
        default: {
          ArmPose half{rest.elbow, {rest.wrist.x + o * U(5, 15), rest.elbow.y - U(20, 40)}};
          arm.move(U(0.35, 0.45), half);
          arm.move(U(0.35, 0.45), rest);
          arm.hold(U(0.8, 1.2));
          break;
        }
      }
      break;
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  const auto active = perception::arm(out.side);
  const auto passive = perception::arm(out.side == Side::right ? Side::left : Side::right);
  const std::size_t n = static_cast<std::size_t>(std::ceil(arm.total() * kFps)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kFps;
    PoseFrame f;
    f.timestamp = t;
    auto set = [&](Joint j, P p, double conf) { f[j] = {p.x, p.y, conf}; };
    const auto a = arm.at(t);
    set(active.shoulder, shoulder, 0.95);
    set(active.elbow, a.elbow, 0.9);
    set(active.wrist, a.wrist, 0.9);
    set(passive.shoulder, other_shoulder, 0.95);
    set(passive.elbow, other.elbow, 0.9);
    set(passive.wrist, other.wrist, 0.9);
    set(Joint::head_top, {cx, sy - 90.0 * s}, 0.95);
    set(Joint::neck, {cx, sy - 20.0 * s}, 0.95);
    set(Joint::right_hip, {cx - 30.0 * s, sy + 200.0 * s}, 0.4);
    set(Joint::left_hip, {cx + 30.0 * s, sy + 200.0 * s}, 0.4);
    set(Joint::right_knee, {cx - 35.0 * s, sy + 260.0 * s}, 0.2);
    set(Joint::left_knee, {cx + 35.0 * s, sy + 260.0 * s}, 0.2);
    set(Joint::right_ankle, {cx - 35.0 * s, sy + 330.0 * s}, 0.1);
    set(Joint::left_ankle, {cx + 35.0 * s, sy + 330.0 * s}, 0.1);
    for (auto& k : f.keypoints) {
      k.x += noise_sigma * noise(rng);
      k.y += noise_sigma * noise(rng);
    }
    out.frames.push_back(f);
  }
  return out;
}

}  // namespace groundbot::perception
