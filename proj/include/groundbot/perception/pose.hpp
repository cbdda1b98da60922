#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "groundbot/perception/one_euro.hpp"

namespace groundbot::perception {

// 14-keypoint skeleton in AI Challenger order. Image coordinates in pixels,
// y pointing down. "Right" is the person's right side.
enum class Joint {
  right_shoulder = 0,
  right_elbow,
  right_wrist,
  left_shoulder,
  left_elbow,
  left_wrist,
  right_hip,
  right_knee,
  right_ankle,
  left_hip,
  left_knee,
  left_ankle,
  head_top,
  neck,
};

inline constexpr std::size_t kJointCount = 14;

std::string_view to_string(Joint j);

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;
};

struct PoseFrame {
  double timestamp = 0.0;  // seconds
  std::array<Keypoint, kJointCount> keypoints{};

  const Keypoint& operator[](Joint j) const { return keypoints[static_cast<std::size_t>(j)]; }
  Keypoint& operator[](Joint j) { return keypoints[static_cast<std::size_t>(j)]; }
};

enum class Side { right, left };

struct Arm {
  Joint shoulder;
  Joint elbow;
  Joint wrist;
};

Arm arm(Side side);

// Independent 1-euro filters on every keypoint coordinate; confidences pass through.
class PoseFilter {
 public:
  explicit PoseFilter(OneEuroParams params = {});

  // nullopt when the timestamp does not increase; the frame is dropped.
  std::optional<PoseFrame> filter(const PoseFrame& frame);
  void reset();

 private:
  OneEuroParams params_;
  std::vector<OneEuroFilter> filters_;  // x then y per joint
};

}  // namespace groundbot::perception
