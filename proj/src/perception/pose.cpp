#include "groundbot/perception/pose.hpp"

namespace groundbot::perception {

std::string_view to_string(Joint j) {
  static constexpr std::array<std::string_view, kJointCount> names{
      "right_shoulder", "right_elbow", "right_wrist", "left_shoulder", "left_elbow", "left_wrist", "right_hip",
      "right_knee",     "right_ankle", "left_hip",    "left_knee",     "left_ankle", "head_top",  "neck"};
  return names[static_cast<std::size_t>(j)];
}

Arm arm(Side side) {
  if (side == Side::right) return {Joint::right_shoulder, Joint::right_elbow, Joint::right_wrist};
  return {Joint::left_shoulder, Joint::left_elbow, Joint::left_wrist};
}

PoseFilter::PoseFilter(OneEuroParams params) : params_(params), filters_(2 * kJointCount, OneEuroFilter(params)) {}

std::optional<PoseFrame> PoseFilter::filter(const PoseFrame& frame) {
  // Reject before touching any state so a bad frame leaves all filters intact.
  if (filters_[0].primed()) {
    auto probe = filters_[0];
    if (!probe.filter(frame.keypoints[0].x, frame.timestamp)) return std::nullopt;
  }
  PoseFrame out = frame;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    out.keypoints[i].x = *filters_[2 * i].filter(frame.keypoints[i].x, frame.timestamp);
    out.keypoints[i].y = *filters_[2 * i + 1].filter(frame.keypoints[i].y, frame.timestamp);
  }
  return out;
}

void PoseFilter::reset() { filters_.assign(2 * kJointCount, OneEuroFilter(params_)); }

}  // namespace groundbot::perception
