#pragma once

#include <cstdint>
#include <vector>

#include "groundbot/perception/gesture.hpp"
#include "groundbot/perception/pose.hpp"

namespace groundbot::perception {

struct GestureStream {
  Gesture label = Gesture::none;
  Side side = Side::right;
  std::vector<PoseFrame> frames;  // 30 Hz, 640x480 image
};

// Seated user behind the table with one arm performing the gesture and the
// other resting in the lap. Body size, placement, timing and amplitudes are
// randomized from the seed; noise_sigma is per-coordinate pixel noise.
GestureStream synth_gesture(Gesture kind, double noise_sigma, std::uint64_t seed);

}  // namespace groundbot::perception
