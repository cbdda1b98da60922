#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "groundbot/perception/tracker.hpp"

namespace groundbot::perception {

struct SceneObject {
  std::string label;
  std::vector<BBox> waypoints;           // visited at evenly spaced frames, linearly interpolated
  std::vector<std::string> confusions;   // wrong labels drawn under label noise
  std::size_t appear = 0;                // first frame the object is on the table
  std::size_t disappear = SIZE_MAX;      // first frame it is gone
};

struct Scenario {
  std::vector<SceneObject> objects;
  std::size_t frames = 100;
  double flicker_p = 0.0;      // chance a detection is dropped
  double label_noise_p = 0.0;  // chance a detection carries a confused label
  double jitter = 0.0;         // std dev of box corner noise, normalized units
  std::uint64_t seed = 1;
};

// Ground-truth box of an object at a frame.
BBox object_box(const SceneObject& object, std::size_t frame, std::size_t frames);

// One detection list per frame; deterministic for a fixed seed. Throws
// PreconditionError for probabilities outside [0, 1] or objects without waypoints.
std::vector<std::vector<Detection>> synth_scene(const Scenario& scenario);

// {"objects":[{"label","waypoints":[[x,y,w,h],...],"confusions":[..],"appear","disappear"}],
//  "frames","flicker_p","label_noise_p","jitter","seed"}
Scenario scenario_from_json(std::string_view json);

}  // namespace groundbot::perception
