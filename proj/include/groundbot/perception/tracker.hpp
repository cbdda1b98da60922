#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "groundbot/core/world_diff.hpp"

namespace groundbot::perception {

// Axis-aligned box in normalized image units; (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool operator==(const BBox&) const = default;
};

double iou(const BBox& a, const BBox& b);

struct Detection {
  std::size_t frame = 0;
  BBox bbox;
  std::string label;
  double score = 1.0;
  int truth = -1;  // source object index in synthetic scenes, -1 otherwise
};

enum class TrackState { tentative, confirmed, lost };

std::string_view to_string(TrackState s);

struct Track {
  int id = 0;
  BBox bbox;
  std::deque<std::string> votes;  // most recent last
  int hits = 0;
  int misses = 0;
  TrackState state = TrackState::tentative;
  std::size_t confirm_order = 0;  // valid once confirmed

  // Plurality of votes; ties go to the label seen most recently.
  std::string label() const;
};

struct TrackerParams {
  double iou_gate = 0.3;
  int min_hits = 3;
  int max_misses = 10;
  std::size_t vote_window = 9;
};

// Pair chosen for one frame: detection index -> track id.
struct Association {
  std::size_t detection = 0;
  int track = 0;
  bool operator==(const Association&) const = default;
};

class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  // One frame of detections. Greedy best-IoU matching above the gate, ties
  // broken by higher detection score. Returns the live (non-lost) tracks.
  const std::vector<Track>& update(const std::vector<Detection>& detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  // Associations made by the last update, ordered by detection index.
  const std::vector<Association>& last_associations() const { return last_; }
  // Tracks of the previous frame as they were before the last update.
  const std::vector<Track>& previous_tracks() const { return previous_; }
  const TrackerParams& params() const { return params_; }
  int ids_issued() const { return next_id_ - 1; }

 private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  std::vector<Track> previous_;
  std::vector<Association> last_;
  int next_id_ = 1;
  std::size_t confirmations_ = 0;
};

// Labels of CONFIRMED tracks in order of first confirmation; repeated labels
// get ordinal suffixes ("lemon", "lemon 2").
std::vector<std::string> object_list(const std::vector<Track>& tracks);

// Order-preserving set difference of two name lists.
WorldDiff world_diff(const std::vector<std::string>& prev, const std::vector<std::string>& curr);

}  // namespace groundbot::perception
