#include "groundbot/perception/tracker.hpp"

#include <algorithm>
#include <map>

#include "groundbot/core/errors.hpp"

namespace groundbot::perception {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::string_view to_string(TrackState s) {
  switch (s) {
    case TrackState::tentative: return "TENTATIVE";
    case TrackState::confirmed: return "CONFIRMED";
    case TrackState::lost: return "LOST";
  }
  return "?";
}

std::string Track::label() const {
  std::map<std::string, std::pair<int, std::size_t>> tally;  // count, last position
  for (std::size_t i = 0; i < votes.size(); ++i) {
    auto& t = tally[votes[i]];
    ++t.first;
    t.second = i;
  }
  std::string best;
  std::pair<int, std::size_t> best_key{-1, 0};
  for (const auto& [label, key] : tally) {
    if (key > best_key) {
      best_key = key;
      best = label;
    }
  }
  return best;
}

Tracker::Tracker(TrackerParams params) : params_(params) {
  if (params_.iou_gate <= 0.0 || params_.iou_gate > 1.0) throw ConfigError("iou_gate must be in (0, 1]");
  if (params_.min_hits < 1 || params_.max_misses < 0 || params_.vote_window < 1) {
    throw ConfigError("tracker counts out of range");
  }
}

const std::vector<Track>& Tracker::update(const std::vector<Detection>& detections) {
  previous_ = tracks_;
  last_.clear();

  struct Candidate {
    double overlap;
    double score;
    std::size_t track;
    std::size_t det;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      double o = iou(tracks_[t].bbox, detections[d].bbox);
      if (o >= params_.iou_gate) candidates.push_back({o, detections[d].score, t, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.score != b.score) return a.score > b.score;
    if (a.track != b.track) return a.track < b.track;
    return a.det < b.det;
  });

  std::vector<bool> track_used(tracks_.size(), false), det_used(detections.size(), false);
  for (const auto& c : candidates) {
    if (track_used[c.track] || det_used[c.det]) continue;
    track_used[c.track] = det_used[c.det] = true;
    auto& tr = tracks_[c.track];
    const auto& det = detections[c.det];
    tr.bbox = det.bbox;
    ++tr.hits;
    tr.misses = 0;
    tr.votes.push_back(det.label);
    while (tr.votes.size() > params_.vote_window) tr.votes.pop_front();
    if (tr.state == TrackState::tentative && tr.hits >= params_.min_hits) {
      tr.state = TrackState::confirmed;
      tr.confirm_order = confirmations_++;
    }
    last_.push_back({c.det, tr.id});
  }

  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    if (track_used[t]) continue;
    if (++tracks_[t].misses > params_.max_misses) tracks_[t].state = TrackState::lost;
  }
  std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::lost; });

  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (det_used[d]) continue;
    Track tr;
    tr.id = next_id_++;
    tr.bbox = detections[d].bbox;
    tr.hits = 1;
    tr.votes.push_back(detections[d].label);
    if (params_.min_hits <= 1) {
      tr.state = TrackState::confirmed;
      tr.confirm_order = confirmations_++;
    }
    tracks_.push_back(std::move(tr));
    last_.push_back({d, tracks_.back().id});
  }
  std::sort(last_.begin(), last_.end(), [](const auto& a, const auto& b) { return a.detection < b.detection; });
  return tracks_;
}

std::vector<std::string> object_list(const std::vector<Track>& tracks) {
  std::vector<const Track*> confirmed;
  for (const auto& t : tracks)
    if (t.state == TrackState::confirmed) confirmed.push_back(&t);
  std::sort(confirmed.begin(), confirmed.end(),
            [](const Track* a, const Track* b) { return a->confirm_order < b->confirm_order; });
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto* t : confirmed) {
    auto label = t->label();
    int n = ++seen[label];
    out.push_back(n == 1 ? label : label + " " + std::to_string(n));
  }
  return out;
}

WorldDiff world_diff(const std::vector<std::string>& prev, const std::vector<std::string>& curr) {
  WorldDiff d;
  for (const auto& c : curr)
    if (std::find(prev.begin(), prev.end(), c) == prev.end()) d.added.push_back(c);
  for (const auto& p : prev)
    if (std::find(curr.begin(), curr.end(), p) == curr.end()) d.removed.push_back(p);
  return d;
}

}  // namespace groundbot::perception
