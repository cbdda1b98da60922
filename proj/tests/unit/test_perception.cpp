#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "assignment_oracle.hpp"
#include "groundbot/core/errors.hpp"
#include "groundbot/perception/gesture_synth.hpp"
#include "groundbot/perception/scene.hpp"
#include "groundbot/perception/tracker.hpp"

using namespace groundbot;
using namespace groundbot::perception;

namespace {

Detection det(BBox b, std::string label, double score = 0.9) { return {0, b, std::move(label), score, -1}; }

PoseFrame still_pose(double t) {
  PoseFrame f;
  f.timestamp = t;
  for (std::size_t i = 0; i < kJointCount; ++i) f.keypoints[i] = {100.0 + 20.0 * static_cast<double>(i), 200.0, 1.0};
  return f;
}

}  // namespace

TEST_CASE("iou") {
  CHECK(iou({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {2, 2, 1, 1}) == 0.0);
  CHECK(iou({0, 0, 2, 1}, {1, 0, 2, 1}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("single clean object keeps one confirmed id") {
  Tracker tr;
  for (int f = 0; f < 100; ++f) tr.update({det({0.1 + 0.001 * f, 0.2, 0.1, 0.1}, "banana")});
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].state == TrackState::confirmed);
  CHECK(tr.tracks()[0].id == 1);
  CHECK(tr.ids_issued() == 1);
  CHECK(object_list(tr.tracks()) == std::vector<std::string>{"banana"});
}

TEST_CASE("confirmation needs min_hits") {
  Tracker tr;
  tr.update({det({0.1, 0.1, 0.1, 0.1}, "pear")});
  tr.update({det({0.1, 0.1, 0.1, 0.1}, "pear")});
  CHECK(tr.tracks()[0].state == TrackState::tentative);
  CHECK(object_list(tr.tracks()).empty());
  tr.update({det({0.1, 0.1, 0.1, 0.1}, "pear")});
  CHECK(tr.tracks()[0].state == TrackState::confirmed);
}

TEST_CASE("dropouts up to max_misses keep the id") {
  Tracker tr;
  const BBox b{0.3, 0.3, 0.1, 0.1};
  for (int f = 0; f < 5; ++f) tr.update({det(b, "lemon")});
  for (int f = 0; f < 10; ++f) tr.update({});
  REQUIRE(tr.tracks().size() == 1);
  tr.update({det(b, "lemon")});
  CHECK(tr.tracks()[0].id == 1);
  CHECK(tr.ids_issued() == 1);

  for (int f = 0; f < 11; ++f) tr.update({});
  CHECK(tr.tracks().empty());
  tr.update({det(b, "lemon")});
  CHECK(tr.tracks()[0].id == 2);  // ids are never reused
}

TEST_CASE("ties go to the higher IoU, then the higher score") {
  Tracker tr;
  const BBox b{0.3, 0.3, 0.1, 0.1};
  for (int f = 0; f < 3; ++f) tr.update({det(b, "lemon")});
  SUBCASE("higher IoU wins") {
    tr.update({det({0.32, 0.3, 0.1, 0.1}, "far"), det({0.31, 0.3, 0.1, 0.1}, "near")});
    CHECK(tr.last_associations()[1].track == 1);
    CHECK(tr.last_associations()[0].track != 1);
  }
  SUBCASE("equal IoU, higher score wins") {
    tr.update({det({0.31, 0.3, 0.1, 0.1}, "low", 0.5), det({0.29, 0.3, 0.1, 0.1}, "high", 0.8)});
    CHECK(tr.last_associations()[1].track == 1);
    CHECK(tr.last_associations()[0].track != 1);
  }
}

TEST_CASE("label votes: plurality, ties to the most recent") {
  Track t;
  t.votes = {"lemon", "lemon", "banana"};
  CHECK(t.label() == "lemon");
  t.votes = {"lemon", "banana"};
  CHECK(t.label() == "banana");
  t.votes = {"banana", "lemon", "banana", "lemon"};
  CHECK(t.label() == "lemon");
  Tracker tr({0.3, 3, 10, 3});
  const BBox b{0.3, 0.3, 0.1, 0.1};
  for (const char* l : {"apple", "apple", "apple", "pear", "pear"}) tr.update({det(b, l)});
  CHECK(tr.tracks()[0].votes.size() == 3);
  CHECK(tr.tracks()[0].label() == "pear");
}

TEST_CASE("object list and diffs") {
  CHECK(object_list({}).empty());
  Tracker tr;
  for (int f = 0; f < 3; ++f) {
    tr.update({det({0.1, 0.1, 0.1, 0.1}, "lemon"), det({0.5, 0.5, 0.1, 0.1}, "lemon")});
  }
  CHECK(object_list(tr.tracks()) == std::vector<std::string>{"lemon", "lemon 2"});

  CHECK(world_diff({}, {"a"}) == WorldDiff{{"a"}, {}, {}});
  CHECK(world_diff({"a"}, {"a"}).empty());
  CHECK(world_diff({"a", "b"}, {"b", "c"}) == WorldDiff{{"c"}, {"a"}, {}});
}

TEST_CASE("crossing objects keep their ids and match the optimal assignment") {
  // Two boxes pass each other vertically offset so their IoU stays below the gate.
  Scenario s;
  s.frames = 200;
  s.objects = {{"banana", {{0.05, 0.20, 0.1, 0.1}, {0.85, 0.26, 0.1, 0.1}}, {}, 0, SIZE_MAX},
               {"lemon", {{0.85, 0.32, 0.1, 0.1}, {0.05, 0.38, 0.1, 0.1}}, {}, 0, SIZE_MAX}};
  s.jitter = 0.002;
  s.seed = 3;
  auto stream = synth_scene(s);
  Tracker tr;
  std::map<int, std::set<int>> ids_per_truth;
  for (const auto& frame : stream) {
    tr.update(frame);
    auto expected = test::optimal_assignment(tr.previous_tracks(), frame, tr.params().iou_gate);
    REQUIRE(test::matched_existing(tr) == expected);
    for (const auto& a : tr.last_associations()) ids_per_truth[frame[a.detection].truth].insert(a.track);
  }
  CHECK(ids_per_truth.size() == 2);
  CHECK(ids_per_truth[0].size() == 1);
  CHECK(ids_per_truth[1].size() == 1);
  CHECK(tr.ids_issued() == 2);
}

namespace {

double label_accuracy(double label_noise, std::size_t vote_window, std::uint64_t seed) {
  Scenario s;
  s.frames = 400;
  s.flicker_p = 0.1;
  s.label_noise_p = label_noise;
  s.jitter = 0.003;
  s.seed = seed;
  s.objects = {{"banana", {{0.1, 0.1, 0.12, 0.08}, {0.2, 0.15, 0.12, 0.08}}, {"lemon", "plantain"}, 0, SIZE_MAX},
               {"red bowl", {{0.6, 0.5, 0.15, 0.15}}, {"red cup", "bowl"}, 0, SIZE_MAX}};
  auto stream = synth_scene(s);
  TrackerParams params;
  params.vote_window = vote_window;
  Tracker tr(params);
  std::size_t total = 0, correct = 0;
  for (std::size_t f = 0; f < stream.size(); ++f) {
    tr.update(stream[f]);
    if (f < 15) continue;
    for (const auto& a : tr.last_associations()) {
      for (const auto& t : tr.tracks()) {
        if (t.id != a.track || t.state != TrackState::confirmed) continue;
        ++total;
        correct += t.label() == s.objects[static_cast<std::size_t>(stream[f][a.detection].truth)].label;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("property: label robustness under noise") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CHECK(label_accuracy(0.1, 9, seed) >= 0.99);
    // Plurality over two confusion labels at 30% noise needs a longer window.
    CHECK(label_accuracy(0.3, 21, seed) >= 0.99);
  }
}

TEST_CASE("synthetic scene generator") {
  Scenario s;
  s.frames = 50;
  s.objects = {{"a", {{0.1, 0.1, 0.1, 0.1}}, {"b"}, 0, SIZE_MAX}, {"c", {{0.5, 0.5, 0.1, 0.1}}, {"d"}, 10, 40}};
  auto clean = synth_scene(s);
  for (std::size_t f = 0; f < clean.size(); ++f) CHECK(clean[f].size() == (f >= 10 && f < 40 ? 2u : 1u));
  s.flicker_p = 0.3;
  s.label_noise_p = 0.5;
  s.seed = 77;
  auto a = synth_scene(s);
  auto b = synth_scene(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    REQUIRE(a[f].size() == b[f].size());
    for (std::size_t k = 0; k < a[f].size(); ++k) {
      CHECK(a[f][k].label == b[f][k].label);
      CHECK(a[f][k].bbox == b[f][k].bbox);
    }
  }
  s.flicker_p = 1.0;
  for (const auto& f : synth_scene(s)) CHECK(f.empty());
  s.flicker_p = 1.5;
  CHECK_THROWS_AS(synth_scene(s), PreconditionError);

  auto parsed = scenario_from_json(
      R"({"frames":10,"seed":4,"flicker_p":0.1,"objects":[{"label":"pear","waypoints":[[0.1,0.1,0.1,0.1]],"confusions":["apple"]}]})");
  CHECK(parsed.frames == 10);
  CHECK(parsed.objects[0].confusions == std::vector<std::string>{"apple"});
  CHECK(object_box(parsed.objects[0], 5, 10) == BBox{0.1, 0.1, 0.1, 0.1});
}

TEST_CASE("1-euro filter basics") {
  OneEuroFilter f;
  CHECK(f.filter(5.0, 0.0) == 5.0);
  for (int i = 1; i < 100; ++i) CHECK(f.filter(5.0, i / 30.0) == 5.0);
  CHECK_FALSE(f.filter(9.0, 99 / 30.0).has_value());
  CHECK_FALSE(f.filter(9.0, 1.0).has_value());
  CHECK(f.filter(5.0, 100 / 30.0) == 5.0);
  CHECK_THROWS_AS(OneEuroFilter({0.0, 0.0, 1.0}), ConfigError);
}

TEST_CASE("1-euro step response matches a hand-stepped reference") {
  // Reference recurrence for beta = 0, f_c = 1 Hz, 30 Hz sampling, step 0 -> 1 at sample 5.
  const double te = 1.0 / 30.0;
  const double r = 2.0 * std::numbers::pi * 1.0 * te;
  const double alpha = r / (r + 1.0);
  double y = 0.0;
  OneEuroFilter f({1.0, 0.0, 1.0});
  for (int i = 0; i < 60; ++i) {
    double x = i < 5 ? 0.0 : 1.0;
    if (i > 0) y = y + alpha * (x - y);
    CHECK(std::abs(*f.filter(x, i * te) - y) < 1e-9);
  }
}

TEST_CASE("1-euro with beta zero is a fixed-cutoff exponential filter") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  OneEuroFilter f({1.7, 0.0, 1.0});
  double ema = 0.0;
  double t = 0.0;
  for (int i = 0; i < 500; ++i) {
    double x = 0.5 * i + n(rng);
    double prev = t;
    if (i == 0) {
      ema = x;
    } else {
      t += 0.02 + 0.01 * (i % 3);
      double te = t - prev;
      double tau = 1.0 / (2.0 * std::numbers::pi * 1.7);
      double a = 1.0 / (1.0 + tau / te);
      ema += a * (x - ema);
    }
    CHECK(*f.filter(x, t) == ema);
  }
}

TEST_CASE("property: 1-euro output stays within the hull of inputs so far") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  OneEuroFilter f({1.0, 0.05, 1.0});
  double lo = 1e18, hi = -1e18;
  for (int i = 0; i < 2000; ++i) {
    double x = u(rng);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    double y = *f.filter(x, i / 60.0);
    CHECK(y >= lo - 1e-9);
    CHECK(y <= hi + 1e-9);
  }
}

TEST_CASE("larger beta lags less on a fast ramp") {
  auto lag = [](double beta) {
    OneEuroFilter f({1.0, beta, 1.0});
    double total = 0.0;
    for (int i = 0; i < 300; ++i) {
      double x = 400.0 * i / 30.0;
      total += std::abs(x - *f.filter(x, i / 30.0));
    }
    return total / 300.0;
  };
  CHECK(lag(0.05) < lag(0.0));
  CHECK(lag(0.5) < lag(0.05));
}

TEST_CASE("pose filter") {
  PoseFilter pf;
  auto a = pf.filter(still_pose(0.0));
  REQUIRE(a);
  CHECK(a->keypoints[3].x == still_pose(0.0).keypoints[3].x);
  CHECK_FALSE(pf.filter(still_pose(0.0)).has_value());
  auto b = pf.filter(still_pose(0.1));
  REQUIRE(b);
  CHECK(b->keypoints[13].x == still_pose(0.1).keypoints[13].x);
  CHECK(to_string(Joint::right_shoulder) == "right_shoulder");
  CHECK(to_string(Joint::neck) == "neck");
  CHECK(static_cast<int>(Joint::head_top) == 12);
}

TEST_CASE("segmentation") {
  SUBCASE("stationary window is one REST") {
    std::vector<PoseFrame> w;
    for (int i = 0; i < 60; ++i) w.push_back(still_pose(i / 30.0));
    auto ph = segment_motion(w);
    REQUIRE(ph.size() == 1);
    CHECK(ph[0].kind == PhaseKind::rest);
    CHECK(ph[0].begin == 0);
    CHECK(ph[0].end == 60);
  }
  SUBCASE("still, move, still") {
    std::vector<PoseFrame> w;
    for (int i = 0; i < 90; ++i) {
      auto f = still_pose(i / 30.0);
      double dx = i < 30 ? 0.0 : (i < 60 ? (i - 30) * 10.0 : 300.0);  // 300 px/s between frames 30 and 60
      f[Joint::right_wrist].x += dx;
      w.push_back(f);
    }
    auto ph = segment_motion(w);
    REQUIRE(ph.size() == 3);
    CHECK(ph[0].kind == PhaseKind::rest);
    CHECK(ph[1].kind == PhaseKind::flight);
    CHECK(ph[2].kind == PhaseKind::rest);
    CHECK(std::abs(static_cast<int>(ph[1].begin) - 31) <= 1);
    CHECK(std::abs(static_cast<int>(ph[2].begin) - 61) <= 1);
  }
  SUBCASE("jitter below the low threshold stays REST") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.7, 0.7);  // < 60 px/s at 30 Hz even doubled
    std::vector<PoseFrame> w;
    for (int i = 0; i < 90; ++i) {
      auto f = still_pose(i / 30.0);
      f[Joint::left_wrist].x += u(rng);
      w.push_back(f);
    }
    CHECK(segment_motion(w).size() == 1);
  }
  SUBCASE("short bursts are merged") {
    std::vector<PoseFrame> w;
    for (int i = 0; i < 60; ++i) {
      auto f = still_pose(i / 30.0);
      if (i >= 20) f[Joint::right_wrist].x += 30.0;  // one-frame jump
      w.push_back(f);
    }
    CHECK(segment_motion(w).size() == 1);
  }
  CHECK_THROWS_AS(segment_motion(std::vector<PoseFrame>{}), PreconditionError);
}

TEST_CASE("property: phases tile every window and alternate") {
  const Gesture kinds[] = {Gesture::wave, Gesture::grasp, Gesture::pause, Gesture::stop, Gesture::none};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = synth_gesture(kinds[seed % 5], 2.0, seed);
    PoseFilter pf;
    std::vector<PoseFrame> frames;
    for (const auto& f : s.frames) frames.push_back(*pf.filter(f));
    for (std::size_t start = 0; start + 10 < frames.size(); start += 7) {
      std::span<const PoseFrame> w(frames.data() + start, std::min<std::size_t>(90, frames.size() - start));
      auto ph = segment_motion(w);
      REQUIRE(!ph.empty());
      CHECK(ph.front().begin == 0);
      CHECK(ph.back().end == w.size());
      CHECK(ph.front().start == w.front().timestamp);
      CHECK(ph.back().stop == w.back().timestamp);
      for (std::size_t k = 1; k < ph.size(); ++k) {
        CHECK(ph[k].begin == ph[k - 1].end);
        CHECK(ph[k].start == ph[k - 1].stop);
        CHECK(ph[k].kind != ph[k - 1].kind);
      }
    }
  }
}

TEST_CASE("noise-free synthetic gestures classify as generated") {
  for (auto g : {Gesture::wave, Gesture::grasp, Gesture::pause, Gesture::stop, Gesture::none}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = synth_gesture(g, 0.0, seed);
      GestureDetector det;
      Gesture got = Gesture::none;
      for (const auto& f : s.frames) {
        if (auto e = det.push(f)) {
          got = e->gesture;
          break;
        }
      }
      CHECK_MESSAGE(got == g, to_string(g), " seed ", seed);
    }
  }
}

TEST_CASE("stationary seated pose is none") {
  std::vector<PoseFrame> w;
  for (int i = 0; i < 90; ++i) w.push_back(still_pose(i / 30.0));
  CHECK(classify_gesture(segment_motion(w), w) == Gesture::none);
}

TEST_CASE("synthetic gestures are reproducible") {
  auto a = synth_gesture(Gesture::wave, 2.0, 42);
  auto b = synth_gesture(Gesture::wave, 2.0, 42);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) CHECK(a.frames[i].keypoints[2].x == b.frames[i].keypoints[2].x);
}

TEST_CASE("detector emits once per held gesture and honours the refractory period") {
  auto s = synth_gesture(Gesture::pause, 1.0, 8);
  // Cut the stream mid-hold and keep holding still for three more seconds.
  GestureDetector det;
  std::vector<GestureEvent> events;
  const std::size_t mid = s.frames.size() / 2;
  for (std::size_t i = 0; i <= mid; ++i) {
    if (auto e = det.push(s.frames[i])) events.push_back(*e);
  }
  auto held = s.frames[mid];
  for (int i = 1; i <= 90; ++i) {
    held.timestamp = s.frames[mid].timestamp + i / 30.0;
    if (auto e = det.push(held)) events.push_back(*e);
  }
  REQUIRE(events.size() == 1);
  CHECK(events[0].gesture == Gesture::pause);
}
