#include "groundbot/perception/scene.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

#include "groundbot/core/errors.hpp"

namespace groundbot::perception {

BBox object_box(const SceneObject& object, std::size_t frame, std::size_t frames) {
  const auto& wp = object.waypoints;
  if (wp.size() == 1 || frames <= 1) return wp.front();
  double u = static_cast<double>(frame) / static_cast<double>(frames - 1) * static_cast<double>(wp.size() - 1);
  std::size_t k = std::min(static_cast<std::size_t>(u), wp.size() - 2);
  double f = u - static_cast<double>(k);
  const auto& a = wp[k];
  const auto& b = wp[k + 1];
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.w + f * (b.w - a.w), a.h + f * (b.h - a.h)};
}

std::vector<std::vector<Detection>> synth_scene(const Scenario& s) {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(s.flicker_p) || !prob_ok(s.label_noise_p)) throw PreconditionError("probabilities must be in [0, 1]");
  if (s.jitter < 0.0) throw PreconditionError("jitter must be non-negative");
  for (const auto& o : s.objects) {
    if (o.waypoints.empty()) throw PreconditionError("object without waypoints: " + o.label);
  }

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<Detection>> out(s.frames);
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const auto& o = s.objects[i];
      // Draw every random number regardless of outcome so streams stay aligned across settings.
      double drop = unit(rng);
      double confuse = unit(rng);
      double pick = unit(rng);
      double score = 0.5 + 0.45 * unit(rng);
      double jx = noise(rng), jy = noise(rng), jw = noise(rng), jh = noise(rng);
      if (f < o.appear || f >= o.disappear) continue;
      if (s.flicker_p > 0.0 && drop < s.flicker_p) continue;
      Detection d;
      d.frame = f;
      d.truth = static_cast<int>(i);
      d.bbox = object_box(o, f, s.frames);
      d.bbox.x += s.jitter * jx;
      d.bbox.y += s.jitter * jy;
      d.bbox.w = std::max(1e-4, d.bbox.w + s.jitter * jw);
      d.bbox.h = std::max(1e-4, d.bbox.h + s.jitter * jh);
      d.score = score;
      d.label = o.label;
      if (s.label_noise_p > 0.0 && confuse < s.label_noise_p && !o.confusions.empty()) {
        auto k = std::min(static_cast<std::size_t>(pick * static_cast<double>(o.confusions.size())),
                          o.confusions.size() - 1);
        d.label = o.confusions[k];
        d.score *= 0.8;
      }
      out[f].push_back(std::move(d));
    }
  }
  return out;
}

Scenario scenario_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  Scenario s;
  s.frames = j.value("frames", s.frames);
  s.flicker_p = j.value("flicker_p", 0.0);
  s.label_noise_p = j.value("label_noise_p", 0.0);
  s.jitter = j.value("jitter", 0.0);
  s.seed = j.value("seed", std::uint64_t{1});
  for (const auto& jo : j.at("objects")) {
    SceneObject o;
    o.label = jo.at("label").get<std::string>();
    for (const auto& w : jo.at("waypoints")) {
      if (w.size() != 4) throw PreconditionError("waypoint needs [x, y, w, h]");
      o.waypoints.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()});
    }
    o.confusions = jo.value("confusions", std::vector<std::string>{});
    o.appear = jo.value("appear", std::size_t{0});
    o.disappear = jo.value("disappear", SIZE_MAX);
    s.objects.push_back(std::move(o));
  }
  return s;
}

}  // namespace groundbot::perception
