#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "groundbot/core/world_diff.hpp"
#include "groundbot/protocol/actions.hpp"

namespace groundbot::embodiment {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

// Table frame in meters. The user stands at the y_max edge.
struct TableBounds {
  double x_min = -0.6;
  double x_max = 0.6;
  double y_min = 0.0;
  double y_max = 0.8;

  bool contains(Vec2 p) const;
  Vec2 clamp(Vec2 p) const;
  double distance_to_user(Vec2 p) const { return y_max - p.y; }
};

struct TableObject {
  std::string name;
  Vec2 position;
  bool present = true;
  bool operator==(const TableObject&) const = default;
};

enum class ArmMode { idle, pointing, giving };

struct ArmAction {
  ArmMode mode = ArmMode::idle;
  std::string target;
  bool operator==(const ArmAction&) const = default;
};

struct RobotState {
  std::string expression = "neutral";
  std::optional<std::string> gaze_target;
  ArmAction arm;
  bool operator==(const RobotState&) const = default;
};

// Simulated motion lengths in seconds.
struct MotionDurations {
  double look = 0.5;
  double point = 1.5;
  double give = 3.0;
};

struct WorldConfig {
  TableBounds bounds;
  double give_push = 0.25;  // meters toward the user edge
  MotionDurations motion;
};

// Immutable point-in-time copy.
struct WorldView {
  std::vector<TableObject> objects;  // present objects only, in insertion order
  RobotState robot;
  TableBounds bounds;
  std::uint64_t version = 0;

  const TableObject* find(const std::string& name) const;
  std::vector<std::string> object_names() const;
};

enum class ActionErrorKind { object_not_present, unknown_action, bad_argument };

std::string_view to_string(ActionErrorKind kind);

class ActionError : public std::runtime_error {
 public:
  ActionError(ActionErrorKind kind, std::string action, std::string object);
  ActionErrorKind kind() const { return kind_; }
  const std::string& action() const { return action_; }
  const std::string& object() const { return object_; }

 private:
  ActionErrorKind kind_;
  std::string action_;
  std::string object_;
};

struct TableOp {
  enum class Kind { add, remove, move };
  Kind kind = Kind::add;
  std::string name;
  Vec2 position;

  static TableOp add(std::string name, Vec2 p) { return {Kind::add, std::move(name), p}; }
  static TableOp remove(std::string name) { return {Kind::remove, std::move(name), {}}; }
  static TableOp move(std::string name, Vec2 p) { return {Kind::move, std::move(name), p}; }
};

struct ActionEffect {
  double duration = 0.0;  // simulated motion time; 0 for expressions
  bool blocking = false;  // whether following speech waits on the motion
};

// Tabletop plus robot state. All members are safe to call concurrently;
// mutations are serialized and readers take snapshots.
class World {
 public:
  explicit World(WorldConfig config = {});

  // Throws PreconditionError (world unchanged) on a name conflict, an absent
  // object, an empty name or a position outside the table.
  WorldDiff mutate(const TableOp& op);

  // Applies the state change of an action at motion start. Throws ActionError.
  ActionEffect apply_action(const protocol::ActionCall& call);
  // Ends an arm motion started by point or give.
  void finish_action(const protocol::ActionCall& call);

  WorldView snapshot() const;
  const WorldConfig& config() const { return config_; }

 private:
  const TableObject* present(const std::string& name) const;
  TableObject* present(const std::string& name);

  WorldConfig config_;
  mutable std::mutex mutex_;
  std::vector<TableObject> objects_;
  RobotState robot_;
  std::uint64_t version_ = 0;
};

}  // namespace groundbot::embodiment
