#include "groundbot/embodiment/world.hpp"

#include <algorithm>

#include "groundbot/core/errors.hpp"
#include "groundbot/core/text.hpp"

namespace groundbot::embodiment {

bool TableBounds::contains(Vec2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }

Vec2 TableBounds::clamp(Vec2 p) const { return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)}; }

const TableObject* WorldView::find(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

std::vector<std::string> WorldView::object_names() const {
  std::vector<std::string> out;
  for (const auto& o : objects) out.push_back(o.name);
  return out;
}

std::string_view to_string(ActionErrorKind kind) {
  switch (kind) {
    case ActionErrorKind::object_not_present: return "OBJECT_NOT_PRESENT";
    case ActionErrorKind::unknown_action: return "UNKNOWN_ACTION";
    case ActionErrorKind::bad_argument: return "BAD_ARGUMENT";
  }
  return "?";
}

ActionError::ActionError(ActionErrorKind kind, std::string action, std::string object)
    : std::runtime_error(std::string(to_string(kind)) + ": " + action + "(" + object + ")"),
      kind_(kind),
      action_(std::move(action)),
      object_(std::move(object)) {}

World::World(WorldConfig config) : config_(config) {
  const auto& b = config_.bounds;
  if (!(b.x_min < b.x_max && b.y_min < b.y_max)) throw ConfigError("table bounds are empty");
  if (config_.give_push <= 0.0) throw ConfigError("give push distance must be positive");
}

const TableObject* World::present(const std::string& name) const {
  for (const auto& o : objects_)
    if (o.present && o.name == name) return &o;
  return nullptr;
}

TableObject* World::present(const std::string& name) {
  return const_cast<TableObject*>(std::as_const(*this).present(name));
}

WorldDiff World::mutate(const TableOp& op) {
  std::lock_guard lock(mutex_);
  const std::string name(text::trim(op.name));
  if (name.empty()) throw PreconditionError("object name must be nonempty");
  WorldDiff diff;
  switch (op.kind) {
    case TableOp::Kind::add: {
      if (present(name)) throw PreconditionError("object already on the table: " + name);
      if (!config_.bounds.contains(op.position)) throw PreconditionError("position outside the table: " + name);
      std::erase_if(objects_, [&](const TableObject& o) { return o.name == name; });
      objects_.push_back({name, op.position, true});
      diff.added.push_back(name);
      break;
    }
    case TableOp::Kind::remove: {
      auto* o = present(name);
      if (!o) throw PreconditionError("object not on the table: " + name);
      o->present = false;
      diff.removed.push_back(name);
      break;
    }
    case TableOp::Kind::move: {
      auto* o = present(name);
      if (!o) throw PreconditionError("object not on the table: " + name);
      if (!config_.bounds.contains(op.position)) throw PreconditionError("position outside the table: " + name);
      o->position = op.position;
      break;
    }
  }
  ++version_;
  return diff;
}

ActionEffect World::apply_action(const protocol::ActionCall& call) {
  std::lock_guard lock(mutex_);
  const auto& arg = call.argument;
  if (call.action == "express") {
    const auto& emotions = protocol::emotion_names();
    if (std::find(emotions.begin(), emotions.end(), arg) == emotions.end()) {
      throw ActionError(ActionErrorKind::bad_argument, call.action, arg);
    }
    robot_.expression = arg;
    ++version_;
    return {0.0, false};
  }
  if (call.action == "look") {
    if (arg != "user" && arg != "hand" && arg != "table" && !present(arg)) {
      throw ActionError(ActionErrorKind::object_not_present, call.action, arg);
    }
    robot_.gaze_target = arg;
    ++version_;
    return {config_.motion.look, true};
  }
  if (call.action == "point") {
    if (arg != "user" && arg != "table" && !present(arg)) {
      throw ActionError(ActionErrorKind::object_not_present, call.action, arg);
    }
    robot_.arm = {ArmMode::pointing, arg};
    ++version_;
    return {config_.motion.point, true};
  }
  if (call.action == "give") {
    auto* o = present(arg);
    if (!o) throw ActionError(ActionErrorKind::object_not_present, call.action, arg);
    o->position = config_.bounds.clamp({o->position.x, o->position.y + config_.give_push});
    robot_.arm = {ArmMode::giving, arg};
    ++version_;
    return {config_.motion.give, true};
  }
  throw ActionError(ActionErrorKind::unknown_action, call.action, arg);
}

void World::finish_action(const protocol::ActionCall& call) {
  std::lock_guard lock(mutex_);
  if ((call.action == "point" || call.action == "give") && robot_.arm.target == call.argument) {
    robot_.arm = {};
    ++version_;
  }
}

WorldView World::snapshot() const {
  std::lock_guard lock(mutex_);
  WorldView v;
  for (const auto& o : objects_)
    if (o.present) v.objects.push_back(o);
  v.robot = robot_;
  v.bounds = config_.bounds;
  v.version = version_;
  return v;
}

}  // namespace groundbot::embodiment
