#pragma once

#include <string>
#include <vector>

namespace groundbot {

// Change in the set of objects on the table, plus any gestures observed since
// the previous diff. Produced by perception or by direct table mutation.
struct WorldDiff {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  std::vector<std::string> gestures;

  bool empty() const { return added.empty() && removed.empty() && gestures.empty(); }
  bool operator==(const WorldDiff&) const = default;
};

}  // namespace groundbot
