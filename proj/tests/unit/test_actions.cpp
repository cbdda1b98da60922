#include <doctest.h>

#include "groundbot/core/errors.hpp"
#include "groundbot/protocol/actions.hpp"

using namespace groundbot;
using namespace groundbot::protocol;

TEST_CASE("default registry lists the four actions in prompt order") {
  auto reg = default_registry();
  REQUIRE(reg.size() == 4);
  CHECK(reg.specs()[0].name == "express");
  CHECK(reg.specs()[1].name == "look");
  CHECK(reg.specs()[2].name == "point");
  CHECK(reg.specs()[3].name == "give");
  CHECK(reg.find("express")->domain == ArgDomain::enumerated);
  CHECK(reg.find("express")->choices == std::vector<std::string>{"neutral", "happiness", "sadness", "anger", "surprise"});
  CHECK(reg.find("look")->special_targets == std::vector<std::string>{"user", "hand", "table"});
  CHECK(reg.find("point")->special_targets == std::vector<std::string>{"user"});
}

TEST_CASE("registry rejects invalid specs") {
  ActionRegistry reg;
  CHECK_THROWS_AS(reg.add({"", "x", "d"}), ConfigError);
  CHECK_THROWS_AS(reg.add({"Point", "x", "d"}), ConfigError);
  CHECK_THROWS_AS(reg.add({"do thing", "x", "d"}), ConfigError);
  CHECK_THROWS_AS(reg.add({"mood", "x", "d", ArgDomain::enumerated, {}, {}}), ConfigError);
  reg.add({"wave_back", "target", "d"});
  CHECK_THROWS_AS(reg.add({"wave_back", "target", "d"}), ConfigError);
}

TEST_CASE("argument domains") {
  auto reg = default_registry();
  CHECK(argument_in_domain(*reg.find("express"), "sadness"));
  CHECK_FALSE(argument_in_domain(*reg.find("express"), "curiosity"));
  CHECK(argument_in_domain(*reg.find("give"), "red bowl"));
  CHECK_FALSE(argument_in_domain(*reg.find("give"), ""));
}
