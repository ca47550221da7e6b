#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "scolab/config.hpp"

using namespace scolab;

namespace {

std::string error_key(const std::string& text, const Overrides& ov = {}) {
  try {
    parse_config_text(text, ov);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("empty input gives the defaults") {
  const LabConfig c = parse_config_text("");
  CHECK(c.m == 8);
  CHECK(c.k == 16);
  CHECK(c.trials == 500);
  CHECK(c.rho_target == 0.10);
  CHECK(c.brute_force_cap == 20);
  CHECK(c.lambda_value() == doctest::Approx(7.0 / std::pow(8.0, 1.5)));
  CHECK(c.suffix_value() == c.T / 2);
  const LabConfig d = parse_config("");
  CHECK(config_echo(c) == config_echo(d));
}

TEST_CASE("sections, comments and overrides") {
  const std::string text =
      "# lab settings\n[instance]\nmode = gd\n\n[gd]\neta = 0.05 ; step\nT = 400\n[harness]\nseed = 11\n";
  const LabConfig c = parse_config_text(text);
  CHECK(c.mode == Mode::kGd);
  CHECK(c.eta == 0.05);
  CHECK(c.T == 400);
  CHECK(c.seed == 11);
  const LabConfig o = parse_config_text(text, {{"T", "500"}, {"harness.seed", "3"}});
  CHECK(o.T == 500);
  CHECK(o.seed == 3);
}

TEST_CASE("GD mode needs eta T > sqrt(m)") {
  CHECK(error_key("[instance]\nmode = gd\n[gd]\neta = 0.1\nT = 28\n") == "gd.T");
  CHECK(error_key("[instance]\nmode = gd\n[gd]\neta = 0.1\nT = 29\n").empty());
}

TEST_CASE("k must be 2m unless explicitly allowed") {
  CHECK(error_key("", {{"k", "12"}}) == "instance.k");
  CHECK(error_key("", {{"k", "12"}, {"allow_nonstandard", "true"}}).empty());
}

TEST_CASE("ERM mode needs lambda <= 1/sqrt(m)") {
  CHECK(error_key("[instance]\nlambda = 0.5\n") == "instance.lambda");
}

TEST_CASE("unknown keys, bad values and bad sections name the key") {
  CHECK(error_key("[instance]\nfoo = 1\n") == "instance.foo");
  CHECK(error_key("[instance]\nm = eight\n") == "instance.m");
  CHECK(error_key("[gd]\nT = 1.5\n") == "gd.T");
  CHECK(error_key("[instance]\nmode = sgd\n") == "instance.mode");
  CHECK_THROWS_AS(parse_config_text("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[gd]\nnot a pair\n"), ConfigError);
  CHECK(error_key("", {{"bogus", "1"}}) == "bogus");
  CHECK_THROWS_AS(parse_config("/no/such/file.ini"), ConfigError);
}

TEST_CASE("echo covers relaxations and reproduces the config") {
  const LabConfig c = parse_config_text("", {{"gamma_m_margin", "0.95"}, {"trials", "17"}});
  const auto echo = config_echo(c);
  REQUIRE(echo.count("instance.gamma_m_margin"));
  CHECK(echo.at("instance.relax") == "true");
  std::string text;
  std::string section;
  for (const auto& [key, value] : echo) {
    const auto dot = key.find('.');
    if (key.substr(0, dot) != section) {
      section = key.substr(0, dot);
      text += "[" + section + "]\n";
    }
    text += key.substr(dot + 1) + " = " + value + "\n";
  }
  CHECK(config_echo(parse_config_text(text)) == echo);
}

TEST_CASE("config file on disk") {
  const auto path = std::filesystem::temp_directory_path() / "scolab_cfg_test.ini";
  {
    std::ofstream out(path);
    out << "[harness]\ntrials = 3\n";
  }
  CHECK(parse_config(path).trials == 3);
  CHECK(parse_config(path, {{"trials", "4"}}).trials == 4);
  std::filesystem::remove(path);
}
