#include "doctest.h"
#include "rlstorage/config.hpp"

using namespace rlstorage;

TEST_CASE("parse section.key = value lines") {
  const Config c = Config::parse(
      "# comment\n"
      "\n"
      "a.x = 1\n"
      "  a.y=  two words  \n"
      "b.list = 1, 2,3\n"
      "a.x = 5\n");
  CHECK(c.get_uint("a.x", 0) == 5);
  CHECK(c.get_string("a.y", "") == "two words");
  CHECK(c.get_uints("b.list", {}) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.get_double("a.missing", 2.5) == 2.5);
  CHECK(c.has("a.y"));
  CHECK_FALSE(c.has("a.z"));
}

TEST_CASE("typed getters reject malformed values") {
  const Config c = Config::parse("s.num = 1.5x\ns.neg = -3\ns.flag = maybe\ns.ok = yes\ns.list = 1,,2\n");
  CHECK_THROWS_AS(c.get_double("s.num", 0), ConfigError);
  CHECK_THROWS_AS(c.get_uint("s.neg", 0), ConfigError);
  CHECK_THROWS_AS(c.get_bool("s.flag", false), ConfigError);
  CHECK(c.get_bool("s.ok", false));
  CHECK_THROWS_AS(c.get_doubles("s.list", {}), ConfigError);
}

TEST_CASE("syntax errors name the line") {
  try {
    Config::parse("a.b = 1\nnot a setting\n", "x.conf");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x.conf:2") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("nodot = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/file.conf"), ConfigError);
}

TEST_CASE("unused keys and prefixes") {
  const Config c = Config::parse("p.a.x = 1\np.a.y = 2\np.b.x = 3\nq.z = 4\n");
  CHECK(c.keys_with_prefix("p.a.") == std::vector<std::string>{"p.a.x", "p.a.y"});
  c.get("q.z");
  CHECK(c.unused_keys() == std::vector<std::string>{"p.a.x", "p.a.y", "p.b.x"});
}

TEST_CASE("split_list and trim") {
  CHECK(split_list(" a , b,c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list("").empty());
  CHECK(trim("\t x y \r") == "x y");
}
