#include <doctest.h>

#include <sstream>
#include <string>

#include "gwpi/config.hpp"
#include "gwpi/errors.hpp"

using namespace gwpi;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("parses both sections") {
  const auto cfg = parse(
      "# comment\n"
      "nu = 1\n"
      "c = 0.25   # trailing\n"
      "delta = 1\n"
      "\n"
      "[run]\n"
      "K = 256\n"
      "s_grid = 0, 0.5\n"
      "richardson = true\n");
  CHECK(cfg.model.nu == 1.0);
  CHECK(cfg.model.c == 0.25);
  CHECK(cfg.K == 256);
  CHECK(cfg.s_grid == std::vector<double>{0.0, 0.5});
  CHECK(cfg.richardson);
  const auto spec = cfg.model.build();
  CHECK(spec.c() == 0.25);
}

TEST_CASE("defaults give the default model") {
  const auto cfg = parse("");
  const auto spec = cfg.model.build();
  CHECK(spec.nu() == 0.5);
  CHECK(spec.delta() == 0.75);
  CHECK(cfg.grid().size() > 3);
}

TEST_CASE("error lines") {
  CHECK(error_line("nu = 0.5\nbogus = 1\n") == 2);
  CHECK(error_line("nu = 0.5\n\n[run]\nK = abc\n") == 4);
  CHECK(error_line("[nowhere]\n") == 1);
  CHECK(error_line("nu 0.5\n") == 1);
  CHECK(error_line("[run]\ns_grid = 0.2, 1.5\n") == 2);
  CHECK(error_line("[run]\nK = -3\n") == 2);
  CHECK(error_line("# c too large\nnu = 0.5\nc = 0.9\n") == 2);
}

TEST_CASE("range checks without a line") {
  CHECK_THROWS_AS(parse("[run]\nK = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[run]\ntol = 0\n"), ConfigError);
  CHECK(error_line("[run]\nworkers = 0\n") == 0);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("grid parsing") {
  CHECK(parse_grid("0.1,0.2 , 0.3") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_THROWS_AS(parse_grid("0.1,,0.2"), ConfigError);
  CHECK_THROWS_AS(parse_grid(""), ConfigError);
}
