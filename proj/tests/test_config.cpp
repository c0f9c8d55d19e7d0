#include <polydg/config.hpp>

#include <doctest.h>

#include <sstream>

using namespace polydg;

namespace
{
  Config parse(const std::string &text)
  {
    std::istringstream in(text);
    return Config::from_stream(in);
  }
} // namespace

TEST_CASE("sections, comments and whitespace parse")
{
  const Config cfg = parse("# leading comment\n"
                           "top = 1\n"
                           "\n"
                           "[mesh]\n"
                           "  n_elements = 30 100   # trailing comment\n"
                           "  seed=42\n"
                           "[time]\n"
                           "dt = 0.1 0.05\n"
                           "t_end = 1.0\n");
  CHECK(cfg.get_int("top", 0) == 1);
  CHECK(cfg.get_ints("mesh.n_elements", {}) == std::vector<int>{30, 100});
  CHECK(cfg.get_int64("mesh.seed", 0) == 42);
  const std::vector<Real> dts = cfg.get_reals("time.dt", {});
  REQUIRE(dts.size() == 2);
  CHECK(dts[0] == 0.1);
  CHECK(dts[1] == 0.05);
  CHECK(cfg.get_real("time.t_end", 0.0) == 1.0);
  CHECK(cfg.has("time.dt"));
  CHECK_FALSE(cfg.has("time.theta"));
}

TEST_CASE("typed accessors fall back and validate")
{
  const Config cfg = parse("[a]\n"
                           "x = 2.5\n"
                           "flag = yes\n"
                           "bad_int = 3.7\n"
                           "bad_bool = maybe\n"
                           "bad_real = 1.2.3\n");
  CHECK(cfg.get_real("a.x", 0.0) == 2.5);
  CHECK(cfg.get_real("a.missing", -1.0) == -1.0);
  CHECK(cfg.get_bool("a.flag", false));
  CHECK(cfg.get_bool("a.missing_flag", true));
  CHECK(cfg.get_string("a.missing_str", "dflt") == "dflt");
  CHECK_THROWS_AS(cfg.get_int("a.bad_int", 0), std::invalid_argument);
  CHECK_THROWS_AS(cfg.get_bool("a.bad_bool", false), std::invalid_argument);
  CHECK_THROWS_AS(cfg.get_real("a.bad_real", 0.0), std::invalid_argument);
}

TEST_CASE("malformed files report line numbers")
{
  try
    {
      parse("[ok]\nx = 1\nnot a key value line\n");
      FAIL("expected parse_error");
    }
  catch (const parse_error &e)
    {
      CHECK(e.line_number == 3);
    }

  CHECK_THROWS_AS(parse("[unclosed\nx = 1\n"), parse_error);
  CHECK_THROWS_AS(parse("= 3\n"), parse_error);
  CHECK_THROWS_AS(parse("[s]\nx = 1\nx = 2\n"), parse_error); // duplicate
}

TEST_CASE("unused keys are detected and rejected")
{
  const Config cfg = parse("[mesh]\nseed = 1\ntypo_key = 5\n");
  CHECK(cfg.get_int64("mesh.seed", 0) == 1);
  const auto unused = cfg.unused_keys();
  REQUIRE(unused.size() == 1);
  CHECK(unused[0] == "mesh.typo_key");
  CHECK_THROWS_AS(cfg.reject_unused(), std::invalid_argument);

  (void)cfg.get_int("mesh.typo_key", 0);
  CHECK_NOTHROW(cfg.reject_unused());
}

TEST_CASE("echo writes consumed keys grouped and sorted")
{
  const Config cfg = parse("[b]\ny = 2\n[a]\nx = 1\n");
  (void)cfg.get_int("a.x", 0);
  (void)cfg.get_int("b.y", 0);
  (void)cfg.get_real("b.z", 0.25); // default still echoed

  std::ostringstream out;
  cfg.echo(out);
  CHECK(out.str() == "[a]\nx = 1\n[b]\ny = 2\nz = 0.25\n");

  std::ostringstream again;
  cfg.echo(again);
  CHECK(out.str() == again.str());
}

TEST_CASE("echoed configuration reloads to the same values")
{
  const Config cfg = parse("[time]\ndt = 0.1\n[mesh]\nseed = 7\n");
  (void)cfg.get_real("time.dt", 0.0);
  (void)cfg.get_int64("mesh.seed", 0);
  (void)cfg.get_real("time.t_end", 2.0);

  std::ostringstream echoed;
  cfg.echo(echoed);
  const Config reloaded = parse(echoed.str());
  CHECK(reloaded.get_real("time.dt", -1.0) == 0.1);
  CHECK(reloaded.get_int64("mesh.seed", -1) == 7);
  CHECK(reloaded.get_real("time.t_end", -1.0) == 2.0);
}

TEST_CASE("programmatic overrides replace file values")
{
  Config cfg = parse("[output]\ndir = out\n");
  cfg.set("output.dir", "elsewhere");
  cfg.set("mesh.seed", "9");
  CHECK(cfg.get_string("output.dir", "") == "elsewhere");
  CHECK(cfg.get_int64("mesh.seed", 0) == 9);
}

TEST_CASE("missing files raise errors")
{
  CHECK_THROWS_AS(Config::from_file("/nonexistent/path.cfg"), parse_error);
}
