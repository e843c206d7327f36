#include <doctest.h>

#include <algorithm>

#include "kslab/cli.hpp"
#include "kslab/errors.hpp"

using namespace kslab;
using namespace kslab::cli;

namespace {

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

verification::CheckReport sample_report() {
  verification::CheckReport r;
  r.check_id = "demo";
  r.at_most("p=2", 1.0, 2.0);
  r.at_most("p=4, j=3", 0.5, 1.0);
  r.fits.push_back(verification::fit_log2("decay", {1, 2, 4}, {1, 0.5, 0.25}, -1.0, 0.1));
  r.constant("C", 1.25);
  return r;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config("{}");
  CHECK(c.grid.d == 2);
  CHECK(c.construction.r == 1.0);
  CHECK(c.solver.integrator == evolution::Integrator::if_rk4);
  CHECK(c.checks.seed == 12);
  const auto d = parse_config(dump_config(c));
  CHECK(dump_config(d) == dump_config(c));
}

TEST_CASE("comments are accepted") {
  CHECK_NOTHROW(parse_config("{\n  // seed only\n  \"checks\": {\"seed\": 5}\n}"));
}

TEST_CASE("violations carry file, line and key") {
  const auto v = violations_of("{\n  \"construction\": {\n    \"r\": 2\n  }\n}");
  REQUIRE(!v.empty());
  CHECK(any_contains(v, "cfg.json:3: construction.r"));
}

TEST_CASE("a too wide beta names the support inequality") {
  const auto v = violations_of("{\"construction\": {\"beta\": 2.0}}");
  CHECK(any_contains(v, "construction.beta"));
  CHECK(any_contains(v, "support constraint"));
}

TEST_CASE("unknown keys and bad values are all reported") {
  const auto v = violations_of("{\"solver\": {\"bogus\": 1, \"integrator\": \"euler\"}, \"grid\": {\"points_per_axis\": 100}}");
  CHECK(any_contains(v, "solver.bogus"));
  CHECK(any_contains(v, "solver.integrator"));
  CHECK(any_contains(v, "grid.points_per_axis"));
  CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
}

TEST_CASE("check report csv") {
  const auto r = sample_report();
  const auto csv = report_csv(r);
  CHECK(csv.rfind("check_id,kind,params,lhs,rhs,slack,pass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\"p=4, j=3\"") != std::string::npos);
  CHECK(report_csv(sample_report()) == csv);
  CHECK(report_json(r).find("\"check_id\": \"demo\"") != std::string::npos);
  CHECK(report_summary(r).find("verdict: pass") != std::string::npos);
}

TEST_CASE("experiment series names") {
  verification::ExperimentReport rep;
  verification::ExperimentRecord a;
  a.count = 1;
  a.u0_norm = 1.0;
  rep.records.push_back(a);
  const auto s = experiment_series(rep);
  REQUIRE(s.size() == 4);
  CHECK(s[0].name == "data_norm vs count");
  CHECK(s[1].name == "solution_norm vs count");
  CHECK(s[2].name == "U2 restricted vs count");
  CHECK(s[3].name == "U2 restricted vs epsilon");
  CHECK(series_csv(s[0]).find("# data_norm vs count") == 0);
}

TEST_CASE("fnv1a test vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("bad command lines exit with the usage code") {
  const char* argv[] = {"kslab", "no-such-command"};
  CHECK(run(2, const_cast<char**>(argv)) == 2);
}
