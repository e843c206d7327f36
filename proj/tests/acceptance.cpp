// Runs the ten acceptance criteria and prints one verdict line per criterion.
// Usage: kslab_acceptance [criterion ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kslab/cli.hpp"
#include "kslab/verification.hpp"

using namespace kslab;
using verification::CheckReport;

namespace {

constexpr std::uint64_t kSeed = 12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fold(Outcome& o, const CheckReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s worst_slack=%.4g", r.check_id.c_str(), r.worst_slack());
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += buf;
  if (!r.passed()) {
    o.pass = false;
    o.detail += " [" + r.first_failure() + "]";
  }
}

Outcome checks(const std::vector<std::string>& ids) {
  Outcome o;
  for (const auto& id : ids) fold(o, verification::run_check(id, kSeed));
  return o;
}

Outcome corpora() {
  Outcome o;
  for (const char* id : {"bernstein", "embedding", "heat-regularity", "product-laws"}) {
    const auto a = verification::run_check(id, kSeed);
    fold(o, a);
    for (const auto& [name, v] : a.constants)
      if (!std::isfinite(v)) {
        o.pass = false;
        o.detail += " [non-finite constant " + name + "]";
      }
    if (a.constants.empty()) {
      o.pass = false;
      o.detail += " [no corpus constants recorded]";
    }
    // Same seed, byte-identical report.
    const auto b = verification::run_check(id, kSeed);
    if (cli::report_csv(a) != cli::report_csv(b)) {
      o.pass = false;
      o.detail += std::string(" [") + id + " not deterministic]";
    }
  }
  return o;
}

Outcome experiment() {
  verification::ExperimentConfig cfg;
  const auto rep = verification::run_discontinuity_experiment(cfg);
  Outcome o;
  fold(o, rep.check);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "LP frame", 60, [] { return checks({"lp-frame"}); }},
      {2, "block identity", 60, [] { return checks({"block-identity"}); }},
      {3, "corpus inequalities", 300, corpora},
      {4, "Duhamel closed form", 60, [] { return checks({"duhamel"}); }},
      {5, "Lp scaling", 300, [] { return checks({"lp-scaling"}); }},
      {6, "spectral vanishing", 120, [] { return checks({"spectral-vanishing"}); }},
      {7, "K1/K2", 120, [] { return checks({"k1-k2"}); }},
      {8, "solver validation", 300, [] { return checks({"solver"}); }},
      {9, "ladder validity", 600, [] { return checks({"ladder"}); }},
      {10, "discontinuity at zero", 1800, experiment},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += " [runtime over limit]";
    }
    std::printf("CRITERION %d: %s  (%s, %.1fs / %.0fs) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
