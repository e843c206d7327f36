#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kslab/cli.hpp"
#include "kslab/errors.hpp"

namespace kslab::cli {

using json = nlohmann::ordered_json;

namespace {

// 1-based line of `"key"` inside `"section"`, or 0 when it cannot be found.
int line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::size_t from = 0;
  if (!section.empty()) {
    from = text.find('"' + section + '"');
    if (from == std::string::npos) return 0;
  }
  const std::size_t at = key.empty() ? from : text.find('"' + key + '"', from);
  if (at == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  void fail(const std::string& section, const std::string& key, const std::string& msg) {
    const int line = line_of(text_, section, key);
    std::string where = origin_;
    if (line > 0) where += ":" + std::to_string(line);
    const std::string name = section.empty() ? key : key.empty() ? section : section + "." + key;
    errors.push_back(where + ": " + name + ": " + msg);
  }

  template <class T>
  void get(const json& block, const std::string& section, const std::string& key, T& out) {
    if (!block.contains(key)) return;
    try {
      out = block.at(key).get<T>();
    } catch (const std::exception&) {
      fail(section, key, "has the wrong type (" + std::string(block.at(key).type_name()) + ")");
    }
  }

  void known(const json& block, const std::string& section, std::initializer_list<const char*> keys) {
    if (!block.is_object()) {
      fail(section, "", "must be an object");
      return;
    }
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : block.items())
      if (!ok.count(k)) fail(section, k, "unknown key");
  }

  std::vector<std::string> errors;

 private:
  const std::string& text_;
  std::string origin_;
};

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw ParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!root.is_object()) throw ParseError(origin + ": top level must be an object");

  ExperimentConfig cfg;
  Reader rd(text, origin);
  rd.known(root, "", {"grid", "construction", "solver", "checks", "output"});

  if (root.contains("grid")) {
    const json& b = root["grid"];
    rd.known(b, "grid", {"d", "points_per_axis", "box_length"});
    if (b.is_object()) {
      rd.get(b, "grid", "d", cfg.grid.d);
      rd.get(b, "grid", "points_per_axis", cfg.grid.points_per_axis);
      rd.get(b, "grid", "box_length", cfg.grid.box_length);
    }
  }
  if (root.contains("construction")) {
    const json& b = root["construction"];
    rd.known(b, "construction", {"r", "m", "m_sweep", "K", "count_sweep", "beta", "offsets",
                                 "count_factor", "separation_gap", "separation_units"});
    if (b.is_object()) {
      auto& c = cfg.construction;
      rd.get(b, "construction", "r", c.r);
      rd.get(b, "construction", "m", c.m);
      rd.get(b, "construction", "m_sweep", c.m_sweep);
      rd.get(b, "construction", "K", c.K);
      rd.get(b, "construction", "count_sweep", c.count_sweep);
      rd.get(b, "construction", "beta", c.beta);
      rd.get(b, "construction", "count_factor", c.count_factor);
      rd.get(b, "construction", "separation_gap", c.separation_gap);
      if (b.contains("offsets")) {
        const json& o = b["offsets"];
        if (o.is_string() && o.get<std::string>() == "auto") {
          c.offsets.reset();
        } else {
          std::vector<double> v;
          rd.get(b, "construction", "offsets", v);
          c.offsets = v;
        }
      }
      if (b.contains("separation_units") && !b["separation_units"].is_null()) {
        double u = 0.0;
        rd.get(b, "construction", "separation_units", u);
        c.separation_units = u;
      }
    }
  }
  if (root.contains("solver")) {
    const json& b = root["solver"];
    rd.known(b, "solver", {"integrator", "steps", "dealias_fraction", "quadrature_nodes", "time_steps", "epsilon",
                           "epsilon_sweep"});
    if (b.is_object()) {
      auto& s = cfg.solver;
      if (b.contains("integrator")) {
        std::string name;
        rd.get(b, "solver", "integrator", name);
        try {
          s.integrator = evolution::parse_integrator(name);
        } catch (const Error& e) {
          rd.fail("solver", "integrator", e.what());
        }
      }
      rd.get(b, "solver", "steps", s.steps);
      rd.get(b, "solver", "dealias_fraction", s.dealias_fraction);
      rd.get(b, "solver", "quadrature_nodes", s.quadrature_nodes);
      rd.get(b, "solver", "time_steps", s.time_steps);
      if (b.contains("epsilon") && b["epsilon"].is_number()) {
        s.epsilon = {b["epsilon"].get<double>()};
      } else {
        rd.get(b, "solver", "epsilon", s.epsilon);
      }
      rd.get(b, "solver", "epsilon_sweep", s.epsilon_sweep);
    }
  }
  if (root.contains("checks")) {
    const json& b = root["checks"];
    rd.known(b, "checks", {"enabled", "corpus_size", "seed"});
    if (b.is_object()) {
      rd.get(b, "checks", "enabled", cfg.checks.enabled);
      rd.get(b, "checks", "corpus_size", cfg.checks.corpus_size);
      rd.get(b, "checks", "seed", cfg.checks.seed);
    }
  }
  if (root.contains("output")) {
    const json& b = root["output"];
    rd.known(b, "output", {"directory", "formats"});
    if (b.is_object()) {
      rd.get(b, "output", "directory", cfg.output.directory);
      rd.get(b, "output", "formats", cfg.output.formats);
    }
  }

  // Semantic checks report the line of the key they concern.
  for (const std::string& v : validate(cfg)) {
    const auto dot = v.find('.');
    const auto colon = v.find(':');
    if (dot != std::string::npos && colon != std::string::npos && dot < colon)
      rd.fail(v.substr(0, dot), v.substr(dot + 1, colon - dot - 1), v.substr(colon + 2));
    else
      rd.fail("", "", v);
  }
  if (!rd.errors.empty()) throw ValidationError(rd.errors);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> v;
  const auto& g = cfg.grid;
  const auto& c = cfg.construction;
  const auto& s = cfg.solver;
  if (g.d < 2 || g.d > 3) v.push_back("grid.d: must be 2 or 3, got " + std::to_string(g.d));
  if (g.points_per_axis != 0 && (g.points_per_axis < 4 || !is_pow2(g.points_per_axis)))
    v.push_back("grid.points_per_axis: must be 0 (automatic) or a power of two >= 4, got " +
                std::to_string(g.points_per_axis));
  if (!(g.box_length >= 0.0)) v.push_back("grid.box_length: must be >= 0");
  if (c.K.empty()) v.push_back("construction.K: must contain at least one scale");
  if (c.offsets && c.offsets->size() != c.K.size())
    v.push_back("construction.offsets: needs one entry per scale in K or \"auto\"");
  for (std::size_t i = 0; i < c.count_sweep.size(); ++i) {
    if (c.count_sweep[i] < 1) v.push_back("construction.count_sweep: counts must be >= 1");
    if (i > 0 && c.count_sweep[i] <= c.count_sweep[i - 1])
      v.push_back("construction.count_sweep: counts must be strictly increasing");
  }
  if (c.separation_units && !(*c.separation_units > 0.0))
    v.push_back("construction.separation_units: must be positive");
  if (!(s.dealias_fraction > 0.0 && s.dealias_fraction <= 1.0))
    v.push_back("solver.dealias_fraction: must lie in (0, 1]");
  if (s.steps < 0) v.push_back("solver.steps: must be >= 0");
  if (s.quadrature_nodes < 1) v.push_back("solver.quadrature_nodes: must be >= 1");
  if (s.time_steps < 1) v.push_back("solver.time_steps: must be >= 1");
  if (s.epsilon.empty()) v.push_back("solver.epsilon: needs at least one value");
  for (double e : s.epsilon)
    if (!(e > 0.0)) v.push_back("solver.epsilon: values must be positive");
  for (double e : s.epsilon_sweep)
    if (!(e > 0.0)) v.push_back("solver.epsilon_sweep: values must be positive");
  const auto ids = verification::check_ids();
  for (const auto& id : cfg.checks.enabled)
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) v.push_back("checks.enabled: unknown check id '" + id + "'");
  if (cfg.checks.corpus_size < 0) v.push_back("checks.corpus_size: must be >= 0");
  for (const auto& f : cfg.output.formats)
    if (f != "csv" && f != "json") v.push_back("output.formats: unknown format '" + f + "' (csv or json)");
  if (cfg.output.directory.empty()) v.push_back("output.directory: must not be empty");

  // Construction inequalities, each attributed to the key it mostly concerns.
  if (g.d >= 2 && g.d <= 3 && (!c.offsets || c.offsets->size() == c.K.size())) {
    const Setup st = setup_from(cfg);
    for (const auto& msg : construction::violations(st.params, st.spec)) {
      std::string key = "K";
      if (msg.find("r <") != std::string::npos) key = "r";
      else if (msg.find("beta") != std::string::npos) key = "beta";
      else if (msg.find("plateau") != std::string::npos || msg.find("dimension") != std::string::npos) key = "";
      v.push_back(key.empty() ? "grid.d: " + msg : "construction." + key + ": " + msg);
    }
  }
  return v;
}

Setup setup_from(const ExperimentConfig& cfg) {
  Setup st;
  const auto& c = cfg.construction;
  st.params.d = cfg.grid.d;
  st.params.r = c.r;
  st.params.m = c.m;
  st.params.K = c.K;
  st.params.count_factor = c.count_factor;
  st.params.separation_gap = c.separation_gap;
  st.spec.beta = c.beta;
  if (c.offsets) {
    st.params.offsets = *c.offsets;
  } else {
    const double sep = st.params.effective_min_separation(st.spec);
    st.params.offsets.clear();
    for (std::size_t i = 0; i < c.K.size(); ++i) st.params.offsets.push_back(static_cast<double>(i) * sep);
  }
  return st;
}

namespace {

Setup with_grid(const ExperimentConfig& cfg, Setup st) {
  const int d = st.params.d;
  const double base = 8.0 * std::numbers::pi / (st.spec.beta * std::exp2(st.params.k_min()));
  const double span = st.params.offsets.empty()
                          ? 0.0
                          : *std::max_element(st.params.offsets.begin(), st.params.offsets.end()) -
                                *std::min_element(st.params.offsets.begin(), st.params.offsets.end());
  if (cfg.grid.points_per_axis > 0 && cfg.grid.box_length > 0.0) {
    st.grid = construction::snapped_grid(st.params, st.spec, std::vector<int>(static_cast<std::size_t>(d), cfg.grid.points_per_axis),
                                         std::vector<double>(static_cast<std::size_t>(d), cfg.grid.box_length));
    return st;
  }
  std::vector<double> lengths(static_cast<std::size_t>(d), cfg.grid.box_length > 0.0 ? cfg.grid.box_length : base);
  if (cfg.grid.box_length <= 0.0) lengths[0] = base + span;
  const auto fam = verification::make_family(st.params, st.spec, lengths);
  st.grid = fam.grid;
  return st;
}

}  // namespace

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["grid"] = {{"d", cfg.grid.d}, {"points_per_axis", cfg.grid.points_per_axis}, {"box_length", cfg.grid.box_length}};
  const auto& c = cfg.construction;
  json cb;
  cb["r"] = c.r;
  cb["m"] = c.m;
  cb["m_sweep"] = c.m_sweep;
  cb["K"] = c.K;
  cb["count_sweep"] = c.count_sweep;
  cb["beta"] = c.beta;
  if (c.offsets) cb["offsets"] = *c.offsets;
  else cb["offsets"] = "auto";
  cb["count_factor"] = c.count_factor;
  cb["separation_gap"] = c.separation_gap;
  if (c.separation_units) cb["separation_units"] = *c.separation_units;
  else cb["separation_units"] = nullptr;
  j["construction"] = cb;
  const auto& s = cfg.solver;
  j["solver"] = {{"integrator", evolution::to_string(s.integrator)},
                 {"steps", s.steps},
                 {"dealias_fraction", s.dealias_fraction},
                 {"quadrature_nodes", s.quadrature_nodes},
                 {"time_steps", s.time_steps},
                 {"epsilon", s.epsilon},
                 {"epsilon_sweep", s.epsilon_sweep}};
  j["checks"] = {{"enabled", cfg.checks.enabled}, {"corpus_size", cfg.checks.corpus_size}, {"seed", cfg.checks.seed}};
  j["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
  return j.dump(2) + "\n";
}

Setup setup_with_grid(const ExperimentConfig& cfg) { return with_grid(cfg, setup_from(cfg)); }

}  // namespace kslab::cli
