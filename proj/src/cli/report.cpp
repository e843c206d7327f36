#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kslab/cli.hpp"
#include "kslab/errors.hpp"

namespace kslab::cli {

using json = nlohmann::ordered_json;
using verification::CheckReport;
using verification::ExperimentReport;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json num_json(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string report_csv(const CheckReport& rep) {
  std::ostringstream os;
  os << "check_id,kind,params,lhs,rhs,slack,pass\n";
  for (const auto& m : rep.measured)
    os << rep.check_id << ",measurement," << csv_field(m.params) << ',' << num(m.lhs) << ',' << num(m.rhs) << ','
       << num(m.slack) << ',' << (m.slack >= 1.0 ? 1 : 0) << '\n';
  for (const auto& f : rep.fits)
    os << rep.check_id << ",fit," << csv_field(f.name) << ',' << num(f.slope) << ',' << num(f.target) << ','
       << num(f.std_error) << ',' << (f.pass() ? 1 : 0) << '\n';
  return os.str();
}

std::string report_json(const CheckReport& rep) {
  json j;
  j["check_id"] = rep.check_id;
  j["passed"] = rep.passed();
  j["worst_slack"] = num_json(rep.worst_slack());
  json rows = json::array();
  for (const auto& m : rep.measured)
    rows.push_back({{"params", m.params}, {"lhs", num_json(m.lhs)}, {"rhs", num_json(m.rhs)}, {"slack", num_json(m.slack)}});
  j["measurements"] = rows;
  json fits = json::array();
  for (const auto& f : rep.fits)
    fits.push_back({{"name", f.name},
                    {"slope", num_json(f.slope)},
                    {"intercept", num_json(f.intercept)},
                    {"std_error", num_json(f.std_error)},
                    {"target", f.target},
                    {"band", f.band},
                    {"lower_bound_only", f.lower_bound_only},
                    {"points", f.points},
                    {"pass", f.pass()}});
  j["fits"] = fits;
  json consts = json::array();
  for (const auto& [k, v] : rep.constants) consts.push_back({{"name", k}, {"value", num_json(v)}});
  j["constants"] = consts;
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

std::string report_summary(const CheckReport& rep) {
  std::ostringstream os;
  os << "check: " << rep.check_id << '\n';
  os << "verdict: " << (rep.passed() ? "pass" : "fail") << '\n';
  os << "worst_slack: " << num(rep.worst_slack()) << '\n';
  if (!rep.passed()) os << "first_failure: " << rep.first_failure() << '\n';
  os << "measurements: " << rep.measured.size() << '\n';
  for (const auto& f : rep.fits)
    os << "fit: " << f.name << " slope=" << num(f.slope) << " stderr=" << num(f.std_error) << " target=" << num(f.target)
       << " band=" << num(f.band) << " pass=" << (f.pass() ? "yes" : "no") << '\n';
  for (const auto& [k, v] : rep.constants) os << "constant: " << k << " = " << num(v) << '\n';
  for (const auto& n : rep.notes) os << "note: " << n << '\n';
  return os.str();
}

std::vector<Series> experiment_series(const ExperimentReport& rep) {
  Series data{"data_norm vs count", "count", "u0 Besov norm", {}, {}};
  Series sol{"solution_norm vs count", "count", "u(t_n) Besov norm", {}, {}};
  Series u2{"U2 restricted vs count", "count", "U2 norm on K", {}, {}};
  Series eps{"U2 restricted vs epsilon", "epsilon", "U2 norm on K", {}, {}};
  for (const auto& r : rep.records) {
    data.x.push_back(r.count);
    data.y.push_back(r.u0_norm);
    if (r.excluded) continue;
    sol.x.push_back(r.count);
    sol.y.push_back(r.u_norm);
    u2.x.push_back(r.count);
    u2.y.push_back(r.U2_restricted);
  }
  for (const auto& r : rep.epsilon_records) {
    eps.x.push_back(r.epsilon);
    eps.y.push_back(r.U2_restricted);
  }
  return {data, sol, u2, eps};
}

std::string series_csv(const Series& s) {
  std::ostringstream os;
  os << "# " << s.name << '\n' << csv_field(s.x_label) << ',' << csv_field(s.y_label) << '\n';
  for (std::size_t i = 0; i < s.x.size(); ++i) os << num(s.x[i]) << ',' << num(s.y[i]) << '\n';
  return os.str();
}

std::string experiment_records_csv(const ExperimentReport& rep) {
  std::ostringstream os;
  os << "sweep,count,epsilon,t_n,u0_norm,v0_norm,u_norm,U1_norm,U3_norm,U2_restricted,U21_restricted,"
        "U22_restricted,U1_restricted,U3_restricted,defect,picard_iterations,excluded,reason\n";
  auto row = [&](const char* sweep, const verification::ExperimentRecord& r) {
    os << sweep << ',' << r.count << ',' << num(r.epsilon) << ',' << num(r.t_n) << ',' << num(r.u0_norm) << ','
       << num(r.v0_norm) << ',' << num(r.u_norm) << ',' << num(r.U1_norm) << ',' << num(r.U3_norm) << ','
       << num(r.U2_restricted) << ',' << num(r.U21_restricted) << ',' << num(r.U22_restricted) << ','
       << num(r.U1_restricted) << ',' << num(r.U3_restricted) << ',' << num(r.defect) << ',' << r.picard_iterations
       << ',' << (r.excluded ? 1 : 0) << ',' << csv_field(r.reason) << '\n';
  };
  for (const auto& r : rep.records) row("count", r);
  for (const auto& r : rep.epsilon_records) row("epsilon", r);
  return os.str();
}

Artifacts::Artifacts(std::string directory, std::string command, const ExperimentConfig& cfg, std::uint64_t seed)
    : dir_(std::move(directory)), command_(std::move(command)), config_dump_(dump_config(cfg)), seed_(seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_ + ": " + ec.message());
}

void Artifacts::add(const std::string& name, const std::string& bytes) {
  const std::string path = (std::filesystem::path(dir_) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << bytes;
  if (!out) throw IoError("write failed for " + path);
  files_.emplace_back(name, fnv1a(bytes));
}

void Artifacts::add_binary_file(const std::string& name) {
  const std::string path = (std::filesystem::path(dir_) / name).string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read back " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  files_.emplace_back(name, fnv1a(ss.str()));
}

std::string Artifacts::finish() {
  auto hex = [](std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  };
  json m;
  m["command"] = command_;
  m["seed"] = seed_;
  m["config_fnv1a"] = hex(fnv1a(config_dump_));
  m["config"] = json::parse(config_dump_);
  m["versions"] = {{"kslab", "1.0.0"}, {"fftw", "3"}, {"cxx", __cplusplus}};
  json files = json::array();
  for (const auto& [name, h] : files_) files.push_back({{"name", name}, {"fnv1a", hex(h)}});
  m["files"] = files;
  const std::string path = (std::filesystem::path(dir_) / "manifest.json").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << m.dump(2) << '\n';
  return path;
}

}  // namespace kslab::cli
