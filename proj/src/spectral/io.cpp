#include "kslab/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "kslab/errors.hpp"

namespace kslab::spectral {

namespace {

constexpr char kMagic[8] = {'K', 'S', 'L', 'A', 'B', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated field container");
  return v;
}

}  // namespace

void write_fields(const std::string& path, const FieldBundle& bundle, Representation rep) {
  if (bundle.frames.empty()) throw EmptyTrace("nothing to write");
  if (!bundle.times.empty() && bundle.times.size() != bundle.frames.size())
    throw FormatError("times must have one entry per frame");
  const Field& f0 = bundle.frames.front();
  const GridSpec& g = f0.grid();
  for (const auto& f : bundle.frames)
    if (f.grid() != g || f.kind() != f0.kind()) throw FormatError("all frames must share grid and kind");

  nlohmann::json h;
  h["d"] = g.d;
  h["points"] = g.n;
  h["box_length"] = g.L;
  h["kind"] = f0.kind() == FieldKind::vector ? "vector" : "scalar";
  h["components"] = f0.components();
  h["representation"] = rep == Representation::physical ? "physical" : "spectral";
  h["frames"] = bundle.frames.size();
  h["times"] = bundle.times;
  h["label"] = bundle.label;
  const std::string header = h.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  put(os, kVersion);
  put(os, static_cast<std::uint64_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& f : bundle.frames) {
    for (int c = 0; c < f.components(); ++c) {
      if (rep == Representation::physical) {
        const RealVec& v = f.physical(c);
        os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
      } else {
        const CplxVec& v = f.spectral(c);
        os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
      }
    }
  }
  if (!os) throw IoError("write failed for " + path);
}

FieldBundle read_fields(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw FormatError(path + " is not a field container");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw FormatError("unsupported container version " + std::to_string(version));
  const auto hlen = get<std::uint64_t>(is);
  std::string header(hlen, '\0');
  is.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw FormatError("truncated header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const std::exception& e) {
    throw FormatError(std::string("bad header: ") + e.what());
  }
  GridSpec g(h.at("points").get<std::vector<int>>(), h.at("box_length").get<std::vector<double>>());
  const FieldKind kind = h.at("kind") == "vector" ? FieldKind::vector : FieldKind::scalar;
  const int nc = h.at("components").get<int>();
  const bool phys = h.at("representation") == "physical";
  const auto nframes = h.at("frames").get<std::size_t>();
  FieldBundle b;
  b.times = h.value("times", std::vector<double>{});
  b.label = h.value("label", std::string());
  for (std::size_t fr = 0; fr < nframes; ++fr) {
    if (phys) {
      std::vector<RealVec> comps;
      for (int c = 0; c < nc; ++c) {
        RealVec v(g.points());
        is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        comps.push_back(std::move(v));
      }
      b.frames.push_back(Field::from_physical(g, std::move(comps), kind));
    } else {
      std::vector<CplxVec> comps;
      for (int c = 0; c < nc; ++c) {
        CplxVec v(g.spectral_points());
        is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
        comps.push_back(std::move(v));
      }
      b.frames.push_back(Field::from_spectral(g, std::move(comps), kind));
    }
    if (!is) throw FormatError("truncated payload in " + path);
  }
  return b;
}

}  // namespace kslab::spectral
