#pragma once

#include <string>
#include <vector>

#include "kslab/field.hpp"

namespace kslab::spectral {

enum class Representation { physical, spectral };

// One or more frames of the same grid and kind, optionally time-stamped.
struct FieldBundle {
  std::vector<Field> frames;
  std::vector<double> times;  // empty or one per frame
  std::string label;
};

// Layout: "KSLABFLD", u32 version, u64 header length, JSON header, raw
// little-endian doubles (samples, or interleaved re/im coefficients).
void write_fields(const std::string& path, const FieldBundle& bundle, Representation rep = Representation::spectral);
FieldBundle read_fields(const std::string& path);

}  // namespace kslab::spectral
