#pragma once

#include <string>

#include "wsg/adam.hpp"

namespace wsg {

// Flat binary container of named parameter matrices.
// Layout: "WSG1" magic, then per entry:
//   u32 name length, UTF-8 name, u32 rows, u32 cols,
//   rows*cols little-endian 64-bit floats.
// Entries are written in registration order and read until EOF.

void save_checkpoint(const std::string& path, const ParamStore& params);

/// Loads into an already-constructed store; every name and shape must match.
/// Throws InputError naming the offending parameter otherwise.
void load_checkpoint(const std::string& path, ParamStore& params);

}  // namespace wsg
