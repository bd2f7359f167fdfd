#pragma once

#include <string>

#include "rex/tape.hpp"

namespace rex {

enum class Precision { F32, F64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

// Binary parameter checkpoint. Layout (all integers little-endian uint64,
// scalars little-endian IEEE-754):
//   magic "REXCKPT1" (8 bytes)
//   precision tag: 1 byte, 0 = f32, 1 = f64
//   count: uint64
//   per parameter, in store order:
//     name_len: uint64; name: UTF-8 bytes
//     rows: uint64; cols: uint64
//     payload: rows*cols scalars at the tagged width
// Saving at F32 narrows each value through IEEE-754 binary32.
void save_checkpoint(const ParameterStore& params, const std::string& path,
                     Precision precision);

// Loads into an existing store; every checkpoint entry must match an
// existing parameter's name and shape.
void load_checkpoint(ParameterStore& params, const std::string& path);

}  // namespace rex
