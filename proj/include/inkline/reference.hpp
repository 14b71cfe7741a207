#pragma once

#include <array>
#include <cstdint>

#include "inkline/raster.hpp"

namespace inkline {
struct Matrix;
struct MergeSpec;
}  // namespace inkline

// Plain serial implementations of the kernels that the main library runs
// under OpenMP. They are the comparison baseline: tests assert bitwise-equal
// results against the parallel versions, and the benchmark target measures
// the speedup. Keep these free of pragmas and clever blocking — their value
// is being obviously correct.
namespace inkline::reference {

std::array<std::uint64_t, 256> histogram256(const GrayRaster& image);

BinaryRaster thin(const BinaryRaster& raster);

Matrix merge_lora(const Matrix& base, const MergeSpec& spec);

}  // namespace inkline::reference
