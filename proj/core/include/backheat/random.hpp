#pragma once

#include <cstdint>
#include <random>

#include "backheat/grids.hpp"

namespace backheat {

/// Field with entries uniform on [-1, 1), drawn in degree-of-freedom order.
inline StateField random_field(const Grid& grid, std::mt19937_64& engine) {
  StateField out = StateField::zeros(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * (static_cast<double>(engine() >> 11) * 0x1.0p-53) - 1.0;
  }
  return out;
}

}  // namespace backheat
