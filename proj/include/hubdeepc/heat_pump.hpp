#pragma once

#include "hubdeepc/error.hpp"

namespace hubdeepc {

/// Thermal output (kW) for electrical input u_h (kW).
inline double heat_pump_output(double u_h, double cop = 3.0) {
  require(u_h >= 0.0, ErrorKind::NegativeInput, "heat pump input must be nonnegative");
  return cop * u_h;
}

}  // namespace hubdeepc
