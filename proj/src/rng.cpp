#include "covrecon/rng.hpp"

#include <cmath>
#include <numbers>

namespace covrecon {

double NormalStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (cached_) {
    const double z = *cached_;
    cached_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

}  // namespace covrecon
