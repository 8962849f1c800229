#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace covrecon {

/// Portable seeded normal generator. The stream is part of the output
/// contract, so every step is pinned down:
///   * engine: std::mt19937_64 seeded with `seed` (the standard fixes its
///     output sequence);
///   * uniform: u = (word >> 11) * 2^-53, in [0, 1);
///   * normal: Box-Muller on consecutive uniforms (u1, u2),
///     r = sqrt(-2 ln(1 - u1)), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2);
///     z0 is returned first and z1 on the following call.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_;
};

}  // namespace covrecon
