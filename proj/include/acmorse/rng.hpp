/// @file rng.hpp
/// Deterministic random numbers and random trial fields.
///
/// Standard-library distributions are implementation-defined, so uniforms are
/// built directly from the mt19937_64 word sequence (which the standard pins
/// down exactly); runs reproduce bit-for-bit across toolchains.

#pragma once

#include <cstdint>
#include <random>

#include "acmorse/grid.hpp"

namespace acmorse {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Symmetric uniform in [-1,1).
  double sym() { return uniform(-1.0, 1.0); }

  /// Independent child stream, for per-task generators with a stable identity.
  Rng child(std::uint64_t salt) {
    // splitmix64 of (state draw ^ salt); decorrelates nearby salts.
    std::uint64_t z = next() ^ (salt + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 eng_;
};

/// Random smooth trial field: a sum of lattice Fourier modes with per-axis
/// integer frequencies up to max_mode, rescaled to the requested sup-norm.
/// Consumes a fixed number of draws for a given (grid dim, max_mode), so the
/// stream position after a call does not depend on the resulting field.
ScalarField random_band_limited_field(GridPtr grid, Rng& rng, double amplitude, int max_mode);

}  // namespace acmorse
