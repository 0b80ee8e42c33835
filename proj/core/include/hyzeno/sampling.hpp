#pragma once

#include <cstddef>
#include <vector>

#include "hyzeno/dynamics.hpp"

namespace hyzeno {

/// Axis-aligned box. A coordinate with lo == hi is held fixed.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  State center() const;
};

/// Deterministic low-discrepancy point set over a box.
struct SampleSpec {
  Box box;
  std::size_t count = 10000;
  /// Fraction of points pushed onto a box face, so lower-dimensional sets
  /// such as {x1 = 0} are represented.
  double face_fraction = 0.25;
  std::size_t seed = 0;  // offset into the Halton sequence
};

/// Radical inverse of `index` in `base`.
double halton(std::size_t index, unsigned base);

/// First prime numbers, enough for the supported dimensions.
unsigned nth_prime(std::size_t n);

/// `count` points: the box center first, then Halton points, every
/// (1 / face_fraction)-th of them projected onto a face. Throws
/// Error(InvalidArgument) on malformed boxes.
std::vector<State> sample_grid(const SampleSpec& spec);

/// Points on the unit sphere in R^n from Halton points in [-1, 1]^n.
std::vector<State> sphere_directions(std::size_t dim, std::size_t count, std::size_t seed = 0);

}  // namespace hyzeno
