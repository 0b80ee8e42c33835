#include "hyzeno/sampling.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hyzeno/error.hpp"

namespace hyzeno {

State Box::center() const {
  State c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

double halton(std::size_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

unsigned nth_prime(std::size_t n) {
  static const unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                     59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  if (n >= std::size(kPrimes))
    throw Error(ErrorCode::InvalidArgument, fmt::format("sampling supports at most {} dimensions", std::size(kPrimes)));
  return kPrimes[n];
}

std::vector<State> sample_grid(const SampleSpec& spec) {
  const Box& b = spec.box;
  if (b.lo.size() != b.hi.size() || b.lo.empty())
    throw Error(ErrorCode::InvalidArgument, "box bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (!(b.lo[i] <= b.hi[i]) || !std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]))
      throw Error(ErrorCode::InvalidArgument, fmt::format("invalid box bounds on coordinate {}", i + 1));
  if (!(spec.face_fraction >= 0.0 && spec.face_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "face fraction must lie in [0, 1]");

  std::vector<std::size_t> free_dims;
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (b.lo[i] < b.hi[i]) free_dims.push_back(i);

  std::vector<State> out;
  if (spec.count == 0) return out;
  out.push_back(b.center());
  const std::size_t face_every =
      spec.face_fraction > 0.0 ? static_cast<std::size_t>(std::llround(1.0 / spec.face_fraction)) : 0;
  std::size_t faces = 0;
  for (std::size_t n = 1; out.size() < spec.count; ++n) {
    const std::size_t idx = n + spec.seed;
    State x(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * halton(idx, nth_prime(i));
    if (face_every > 0 && !free_dims.empty() && n % face_every == 0) {
      // Cycle through (coordinate, side) pairs.
      const std::size_t pick = faces++ % (2 * free_dims.size());
      const std::size_t c = free_dims[pick / 2];
      x[c] = (pick % 2 == 0) ? b.lo[c] : b.hi[c];
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<State> sphere_directions(std::size_t dim, std::size_t count, std::size_t seed) {
  std::vector<State> out;
  for (std::size_t n = 1; out.size() < count && n < 64 * count + 64; ++n) {
    State d(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      d[i] = 2.0 * halton(n + seed, nth_prime(i)) - 1.0;
      norm += d[i] * d[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-3 || norm > 1.0) continue;
    for (double& v : d) v /= norm;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace hyzeno
