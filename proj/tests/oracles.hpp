#pragma once

// Reference computations that share no code with the library. They are
// closed-form or brute-force and deliberately simple.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

constexpr double kG = 9.81;

struct BallState {
  double h = 0.0;
  double v = 0.0;
};

/// Impact times of a single ball released at height a >= 0 with velocity b,
/// restitution lambda < 1, starting at time t0. Flight times are summed
/// until they stop contributing at double precision.
inline std::vector<double> impact_times(double a, double b, double lambda, double t0 = 0.0, double g = kG) {
  std::vector<double> times;
  const double first = (b + std::sqrt(b * b + 2.0 * g * a)) / g;
  double t = t0 + first;
  double speed = std::sqrt(b * b + 2.0 * g * a);
  times.push_back(t);
  for (int i = 0; i < 100000; ++i) {
    speed *= lambda;
    const double flight = 2.0 * speed / g;
    if (t + flight == t) break;
    t += flight;
    times.push_back(t);
  }
  return times;
}

/// Zeno time of the single ball by bounce recursion.
inline double zeno_time(double a, double b, double lambda, double t0 = 0.0, double g = kG) {
  return impact_times(a, b, lambda, t0, g).back();
}

/// The alternative closed form (1/g)(b + 2 lambda/(1 - lambda) sqrt(b^2 + 2ga)),
/// which only agrees with the recursion at lambda = 1.
inline double alternative_closed_form_tau(double a, double b, double lambda, double g = kG) {
  return (b + 2.0 * lambda / (1.0 - lambda) * std::sqrt(b * b + 2.0 * g * a)) / g;
}

/// The closed form that does follow from the recursion.
inline double recursion_closed_form_tau(double a, double b, double lambda, double g = kG) {
  return (b + (1.0 + lambda) / (1.0 - lambda) * std::sqrt(b * b + 2.0 * g * a)) / g;
}

/// Exact ballistic state of a single ball at time t (before its Zeno time),
/// obtained by stepping analytically from impact to impact.
inline BallState ball_at(double a, double b, double lambda, double t, double g = kG) {
  double h = a;
  double v = b;
  double now = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double to_impact = (v + std::sqrt(v * v + 2.0 * g * h)) / g;
    if (now + to_impact >= t) {
      const double dt = t - now;
      return {h + v * dt - 0.5 * g * dt * dt, v - g * dt};
    }
    now += to_impact;
    v = lambda * std::sqrt(v * v + 2.0 * g * h);
    h = 0.0;
  }
  return {0.0, 0.0};
}

/// Central finite difference of a scalar function of a vector.
inline std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double step) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double up = f(x);
    x[i] = xi - step;
    const double down = f(x);
    x[i] = xi;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// Small deterministic generator (splitmix64) for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool coin() { return (next() & 1U) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace oracle
