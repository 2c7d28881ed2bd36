#ifndef POPEC_MATH_UTIL_HPP_
#define POPEC_MATH_UTIL_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace popec {

// Absorbing sentinel for queueing quantities that diverge (overload,
// starvation). Plain IEEE infinity: additions and comparisons propagate it.
inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

inline bool is_infinite_time(double v) { return !(v < kInfiniteTime); }

// Utilization closer to 1 than this counts as overloaded.
inline constexpr double kUtilizationSlack = 1e-9;

double inverse_normal_cdf(double p);
double normal_cdf(double x);

// Deterministic stream of draws. All randomness in the project goes through
// this wrapper so that results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double uniform01();
  double uniform(double lo, double hi);
  double exponential(double rate);
  double gaussian(double mean, double stddev);
  bool bernoulli(double p);
  // Index in [0, weights.size()) or weights.size() for the residual mass
  // 1 - sum(weights); weights must sum to <= 1.
  std::size_t pick_or_none(std::span<const double> weights);

  std::uint64_t next_u64();

 private:
  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace popec

#endif  // POPEC_MATH_UTIL_HPP_
