#pragma once

#include <cstdint>

#include "chanlab/core.hpp"

namespace chanlab {

// SplitMix64: state += 0x9E3779B97F4A7C15, output = xor-shift-multiply
// finalizer. Pinned so streams are bit-identical everywhere; see README.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double next_unit();  // 53-bit uniform in (0, 1)

 private:
  std::uint64_t state_;
};

// Natural log from frexp plus a fixed-length atanh series; only IEEE
// +,-,*,/ so results do not depend on the platform libm.
double portable_log(double x);

// Inverse standard normal CDF via the Acklam rational approximation
// (central branch is a pure rational function, tails use portable_log).
double inverse_normal_cdf(double p);

struct StreamConfig {
  double sigma = 3.0;   // folded normal std deviation
  double p_ltr = 0.5;   // Bernoulli probability of a left-to-right transaction
  std::int64_t length = 50;
  std::uint64_t seed = 1;
};

// Amounts are |N(0, sigma)| rounded to the nearest integer, resampled while
// the result is 0; directions are i.i.d. Bernoulli(p_ltr). Per transaction
// the amount draws come first (including resamples), then the direction draw.
TransactionStream sample_stream(const StreamConfig& config);

// `length` identical left-to-right transactions of epsilon/3 money units.
// Throws GridTooCoarse unless epsilon is a positive multiple of 3.
TransactionStream adversary_epsilon_stream(const Money& onchain_fee,
                                           std::int64_t epsilon_units,
                                           std::int64_t length);

// One lower-bound epoch: phases i = 0..floor(log C / log(c+1)) of (c+1)^i
// left-to-right transactions of size A/(c+1)^i, then one right-to-left
// transaction of size A. Throws GridTooCoarse when A is not divisible by
// (c+1)^i for every emitted phase.
TransactionStream adversary_epoch_stream(std::int64_t amount, std::int64_t c,
                                         std::int64_t cycle_hops);

}  // namespace chanlab
