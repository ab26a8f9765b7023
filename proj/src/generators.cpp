#include "chanlab/generators.hpp"

#include <cmath>

namespace chanlab {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::next_unit() {
  double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return u == 0.0 ? 0x1.0p-53 : u;
}

double portable_log(double x) {
  int exponent = 0;
  double mantissa = std::frexp(x, &exponent);  // mantissa in [0.5, 1)
  // atanh series: ln m = 2 * sum t^(2k+1)/(2k+1), t = (m-1)/(m+1), |t| <= 1/3.
  // 26 fixed terms leave the truncation far below double precision.
  const double t = (mantissa - 1.0) / (mantissa + 1.0);
  const double t2 = t * t;
  double acc = 0.0;
  for (int k = 25; k >= 0; --k) acc = acc * t2 + 1.0 / (2 * k + 1);
  const double ln2 = 0x1.62e42fefa39efp-1;
  return 2.0 * t * acc + static_cast<double>(exponent) * ln2;
}

double inverse_normal_cdf(double p) {
  // Acklam's approximation, |relative error| < 1.15e-9 over (0, 1).
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * portable_log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * portable_log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

TransactionStream sample_stream(const StreamConfig& config) {
  if (config.sigma <= 0.0) throw UnsupportedParams("sigma must be > 0");
  if (config.p_ltr < 0.0 || config.p_ltr > 1.0)
    throw UnsupportedParams("p_ltr must lie in [0, 1]");
  if (config.length < 0) throw UnsupportedParams("length must be >= 0");

  TransactionStream stream;
  stream.reserve(static_cast<std::size_t>(config.length));
  SplitMix64 rng(config.seed);
  for (std::int64_t i = 0; i < config.length; ++i) {
    std::int64_t amount = 0;
    while (amount == 0) {
      double z = inverse_normal_cdf(rng.next_unit());
      amount = std::llround(std::fabs(z) * config.sigma);
    }
    Direction dir = rng.next_unit() < config.p_ltr ? Direction::LeftToRight
                                                   : Direction::RightToLeft;
    stream.push_back({amount, dir});
  }
  return stream;
}

TransactionStream adversary_epsilon_stream(const Money& onchain_fee,
                                           std::int64_t epsilon_units,
                                           std::int64_t length) {
  (void)onchain_fee;  // sizes the useful length, not the construction
  if (epsilon_units < 3 || epsilon_units % 3 != 0)
    throw GridTooCoarse("epsilon/3 must be a positive whole number of money units");
  if (length < 0) throw UnsupportedParams("length must be >= 0");
  return TransactionStream(static_cast<std::size_t>(length),
                           {epsilon_units / 3, Direction::LeftToRight});
}

TransactionStream adversary_epoch_stream(std::int64_t amount, std::int64_t c,
                                         std::int64_t cycle_hops) {
  if (amount < 1) throw GridTooCoarse("epoch amount must be >= 1");
  if (c < 1) throw UnsupportedParams("phase growth c must be >= 1");
  if (cycle_hops < 1) throw UnsupportedParams("cycle_hops must be >= 1");

  // Phases while (c+1)^i <= C, i.e. i <= log C / log(c+1).
  TransactionStream stream;
  std::int64_t group = 1;  // (c+1)^i
  for (std::int64_t phase = 0;; ++phase) {
    if (amount % group != 0)
      throw GridTooCoarse("amount not divisible by (c+1)^" + std::to_string(phase));
    std::int64_t size = amount / group;
    for (std::int64_t j = 0; j < group; ++j)
      stream.push_back({size, Direction::LeftToRight});
    if (group > cycle_hops / (c + 1)) break;
    group *= c + 1;
  }
  stream.push_back({amount, Direction::RightToLeft});
  return stream;
}

}  // namespace chanlab
