#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace chanlab {

// Exact rational on 128-bit integers, always normalized (den > 0, gcd = 1).
// Magnitudes in this project stay around 1e20/1e15, so cross-multiplied
// comparisons fit __int128 with several orders of headroom.
class Rat {
 public:
  using Int = __int128;

  constexpr Rat() = default;
  constexpr Rat(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
  Rat(Int num, Int den);

  Int num() const { return num_; }
  Int den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }
  bool is_integer() const { return den_ == 1; }

  std::int64_t floor64() const;
  std::int64_t ceil64() const;
  Rat abs() const { return num_ < 0 ? Rat(-num_, den_) : *this; }

  Rat operator-() const { return Rat(-num_, den_); }
  friend Rat operator+(const Rat& a, const Rat& b);
  friend Rat operator-(const Rat& a, const Rat& b);
  friend Rat operator*(const Rat& a, const Rat& b);
  friend Rat operator/(const Rat& a, const Rat& b);  // throws on division by zero
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b);

  // Decimal string when the denominator is 2^a*5^b ("12", "0.5", "3.125"),
  // otherwise "num/den". parse() accepts both forms back.
  std::string str() const;
  static std::optional<Rat> parse(std::string_view text);

  double to_double() const;

 private:
  Int num_ = 0;
  Int den_ = 1;
};

using Money = Rat;

std::ostream& operator<<(std::ostream& os, const Rat& r);

inline const Rat& min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& max(const Rat& a, const Rat& b) { return a < b ? b : a; }

}  // namespace chanlab
