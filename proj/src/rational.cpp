#include "chanlab/rational.hpp"

#include <cctype>
#include <ostream>
#include <stdexcept>

namespace chanlab {

namespace {

using Int = Rat::Int;

Int abs128(Int v) { return v < 0 ? -v : v; }

Int gcd128(Int a, Int b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string int128_str(Int v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                            : static_cast<unsigned __int128>(v);
  char buf[48];
  int pos = 48;
  while (u != 0) {
    buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
    u /= 10;
  }
  std::string out;
  if (neg) out.push_back('-');
  out.append(buf + pos, buf + 48);
  return out;
}

Int pow10_128(int k) {
  Int v = 1;
  for (int i = 0; i < k; ++i) v *= 10;
  return v;
}

}  // namespace

Rat::Rat(Int num, Int den) {
  if (den == 0) throw std::domain_error("Rat: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Int g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

std::int64_t Rat::floor64() const {
  Int q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return static_cast<std::int64_t>(q);
}

std::int64_t Rat::ceil64() const {
  Int q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return static_cast<std::int64_t>(q);
}

Rat operator+(const Rat& a, const Rat& b) {
  if (a.den_ == b.den_) return Rat(a.num_ + b.num_, a.den_);
  return Rat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rat operator-(const Rat& a, const Rat& b) {
  if (a.den_ == b.den_) return Rat(a.num_ - b.num_, a.den_);
  return Rat(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rat operator*(const Rat& a, const Rat& b) {
  // Cross-reduce first to keep intermediates small.
  Int g1 = gcd128(a.num_, b.den_);
  Int g2 = gcd128(b.num_, a.den_);
  return Rat((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
}

Rat operator/(const Rat& a, const Rat& b) {
  if (b.num_ == 0) throw std::domain_error("Rat: division by zero");
  return Rat(a.num_ * b.den_, a.den_ * b.num_);
}

std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
  Int lhs = a.num_ * b.den_;
  Int rhs = b.num_ * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rat::str() const {
  if (den_ == 1) return int128_str(num_);
  Int d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return int128_str(num_) + "/" + int128_str(den_);

  int digits = twos > fives ? twos : fives;
  Int scale = pow10_128(digits) / den_;
  Int scaled = abs128(num_) * scale;
  Int ip = scaled / pow10_128(digits);
  Int fp = scaled % pow10_128(digits);
  std::string frac = int128_str(fp);
  frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  std::string out;
  if (num_ < 0) out.push_back('-');
  out += int128_str(ip);
  out.push_back('.');
  out += frac;
  return out;
}

std::optional<Rat> Rat::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '+' || text[0] == '-') {
    neg = text[0] == '-';
    i = 1;
  }
  Int num = 0;
  Int den = 1;
  bool any_digit = false;
  bool seen_point = false;
  bool seen_slash = false;
  Int slash_den = 0;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      any_digit = true;
      if (seen_slash) {
        if (slash_den > (Int(1) << 100)) return std::nullopt;
        slash_den = slash_den * 10 + (c - '0');
      } else {
        if (num > (Int(1) << 100)) return std::nullopt;
        num = num * 10 + (c - '0');
        if (seen_point) den *= 10;
      }
    } else if (c == '.' && !seen_point && !seen_slash) {
      seen_point = true;
    } else if (c == '/' && !seen_slash && !seen_point && any_digit) {
      seen_slash = true;
      any_digit = false;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  if (seen_slash) {
    if (slash_den == 0) return std::nullopt;
    den = slash_den;
  }
  return Rat(neg ? -num : num, den);
}

double Rat::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace chanlab
