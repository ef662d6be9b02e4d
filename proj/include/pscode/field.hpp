#pragma once

#include <cstdint>
#include <stdexcept>

namespace pscode {

// Deterministic Miller-Rabin, valid for the full 64-bit range.
bool is_prime_u64(std::uint64_t n);

// Arithmetic in GF(q) for a prime modulus q. Elements are canonical
// residues in [0, q). The modulus is a runtime parameter so that tiny
// fields (q = 5, 7, 17) can be enumerated exhaustively while production
// jobs run near 2^61.
class PrimeField {
 public:
  // 2^61 - 1 (prime). Residues stay below 2^61, so a product of two
  // elements fits a 128-bit intermediate with headroom to spare.
  static constexpr std::uint64_t kDefaultModulus = 2305843009213693951ULL;

  explicit PrimeField(std::uint64_t modulus) : q_(modulus) {
    if (modulus < 3) throw std::invalid_argument("field modulus must be >= 3");
    if (!is_prime_u64(modulus))
      throw std::invalid_argument("field modulus must be prime");
  }

  std::uint64_t modulus() const { return q_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;  // a, b < q <= 2^61: no overflow
    return s >= q_ ? s - q_ : s;
  }

  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }

  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : q_ - a; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % q_);
  }

  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;

  // Multiplicative inverse via Fermat; a must be nonzero.
  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw std::invalid_argument("cannot invert 0");
    return pow(a, q_ - 2);
  }

  std::uint64_t reduce(std::uint64_t a) const { return a % q_; }

  bool operator==(const PrimeField& other) const { return q_ == other.q_; }
  bool operator!=(const PrimeField& other) const { return q_ != other.q_; }

 private:
  std::uint64_t q_;
};

}  // namespace pscode
