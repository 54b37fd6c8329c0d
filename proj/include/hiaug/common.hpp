#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hiaug {

// Error categories map onto the CLI exit codes: ConfigError -> 1,
// ValidationError -> 2, BackendError -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// -------------------------------------------------------------------------
// Stable hashing (FNV-1a, 64 bit). Used for dedupe keys, prompt hashes and
// seed derivation, so it must stay byte-stable across platforms.

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

class HashBuilder {
 public:
  HashBuilder& add(std::string_view s) {
    h_ = fnv1a64(s, h_);
    feed_byte(0xff);  // separator so add("ab").add("c") != add("a").add("bc")
    return *this;
  }

  HashBuilder& add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) feed_byte(static_cast<unsigned char>(v >> (8 * i)));
    return *this;
  }

  HashBuilder& add_i64(std::int64_t v) {
    return add_u64(static_cast<std::uint64_t>(v));
  }

  HashBuilder& add_double(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    return add_u64(bits);
  }

  std::uint64_t digest() const { return h_; }

 private:
  void feed_byte(unsigned char c) {
    h_ ^= static_cast<std::uint64_t>(c);
    h_ *= kFnvPrime;
  }

  std::uint64_t h_ = kFnvOffset;
};

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Derives a child seed from a root seed and a label, e.g. one per
/// (run, class, slot, attempt). Stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::int64_t slot = 0, int attempt = 0) {
  return HashBuilder{}
      .add_u64(root)
      .add(label)
      .add_i64(slot)
      .add_i64(attempt)
      .digest();
}

// -------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 output is specified by the standard, but the
// stdlib distributions are not, so sampling helpers are implemented here.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw Error("Rng::next_below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw Error("Rng::next_in: empty range");
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hiaug
