#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mrca {

// Malformed or inconsistent input data (corpus records, embedding files,
// checkpoints). The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-finite tensors, gradient-check breaches.
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
};

// Half-open token-index range [start, end).
struct Span {
  int start = 0;
  int end = 0;

  bool contains(int index) const { return index >= start && index < end; }
  friend bool operator==(const Span &a, const Span &b) {
    return a.start == b.start && a.end == b.end;
  }
  friend auto operator<=>(const Span &a, const Span &b) = default;
};

// Deterministic random source. All draws are derived from the raw 64-bit
// stream with fixed arithmetic, so a given seed reproduces the same values
// on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift64* -- small, fast, and fully specified.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (spare value cached).
  double normal();

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable 64-bit mix used to derive sub-seeds (per-epoch shuffles, per-run
// seeds) from a base seed without overlapping streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace mrca
