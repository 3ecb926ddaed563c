#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqaug {

/// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");
std::vector<std::string> split_whitespace(std::string_view text);
std::vector<std::string> split(std::string_view text, std::string_view sep);

/// 64-bit FNV-1a, used for manifest checksums and run fingerprints.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t value);

/// Seeded RNG stream. Uniform draws are computed from raw engine output so that
/// results do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double rate) { return rate > 0.0 && uniform() < rate; }

 private:
  std::mt19937_64 engine_;
};

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write results
/// into preallocated slots so output order never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace seqaug
