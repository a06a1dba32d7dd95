#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gamelab {

// Deterministic generator with a pinned algorithm (splitmix64 core) so that
// seeded results are stable across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller.
  double normal();

  // Random permutation indices [0, n) (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives a child seed from a root seed, a component/purpose label and an
// index. All randomness in the library flows through this function so a run
// is fully determined by one root seed.
std::uint64_t derive_seed(std::uint64_t root, const std::string& label,
                          std::uint64_t index = 0);

}  // namespace gamelab
