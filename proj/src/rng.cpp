#include "gamelab/rng.hpp"

#include <cmath>
#include <cstring>

#include "gamelab/hash.hpp"

namespace gamelab {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) return 0;
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = std::size_t(uniform_int(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::uint64_t derive_seed(std::uint64_t root, const std::string& label,
                          std::uint64_t index) {
  Sha256 h;
  std::uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = std::uint8_t(root >> (8 * i));
  h.update(buf, 8);
  h.update(label);
  for (int i = 0; i < 8; ++i) buf[i] = std::uint8_t(index >> (8 * i));
  h.update(buf, 8);
  std::string hex = h.hex_digest();
  std::uint64_t out = 0;
  for (int i = 0; i < 16; ++i) {
    char c = hex[i];
    out = (out << 4) | std::uint64_t(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return out;
}

}  // namespace gamelab
