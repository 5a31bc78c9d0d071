#pragma once

#include <cstdint>

namespace rbp {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Key for a sub-stream; used to give each replicate its own seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Counter-based uniform stream: value i depends only on (key, i).
class UniformStream {
 public:
  explicit constexpr UniformStream(std::uint64_t key) : key_(splitmix64(key)) {}

  // Uniform on the open interval (0,1).
  double operator()(std::uint64_t i) const {
    std::uint64_t bits = splitmix64(key_ ^ splitmix64(i));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

}  // namespace rbp
