#pragma once

#include <cstdint>
#include <cstring>
#include <span>

namespace deepim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

constexpr std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash_mix(hash_mix(a, b), c);
}

/// Uniform double in [0, 1) derived from a hashed key pair.
inline double hash_unit(std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(hash_mix(a, b) >> 11) * 0x1.0p-53;
}

inline double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return static_cast<double>(hash_mix(a, b, c) >> 11) * 0x1.0p-53;
}

// FNV-1a, used to fingerprint artifacts (graphs, corpora, checkpoints).
struct Fnv1a {
  std::uint64_t state = 1469598103934665603ULL;

  void add_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state ^= p[i];
      state *= 1099511628211ULL;
    }
  }

  template <typename T>
  void add(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    add_bytes(&v, sizeof(T));
  }

  template <typename T>
  void add_span(std::span<const T> s) {
    add_bytes(s.data(), s.size_bytes());
  }
};

}  // namespace deepim
