#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace sdfprox {

/// Streaming FNV-1a (64-bit), used to fingerprint datasets and configs.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }

  void update(const std::string& s) { update(s.data(), s.size()); }

  std::uint64_t digest() const { return state_; }

  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(const void* data, std::size_t n);

}  // namespace sdfprox
