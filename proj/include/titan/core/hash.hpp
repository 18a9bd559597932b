#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace titan::core {

// FNV-1a 64-bit.  Content fingerprint for manifests and cache keys; not a
// cryptographic hash and not meant to be one.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  return fnv1a(s.data(), s.size(), h);
}

std::string hex64(std::uint64_t h);

// Hash of a file's raw bytes, formatted as 16 hex digits.  Throws
// std::runtime_error if the file cannot be read.
std::string file_fingerprint(const std::string& path);

}  // namespace titan::core
