#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fairstyle {

// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  void update_u64(std::uint64_t v);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view text);
std::string to_hex(std::uint64_t v);

std::uint64_t splitmix64(std::uint64_t x);

// Seed of the index-th item drawn from a batch seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);
// Seed of a named pipeline stage under a global seed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stage);

}  // namespace fairstyle
