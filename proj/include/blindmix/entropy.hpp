#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>

#include "blindmix/bytes.hpp"

namespace blindmix {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of random bytes for key generation, nonces and blinding factors.
class Entropy {
 public:
  virtual ~Entropy() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  std::uint64_t next_u64();
};

/// Operating-system randomness (getrandom(2)).
class SystemEntropy final : public Entropy {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic stream SHA-256(seed || counter) for reproducible runs and tests.
/// Not suitable for real keys. Thread safe.
class SeededEntropy final : public Entropy {
 public:
  explicit SeededEntropy(std::uint64_t seed);
  explicit SeededEntropy(ByteView seed);

  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mu_;
  Bytes seed_;
  std::uint64_t counter_ = 0;
  Digest block_{};
  std::size_t used_ = block_.size();
};

}  // namespace blindmix
