#include "blindmix/entropy.hpp"

#include <sys/random.h>

#include <cerrno>

#include "blindmix/hash.hpp"

namespace blindmix {

std::uint64_t Entropy::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v = 0;
  for (std::uint8_t b : buf) v = (v << 8) | b;
  return v;
}

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t got = ::getrandom(out.data() + done, out.size() - done, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw EntropyError("getrandom failed");
    }
    done += static_cast<std::size_t>(got);
  }
}

SeededEntropy::SeededEntropy(std::uint64_t seed) {
  append_u64(seed_, seed);
}

SeededEntropy::SeededEntropy(ByteView seed) : seed_(seed.begin(), seed.end()) {}

void SeededEntropy::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  for (std::uint8_t& b : out) {
    if (used_ == block_.size()) {
      Bytes input = seed_;
      append_u64(input, counter_++);
      block_ = hash256(input);
      used_ = 0;
    }
    b = block_[used_++];
  }
}

}  // namespace blindmix
