#pragma once

#include <csignal>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "blindmix/ec_group.hpp"
#include "blindmix/entropy.hpp"

namespace blindmix::tools {

inline const Curve& curve_by_name(const std::string& name) {
  if (name == "secp256k1") return Curve::secp256k1();
  if (name == "toy") return Curve::toy();
  throw std::invalid_argument("unknown curve " + name + " (expected secp256k1 or toy)");
}

/// System entropy unless a seed was given for reproducible runs.
inline std::unique_ptr<Entropy> make_entropy(const std::optional<std::uint64_t>& seed) {
  if (seed) return std::make_unique<SeededEntropy>(*seed);
  return std::make_unique<SystemEntropy>();
}

}  // namespace blindmix::tools
