#pragma once

#include <string>

#include "blindmix/ec_group.hpp"
#include "blindmix/kv_file.hpp"

namespace blindmix::testing {

inline const KvFile& vectors() {
  static const KvFile kv = KvFile::load(BLINDMIX_FIXTURES "/vectors.txt");
  return kv;
}

inline mpz_class vec_mpz(const std::string& key) { return mpz_from_hex(vectors().at(key)); }

inline Bytes vec_bytes(const std::string& key) { return from_hex(vectors().at(key)); }

inline Scalar vec_scalar(const Curve& curve, const std::string& key) { return curve.scalar(vec_mpz(key)); }

}  // namespace blindmix::testing
