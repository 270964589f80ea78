#pragma once

// Elliptic-curve group arithmetic over short Weierstrass curves y^2 = x^3 + ax + b.
//
// Arithmetic uses arbitrary-precision integers and is NOT constant time. This is a
// research/simulation library; do not use it to protect real funds.

#include <gmpxx.h>

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "blindmix/bytes.hpp"
#include "blindmix/entropy.hpp"

namespace blindmix {

/// Element of Z_n. Always stored reduced into [0, n) by the owning Curve.
struct Scalar {
  mpz_class value;

  bool is_zero() const { return value == 0; }
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value == b.value; }
};

/// Affine point or the point at infinity.
struct CurvePoint {
  mpz_class x;
  mpz_class y;
  bool infinity = true;

  static CurvePoint at_infinity() { return {}; }
  static CurvePoint affine(mpz_class x, mpz_class y) { return {std::move(x), std::move(y), false}; }

  bool is_infinity() const { return infinity; }

  friend bool operator==(const CurvePoint& a, const CurvePoint& b) {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }
};

/// Domain parameters T = (p, a, b, G, n, h).
struct CurveParams {
  std::string name;
  mpz_class p;
  mpz_class a;
  mpz_class b;
  CurvePoint g;
  mpz_class n;
  mpz_class h;
};

class Curve {
 public:
  /// Validates the parameters (G on curve, n*G = infinity, p = 3 mod 4) and
  /// precomputes the fixed-base table. Throws std::invalid_argument.
  explicit Curve(CurveParams params);

  static const Curve& secp256k1();
  /// y^2 = x^3 + 7 over F_211 with prime order 199; small enough to enumerate.
  static const Curve& toy();

  const CurveParams& params() const { return params_; }
  const std::string& name() const { return params_.name; }
  const mpz_class& order() const { return params_.n; }
  const CurvePoint& generator() const { return params_.g; }

  std::size_t field_bytes() const { return field_bytes_; }
  std::size_t scalar_bytes() const { return scalar_bytes_; }
  /// Width of a compressed point encoding.
  std::size_t point_bytes() const { return field_bytes_ + 1; }

  // Scalar field Z_n.
  Scalar scalar(const mpz_class& v) const;
  Scalar scalar_from_bytes(ByteView big_endian) const;
  Bytes scalar_to_bytes(const Scalar& s) const;
  Scalar add(const Scalar& a, const Scalar& b) const;
  Scalar sub(const Scalar& a, const Scalar& b) const;
  Scalar mul(const Scalar& a, const Scalar& b) const;
  Scalar neg(const Scalar& a) const;
  /// Throws std::domain_error for zero.
  Scalar inverse(const Scalar& a) const;
  /// Uniform in [1, n).
  Scalar random_scalar(Entropy& entropy) const;

  // Group law.
  bool on_curve(const CurvePoint& pt) const;
  CurvePoint add(const CurvePoint& a, const CurvePoint& b) const;
  CurvePoint negate(const CurvePoint& pt) const;
  CurvePoint mul(const mpz_class& k, const CurvePoint& pt) const;
  CurvePoint mul(const Scalar& k, const CurvePoint& pt) const { return mul(k.value, pt); }
  CurvePoint mul_base(const Scalar& k) const;
  /// a*P + b*Q with interleaved doublings.
  CurvePoint mul_add(const Scalar& a, const CurvePoint& p, const Scalar& b, const CurvePoint& q) const;

  /// Compressed SEC encoding: 02/03 by y parity, then big-endian x.
  Bytes serialize(const CurvePoint& pt) const;
  CurvePoint deserialize(ByteView bytes) const;

  /// Every point including infinity. Only for curves with p < 2^20.
  std::vector<CurvePoint> enumerate_points() const;

 private:
  struct Jacobian {
    mpz_class x, y, z;  // z == 0 means infinity
  };

  void reduce(mpz_class& v) const;
  Jacobian to_jacobian(const CurvePoint& pt) const;
  CurvePoint to_affine(const Jacobian& j) const;
  Jacobian dbl(const Jacobian& a) const;
  Jacobian add_jacobian(const Jacobian& a, const Jacobian& b) const;
  Jacobian add_mixed(const Jacobian& a, const CurvePoint& b) const;
  std::optional<mpz_class> sqrt_mod_p(const mpz_class& v) const;

  CurveParams params_;
  std::size_t field_bytes_ = 0;
  std::size_t scalar_bytes_ = 0;
  // base_table_[i][j] = (j + 1) * 16^i * G
  std::vector<std::vector<CurvePoint>> base_table_;
};

struct KeyPair {
  CurvePoint public_key;
  Scalar secret;
};

/// Secret uniform in [1, n), public = secret * G.
KeyPair keygen(const Curve& curve, Entropy& entropy);
/// Test hook: deterministic key from a chosen secret. Throws on zero.
KeyPair keypair_from_secret(const Curve& curve, const Scalar& secret);

/// 32-byte double-SHA-256 of the compressed public key.
struct Address {
  Digest digest{};

  std::string hex() const { return to_hex(digest); }
  static Address from_hex(std::string_view hex) { return {array_from_hex<32>(hex)}; }

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

/// Throws std::invalid_argument for the point at infinity.
Address address_of(const Curve& curve, const CurvePoint& pt);

std::string to_hex(const mpz_class& v);
mpz_class mpz_from_hex(std::string_view hex);
mpz_class mpz_from_bytes(ByteView big_endian);
/// Fixed-width big-endian encoding; throws std::overflow_error if v does not fit.
Bytes mpz_to_bytes(const mpz_class& v, std::size_t width);

}  // namespace blindmix
