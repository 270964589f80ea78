#include "blindmix/ec_group.hpp"

#include <stdexcept>

#include "blindmix/hash.hpp"

namespace blindmix {

namespace {

std::size_t byte_width(const mpz_class& v) { return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8; }

mpz_class mod(const mpz_class& v, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
  return r;
}

CurveParams secp256k1_params() {
  CurveParams p;
  p.name = "secp256k1";
  // 2^256 - 2^32 - 2^9 - 2^8 - 2^7 - 2^6 - 2^4 - 1
  p.p = mpz_from_hex("fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f");
  p.a = 0;
  p.b = 7;
  p.g = CurvePoint::affine(
      mpz_from_hex("79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798"),
      mpz_from_hex("483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8"));
  p.n = mpz_from_hex("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
  p.h = 1;
  return p;
}

CurveParams toy_params() {
  CurveParams p;
  p.name = "toy211";
  p.p = 211;
  p.a = 0;
  p.b = 7;
  p.g = CurvePoint::affine(3, 33);
  p.n = 199;
  p.h = 1;
  return p;
}

}  // namespace

std::string to_hex(const mpz_class& v) { return v.get_str(16); }

mpz_class mpz_from_hex(std::string_view hex) {
  mpz_class v;
  if (hex.empty() || v.set_str(std::string(hex), 16) != 0) throw DecodeError("invalid hex integer");
  return v;
}

mpz_class mpz_from_bytes(ByteView big_endian) {
  mpz_class v;
  if (!big_endian.empty()) {
    mpz_import(v.get_mpz_t(), big_endian.size(), 1, 1, 1, 0, big_endian.data());
  }
  return v;
}

Bytes mpz_to_bytes(const mpz_class& v, std::size_t width) {
  if (v < 0) throw std::overflow_error("negative integer");
  const std::size_t needed = v == 0 ? 0 : byte_width(v);
  if (needed > width) throw std::overflow_error("integer wider than field");
  Bytes out(width, 0);
  if (needed != 0) {
    std::size_t written = 0;
    mpz_export(out.data() + (width - needed), &written, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

Curve::Curve(CurveParams params) : params_(std::move(params)) {
  if (params_.p < 5 || mpz_probab_prime_p(params_.p.get_mpz_t(), 32) == 0) {
    throw std::invalid_argument("field modulus must be an odd prime");
  }
  if (params_.p % 4 != 3) throw std::invalid_argument("only p = 3 mod 4 is supported");
  if (params_.n < 2 || mpz_probab_prime_p(params_.n.get_mpz_t(), 32) == 0) {
    throw std::invalid_argument("group order must be prime");
  }
  field_bytes_ = byte_width(params_.p);
  scalar_bytes_ = byte_width(params_.n);
  if (params_.g.is_infinity() || !on_curve(params_.g)) throw std::invalid_argument("G is not on the curve");
  if (!mul(params_.n, params_.g).is_infinity()) throw std::invalid_argument("n*G is not infinity");

  const std::size_t windows = (mpz_sizeinbase(params_.n.get_mpz_t(), 2) + 3) / 4;
  base_table_.resize(windows);
  CurvePoint step = params_.g;
  for (std::size_t i = 0; i < windows; ++i) {
    auto& row = base_table_[i];
    row.reserve(15);
    row.push_back(step);
    for (int j = 1; j < 15; ++j) row.push_back(add(row.back(), step));
    step = add(row.back(), step);  // 16^(i+1) G
  }
}

const Curve& Curve::secp256k1() {
  static const Curve curve(secp256k1_params());
  return curve;
}

const Curve& Curve::toy() {
  static const Curve curve(toy_params());
  return curve;
}

// ---- scalars ---------------------------------------------------------------

Scalar Curve::scalar(const mpz_class& v) const { return {mod(v, params_.n)}; }

Scalar Curve::scalar_from_bytes(ByteView big_endian) const { return scalar(mpz_from_bytes(big_endian)); }

Bytes Curve::scalar_to_bytes(const Scalar& s) const { return mpz_to_bytes(s.value, scalar_bytes_); }

Scalar Curve::add(const Scalar& a, const Scalar& b) const { return scalar(a.value + b.value); }

Scalar Curve::sub(const Scalar& a, const Scalar& b) const { return scalar(a.value - b.value); }

Scalar Curve::mul(const Scalar& a, const Scalar& b) const { return scalar(a.value * b.value); }

Scalar Curve::neg(const Scalar& a) const { return scalar(-a.value); }

Scalar Curve::inverse(const Scalar& a) const {
  mpz_class r;
  if (a.is_zero() || mpz_invert(r.get_mpz_t(), a.value.get_mpz_t(), params_.n.get_mpz_t()) == 0) {
    throw std::domain_error("scalar has no inverse");
  }
  return {r};
}

Scalar Curve::random_scalar(Entropy& entropy) const {
  const std::size_t bits = mpz_sizeinbase(params_.n.get_mpz_t(), 2);
  const std::size_t excess = scalar_bytes_ * 8 - bits;
  Bytes buf(scalar_bytes_);
  for (;;) {
    entropy.fill(buf);
    buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
    mpz_class v = mpz_from_bytes(buf);
    if (v != 0 && v < params_.n) return {v};
  }
}

// ---- affine group law --------------------------------------------------------

void Curve::reduce(mpz_class& v) const { mpz_mod(v.get_mpz_t(), v.get_mpz_t(), params_.p.get_mpz_t()); }

bool Curve::on_curve(const CurvePoint& pt) const {
  if (pt.is_infinity()) return true;
  if (pt.x < 0 || pt.x >= params_.p || pt.y < 0 || pt.y >= params_.p) return false;
  mpz_class lhs = pt.y * pt.y;
  mpz_class rhs = pt.x * pt.x * pt.x + params_.a * pt.x + params_.b;
  reduce(lhs);
  reduce(rhs);
  return lhs == rhs;
}

CurvePoint Curve::negate(const CurvePoint& pt) const {
  if (pt.is_infinity()) return pt;
  mpz_class y = -pt.y;
  reduce(y);
  return CurvePoint::affine(pt.x, y);
}

CurvePoint Curve::add(const CurvePoint& a, const CurvePoint& b) const {
  if (a.is_infinity()) return b;
  if (b.is_infinity()) return a;
  const mpz_class& p = params_.p;
  mpz_class lambda;
  if (a.x == b.x) {
    mpz_class ysum = a.y + b.y;
    reduce(ysum);
    if (ysum == 0) return CurvePoint::at_infinity();
    mpz_class num = 3 * a.x * a.x + params_.a;
    mpz_class den = 2 * a.y;
    reduce(den);
    mpz_invert(den.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    lambda = num * den;
  } else {
    mpz_class num = b.y - a.y;
    mpz_class den = b.x - a.x;
    reduce(den);
    mpz_invert(den.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    lambda = num * den;
  }
  reduce(lambda);
  mpz_class x = lambda * lambda - a.x - b.x;
  reduce(x);
  mpz_class y = lambda * (a.x - x) - a.y;
  reduce(y);
  return CurvePoint::affine(x, y);
}

// ---- Jacobian arithmetic -----------------------------------------------------

Curve::Jacobian Curve::to_jacobian(const CurvePoint& pt) const {
  if (pt.is_infinity()) return {1, 1, 0};
  return {pt.x, pt.y, 1};
}

CurvePoint Curve::to_affine(const Jacobian& j) const {
  if (j.z == 0) return CurvePoint::at_infinity();
  mpz_class zinv;
  mpz_invert(zinv.get_mpz_t(), j.z.get_mpz_t(), params_.p.get_mpz_t());
  mpz_class zinv2 = zinv * zinv;
  reduce(zinv2);
  mpz_class x = j.x * zinv2;
  reduce(x);
  mpz_class y = j.y * zinv2;
  reduce(y);
  y *= zinv;
  reduce(y);
  return CurvePoint::affine(x, y);
}

Curve::Jacobian Curve::dbl(const Jacobian& a) const {
  if (a.z == 0 || a.y == 0) return {1, 1, 0};
  mpz_class xx = a.x * a.x;
  reduce(xx);
  mpz_class yy = a.y * a.y;
  reduce(yy);
  mpz_class yyyy = yy * yy;
  reduce(yyyy);
  mpz_class s = 4 * a.x * yy;
  reduce(s);
  mpz_class m = 3 * xx;
  if (params_.a != 0) {
    mpz_class z2 = a.z * a.z;
    reduce(z2);
    mpz_class z4 = z2 * z2;
    reduce(z4);
    m += params_.a * z4;
  }
  reduce(m);
  Jacobian r;
  r.x = m * m - 2 * s;
  reduce(r.x);
  r.y = m * (s - r.x) - 8 * yyyy;
  reduce(r.y);
  r.z = 2 * a.y * a.z;
  reduce(r.z);
  return r;
}

Curve::Jacobian Curve::add_jacobian(const Jacobian& a, const Jacobian& b) const {
  if (a.z == 0) return b;
  if (b.z == 0) return a;
  mpz_class z1z1 = a.z * a.z;
  reduce(z1z1);
  mpz_class z2z2 = b.z * b.z;
  reduce(z2z2);
  mpz_class u1 = a.x * z2z2;
  reduce(u1);
  mpz_class u2 = b.x * z1z1;
  reduce(u2);
  mpz_class s1 = a.y * b.z;
  reduce(s1);
  s1 *= z2z2;
  reduce(s1);
  mpz_class s2 = b.y * a.z;
  reduce(s2);
  s2 *= z1z1;
  reduce(s2);
  if (u1 == u2) {
    if (s1 == s2) return dbl(a);
    return {1, 1, 0};
  }
  mpz_class h = u2 - u1;
  reduce(h);
  mpz_class r = s2 - s1;
  reduce(r);
  mpz_class hh = h * h;
  reduce(hh);
  mpz_class hhh = hh * h;
  reduce(hhh);
  mpz_class v = u1 * hh;
  reduce(v);
  Jacobian out;
  out.x = r * r - hhh - 2 * v;
  reduce(out.x);
  out.y = r * (v - out.x) - s1 * hhh;
  reduce(out.y);
  out.z = a.z * b.z;
  reduce(out.z);
  out.z *= h;
  reduce(out.z);
  return out;
}

Curve::Jacobian Curve::add_mixed(const Jacobian& a, const CurvePoint& b) const {
  if (b.is_infinity()) return a;
  if (a.z == 0) return to_jacobian(b);
  mpz_class z1z1 = a.z * a.z;
  reduce(z1z1);
  mpz_class u2 = b.x * z1z1;
  reduce(u2);
  mpz_class s2 = b.y * a.z;
  reduce(s2);
  s2 *= z1z1;
  reduce(s2);
  if (a.x == u2) {
    if (a.y == s2) return dbl(a);
    return {1, 1, 0};
  }
  mpz_class h = u2 - a.x;
  reduce(h);
  mpz_class r = s2 - a.y;
  reduce(r);
  mpz_class hh = h * h;
  reduce(hh);
  mpz_class hhh = hh * h;
  reduce(hhh);
  mpz_class v = a.x * hh;
  reduce(v);
  Jacobian out;
  out.x = r * r - hhh - 2 * v;
  reduce(out.x);
  out.y = r * (v - out.x) - a.y * hhh;
  reduce(out.y);
  out.z = a.z * h;
  reduce(out.z);
  return out;
}

CurvePoint Curve::mul(const mpz_class& k, const CurvePoint& pt) const {
  if (pt.is_infinity()) return pt;
  mpz_class e = k;
  if (e < 0) e = mod(e, params_.n);
  if (e == 0) return CurvePoint::at_infinity();

  // 4-bit fixed window.
  std::vector<Jacobian> table(16);
  table[0] = {1, 1, 0};
  table[1] = to_jacobian(pt);
  for (int i = 2; i < 16; ++i) table[i] = add_mixed(table[i - 1], pt);

  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  const std::size_t windows = (bits + 3) / 4;
  Jacobian acc{1, 1, 0};
  for (std::size_t w = windows; w-- > 0;) {
    for (int i = 0; i < 4; ++i) acc = dbl(acc);
    unsigned digit = 0;
    for (int b = 3; b >= 0; --b) digit = (digit << 1) | mpz_tstbit(e.get_mpz_t(), w * 4 + b);
    if (digit != 0) acc = add_jacobian(acc, table[digit]);
  }
  return to_affine(acc);
}

CurvePoint Curve::mul_base(const Scalar& k) const {
  const mpz_class e = mod(k.value, params_.n);
  Jacobian acc{1, 1, 0};
  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (std::size_t w = 0; w * 4 < bits; ++w) {
    unsigned digit = 0;
    for (int b = 3; b >= 0; --b) digit = (digit << 1) | mpz_tstbit(e.get_mpz_t(), w * 4 + b);
    if (digit != 0) acc = add_mixed(acc, base_table_[w][digit - 1]);
  }
  return to_affine(acc);
}

CurvePoint Curve::mul_add(const Scalar& a, const CurvePoint& p, const Scalar& b, const CurvePoint& q) const {
  const mpz_class ea = mod(a.value, params_.n);
  const mpz_class eb = mod(b.value, params_.n);
  const CurvePoint pq = add(p, q);
  const std::size_t bits = std::max(mpz_sizeinbase(ea.get_mpz_t(), 2), mpz_sizeinbase(eb.get_mpz_t(), 2));
  Jacobian acc{1, 1, 0};
  for (std::size_t i = bits; i-- > 0;) {
    acc = dbl(acc);
    const bool ba = mpz_tstbit(ea.get_mpz_t(), i);
    const bool bb = mpz_tstbit(eb.get_mpz_t(), i);
    if (ba && bb) {
      acc = add_mixed(acc, pq);
    } else if (ba) {
      acc = add_mixed(acc, p);
    } else if (bb) {
      acc = add_mixed(acc, q);
    }
  }
  return to_affine(acc);
}

// ---- encoding ------------------------------------------------------------------

std::optional<mpz_class> Curve::sqrt_mod_p(const mpz_class& v) const {
  mpz_class e = (params_.p + 1) / 4;
  mpz_class r;
  mpz_powm(r.get_mpz_t(), v.get_mpz_t(), e.get_mpz_t(), params_.p.get_mpz_t());
  mpz_class check = r * r;
  reduce(check);
  mpz_class target = v;
  reduce(target);
  if (check != target) return std::nullopt;
  return r;
}

Bytes Curve::serialize(const CurvePoint& pt) const {
  if (pt.is_infinity()) throw std::invalid_argument("cannot serialize the point at infinity");
  Bytes out;
  out.reserve(point_bytes());
  out.push_back(mpz_odd_p(pt.y.get_mpz_t()) ? 0x03 : 0x02);
  append(out, mpz_to_bytes(pt.x, field_bytes_));
  return out;
}

CurvePoint Curve::deserialize(ByteView bytes) const {
  if (bytes.size() != point_bytes()) throw DecodeError("bad point length");
  const std::uint8_t prefix = bytes[0];
  if (prefix != 0x02 && prefix != 0x03) throw DecodeError("bad point prefix");
  const mpz_class x = mpz_from_bytes(bytes.subspan(1));
  if (x >= params_.p) throw DecodeError("point x out of range");
  mpz_class rhs = x * x * x + params_.a * x + params_.b;
  reduce(rhs);
  auto y = sqrt_mod_p(rhs);
  if (!y) throw DecodeError("point not on curve");
  if (static_cast<bool>(mpz_odd_p(y->get_mpz_t())) != (prefix == 0x03)) {
    *y = params_.p - *y;
    reduce(*y);
  }
  CurvePoint pt = CurvePoint::affine(x, *y);
  if (!on_curve(pt)) throw DecodeError("point not on curve");
  return pt;
}

std::vector<CurvePoint> Curve::enumerate_points() const {
  if (params_.p > (1 << 20)) throw std::logic_error("curve too large to enumerate");
  const unsigned long p = params_.p.get_ui();
  std::vector<CurvePoint> out{CurvePoint::at_infinity()};
  for (unsigned long x = 0; x < p; ++x) {
    for (unsigned long y = 0; y < p; ++y) {
      CurvePoint pt = CurvePoint::affine(x, y);
      if (on_curve(pt)) out.push_back(pt);
    }
  }
  return out;
}

// ---- keys and addresses ----------------------------------------------------------

KeyPair keygen(const Curve& curve, Entropy& entropy) {
  return keypair_from_secret(curve, curve.random_scalar(entropy));
}

KeyPair keypair_from_secret(const Curve& curve, const Scalar& secret) {
  const Scalar d = curve.scalar(secret.value);
  if (d.is_zero()) throw std::invalid_argument("secret key must be non-zero");
  return {curve.mul_base(d), d};
}

Address address_of(const Curve& curve, const CurvePoint& pt) {
  if (pt.is_infinity()) throw std::invalid_argument("the point at infinity has no address");
  return {double_hash256(curve.serialize(pt))};
}

}  // namespace blindmix
