#include "blindmix/plain_sig.hpp"

#include "blindmix/hash.hpp"

namespace blindmix {

namespace {

std::size_t qlen(const Curve& curve) { return mpz_sizeinbase(curve.order().get_mpz_t(), 2); }

// RFC 6979 bits2int: leftmost qlen bits of the input as an integer.
mpz_class bits2int(const Curve& curve, ByteView bytes) {
  mpz_class v = mpz_from_bytes(bytes);
  const std::size_t blen = bytes.size() * 8;
  if (blen > qlen(curve)) v >>= static_cast<mp_bitcnt_t>(blen - qlen(curve));
  return v;
}

Bytes bits2octets(const Curve& curve, ByteView bytes) {
  return curve.scalar_to_bytes(curve.scalar(bits2int(curve, bytes)));
}

class NonceStream {
 public:
  NonceStream(const Curve& curve, const Scalar& secret, const Digest& h1) : curve_(curve) {
    v_.fill(0x01);
    k_.fill(0x00);
    const Bytes x = curve.scalar_to_bytes(secret);
    const Bytes h = bits2octets(curve, h1);
    for (std::uint8_t sep : {std::uint8_t{0x00}, std::uint8_t{0x01}}) {
      Bytes data(v_.begin(), v_.end());
      data.push_back(sep);
      append(data, x);
      append(data, h);
      k_ = hmac_sha256(k_, data);
      v_ = hmac_sha256(k_, v_);
    }
  }

  Scalar next() {
    for (;;) {
      Bytes t;
      while (t.size() < curve_.scalar_bytes()) {
        v_ = hmac_sha256(k_, v_);
        append(t, v_);
      }
      t.resize(curve_.scalar_bytes());
      const mpz_class k = bits2int(curve_, t);
      reseed();
      if (k >= 1 && k < curve_.order()) return {k};
    }
  }

 private:
  void reseed() {
    Bytes data(v_.begin(), v_.end());
    data.push_back(0x00);
    k_ = hmac_sha256(k_, data);
    v_ = hmac_sha256(k_, v_);
  }

  const Curve& curve_;
  Digest v_{};
  Digest k_{};
};

}  // namespace

Scalar rfc6979_nonce(const Curve& curve, const Scalar& secret, const Digest& msg_hash) {
  return NonceStream(curve, secret, msg_hash).next();
}

PlainSignature plain_sign(const Curve& curve, const KeyPair& key, ByteView msg) {
  const Digest h1 = hash256(msg);
  const Scalar z = curve.scalar(bits2int(curve, h1));
  NonceStream nonces(curve, key.secret, h1);
  for (;;) {
    const Scalar k = nonces.next();
    const CurvePoint big_r = curve.mul_base(k);
    const Scalar r = curve.scalar(big_r.x);
    if (r.is_zero()) continue;
    const Scalar s = curve.mul(curve.inverse(k), curve.add(z, curve.mul(r, key.secret)));
    if (s.is_zero()) continue;
    return {r, s};
  }
}

bool plain_verify(const Curve& curve, const CurvePoint& public_key, ByteView msg, const PlainSignature& sig) {
  const mpz_class& n = curve.order();
  if (public_key.is_infinity() || !curve.on_curve(public_key)) return false;
  if (sig.r.value < 1 || sig.r.value >= n || sig.s.value < 1 || sig.s.value >= n) return false;
  const Scalar z = curve.scalar(bits2int(curve, hash256(msg)));
  const Scalar w = curve.inverse(sig.s);
  const CurvePoint x = curve.mul_add(curve.mul(z, w), curve.generator(), curve.mul(sig.r, w), public_key);
  if (x.is_infinity()) return false;
  return curve.scalar(x.x) == sig.r;
}

Bytes encode_plain_signature(const Curve& curve, const PlainSignature& sig) {
  Bytes out = curve.scalar_to_bytes(sig.r);
  append(out, curve.scalar_to_bytes(sig.s));
  return out;
}

std::optional<PlainSignature> decode_plain_signature(const Curve& curve, ByteView bytes) {
  const std::size_t w = curve.scalar_bytes();
  if (bytes.size() != 2 * w) return std::nullopt;
  const mpz_class r = mpz_from_bytes(bytes.first(w));
  const mpz_class s = mpz_from_bytes(bytes.subspan(w));
  if (r >= curve.order() || s >= curve.order()) return std::nullopt;
  return PlainSignature{{r}, {s}};
}

bool plain_verify_encoded(const Curve& curve, const CurvePoint& public_key, ByteView msg, ByteView encoded_sig) {
  const auto sig = decode_plain_signature(curve, encoded_sig);
  return sig && plain_verify(curve, public_key, msg, *sig);
}

}  // namespace blindmix
