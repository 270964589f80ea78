#pragma once

#include <optional>

#include "blindmix/ec_group.hpp"

namespace blindmix {

/// ECDSA signature (r, s) over the active curve.
struct PlainSignature {
  Scalar r;
  Scalar s;

  friend bool operator==(const PlainSignature&, const PlainSignature&) = default;
};

/// ECDSA with SHA-256 and RFC 6979 deterministic nonces.
PlainSignature plain_sign(const Curve& curve, const KeyPair& key, ByteView msg);

bool plain_verify(const Curve& curve, const CurvePoint& public_key, ByteView msg, const PlainSignature& sig);

/// Fixed-width r || s, each curve.scalar_bytes() wide.
Bytes encode_plain_signature(const Curve& curve, const PlainSignature& sig);
std::optional<PlainSignature> decode_plain_signature(const Curve& curve, ByteView bytes);

/// Malformed encodings verify as false.
bool plain_verify_encoded(const Curve& curve, const CurvePoint& public_key, ByteView msg, ByteView encoded_sig);

/// The RFC 6979 nonce for (secret, SHA-256(msg)); exposed for test vectors.
Scalar rfc6979_nonce(const Curve& curve, const Scalar& secret, const Digest& msg_hash);

}  // namespace blindmix
