#include "blindmix/blind_sig.hpp"

#include "blindmix/hash.hpp"

namespace blindmix {

std::size_t message_size(const Curve& curve) { return 32 + 8 + curve.point_bytes() + 16; }

Bytes encode_message(const Curve& curve, const PartBlindMessage& m) {
  Bytes out;
  out.reserve(message_size(curve));
  append(out, m.output.digest);
  append_u64(out, m.denomination);
  append(out, curve.serialize(m.bank_key));
  append(out, m.nonce);
  return out;
}

PartBlindMessage decode_message(const Curve& curve, ByteView bytes) {
  if (bytes.size() != message_size(curve)) throw DecodeError("bad message length");
  ByteReader in(bytes);
  PartBlindMessage m;
  m.output.digest = in.array<32>();
  m.denomination = in.u64();
  m.bank_key = curve.deserialize(in.take(curve.point_bytes()));
  m.nonce = in.array<16>();
  return m;
}

Scalar challenge(const Curve& curve, ByteView encoded_message, const Scalar& t) {
  Bytes data(encoded_message.begin(), encoded_message.end());
  append(data, curve.scalar_to_bytes(t));
  return curve.scalar_from_bytes(hash256(data));
}

std::optional<BlindingResult> blind_with_factors(const Curve& curve, const PartBlindMessage& m,
                                                 const CurvePoint& r, const CurvePoint& signer_key,
                                                 const Scalar& gamma, const Scalar& delta) {
  const CurvePoint a = curve.add(r, curve.mul_add(gamma, curve.generator(), delta, signer_key));
  if (a.is_infinity()) return std::nullopt;
  const Scalar t = curve.scalar(a.x);
  if (t.is_zero()) return std::nullopt;
  const Scalar c = challenge(curve, encode_message(curve, m), t);
  return BlindingResult{curve.sub(c, delta), BlindingSecrets{gamma, delta, t, c}};
}

BlindingResult blind(const Curve& curve, const PartBlindMessage& m, const CurvePoint& r,
                     const CurvePoint& signer_key, Entropy& entropy) {
  if (r.is_infinity() || !curve.on_curve(r)) throw BlindingError("commitment R is not a valid point");
  if (signer_key.is_infinity() || !curve.on_curve(signer_key)) throw BlindingError("signer key is not a valid point");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Scalar gamma = curve.random_scalar(entropy);
    const Scalar delta = curve.random_scalar(entropy);
    if (auto out = blind_with_factors(curve, m, r, signer_key, gamma, delta)) return *out;
  }
  throw BlindingError("t = 0 after 1000 resamples");
}

Scalar blind_sign_raw(const Curve& curve, const Scalar& k, const Scalar& c_prime, const Scalar& d) {
  return curve.sub(k, curve.mul(c_prime, d));
}

Signature unblind(const Curve& curve, const Scalar& s_prime, const BlindingSecrets& secrets) {
  return {secrets.c, curve.add(s_prime, secrets.gamma)};
}

bool verify(const Curve& curve, const PartBlindMessage& m, const Signature& sig, const CurvePoint& signer_key) {
  if (signer_key.is_infinity() || !curve.on_curve(signer_key)) return false;
  if (m.bank_key.is_infinity() || !curve.on_curve(m.bank_key)) return false;
  const CurvePoint v = curve.mul_add(sig.c, signer_key, sig.s, curve.generator());
  if (v.is_infinity()) return false;
  const Scalar t = curve.scalar(v.x);
  if (t.is_zero()) return false;
  return challenge(curve, encode_message(curve, m), t) == curve.scalar(sig.c.value);
}

bool transcript_matches(const Curve& curve, const CurvePoint& r, const BlindSignature& transcript,
                        const Signature& sig, const CurvePoint& signer_key) {
  const Scalar gamma_hat = curve.sub(sig.s, transcript.s_prime);
  const Scalar delta_hat = curve.sub(sig.c, transcript.c_prime);
  const CurvePoint lhs = curve.add(r, curve.mul_add(gamma_hat, curve.generator(), delta_hat, signer_key));
  const CurvePoint rhs = curve.mul_add(sig.c, signer_key, sig.s, curve.generator());
  return lhs == rhs;
}

OpenedSession SignerSessionStore::open(Entropy& entropy, std::uint64_t height) {
  return open_with_nonce(entropy, curve_.random_scalar(entropy), height);
}

OpenedSession SignerSessionStore::open_with_nonce(Entropy& entropy, const Scalar& k, std::uint64_t height) {
  const Scalar reduced = curve_.scalar(k.value);
  if (reduced.is_zero()) throw std::invalid_argument("session nonce must be non-zero");
  const CurvePoint r = curve_.mul_base(reduced);
  std::lock_guard lock(mu_);
  for (;;) {
    SessionId id{};
    entropy.fill(id);
    if (sessions_.count(id) != 0) continue;
    sessions_.emplace(id, Entry{reduced, r, height});
    return {id, r};
  }
}

void SignerSessionStore::restore(const SessionId& id, const Scalar& k, std::uint64_t created_at) {
  const Scalar reduced = curve_.scalar(k.value);
  if (reduced.is_zero()) throw std::invalid_argument("session nonce must be non-zero");
  const CurvePoint r = curve_.mul_base(reduced);
  std::lock_guard lock(mu_);
  sessions_[id] = Entry{reduced, r, created_at};
}

Scalar SignerSessionStore::sign(const SessionId& id, const Scalar& c_prime, const KeyPair& signer_key) {
  std::optional<Scalar> k;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(SessionError::Kind::unknown, "unknown signing session");
    if (!it->second.k) throw SessionError(SessionError::Kind::consumed, "signing session already used");
    k.swap(it->second.k);
  }
  return blind_sign_raw(curve_, *k, curve_.scalar(c_prime.value), signer_key.secret);
}

std::size_t SignerSessionStore::expire(std::uint64_t height) {
  std::lock_guard lock(mu_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (it->second.k && height > it->second.created_at + expiry_blocks_) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

bool SignerSessionStore::is_open(const SessionId& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  return it != sessions_.end() && it->second.k.has_value();
}

std::size_t SignerSessionStore::open_count() const {
  std::lock_guard lock(mu_);
  std::size_t count = 0;
  for (const auto& [id, entry] : sessions_) count += entry.k.has_value() ? 1 : 0;
  return count;
}

}  // namespace blindmix
