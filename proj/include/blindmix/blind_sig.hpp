#pragma once

// ECC blind signature over the active curve.
//
//   signer:     k random, R = kG                        -> R
//   requester:  A = R + gamma*G + delta*P = (x, y), t = x mod n (resample if 0)
//               c = H(m || t) mod n, c' = c - delta     -> c'
//   signer:     s' = k - c'd                            -> s'
//   requester:  s = s' + gamma; (c, s) signs m
//   verify:     c == H(m || x(cP + sG) mod n) mod n

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "blindmix/ec_group.hpp"

namespace blindmix {

using Nonce = std::array<std::uint8_t, 16>;

/// m = O || v || P || nonce. Fixed-width: 32 + 8 + point_bytes + 16.
struct PartBlindMessage {
  Address output;
  std::uint64_t denomination = 0;
  CurvePoint bank_key;
  Nonce nonce{};

  friend bool operator==(const PartBlindMessage&, const PartBlindMessage&) = default;
};

std::size_t message_size(const Curve& curve);
Bytes encode_message(const Curve& curve, const PartBlindMessage& m);
/// Throws DecodeError on a wrong length or an off-curve bank key.
PartBlindMessage decode_message(const Curve& curve, ByteView bytes);

struct Signature {
  Scalar c;
  Scalar s;

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// The signer's half of a transcript: the blinded challenge and its response.
struct BlindSignature {
  Scalar c_prime;
  Scalar s_prime;
};

/// Requester-private state kept between blind() and unblind().
struct BlindingSecrets {
  Scalar gamma;
  Scalar delta;
  Scalar t;
  Scalar c;

  friend bool operator==(const BlindingSecrets&, const BlindingSecrets&) = default;
};

struct BlindingResult {
  Scalar c_prime;
  BlindingSecrets secrets;
};

class BlindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// c = H(encoded m || t as scalar_bytes big-endian) mod n.
Scalar challenge(const Curve& curve, ByteView encoded_message, const Scalar& t);

/// Blinds m against commitment R and signer key P. Resamples gamma/delta while t == 0,
/// giving up with BlindingError after 1000 attempts.
BlindingResult blind(const Curve& curve, const PartBlindMessage& m, const CurvePoint& r,
                     const CurvePoint& signer_key, Entropy& entropy);

/// Deterministic blinding with caller-chosen factors; nullopt when t == 0.
std::optional<BlindingResult> blind_with_factors(const Curve& curve, const PartBlindMessage& m,
                                                 const CurvePoint& r, const CurvePoint& signer_key,
                                                 const Scalar& gamma, const Scalar& delta);

/// s' = k - c'd mod n.
Scalar blind_sign_raw(const Curve& curve, const Scalar& k, const Scalar& c_prime, const Scalar& d);

/// (c, s) with s = s' + gamma. The caller must verify() before trusting it.
Signature unblind(const Curve& curve, const Scalar& s_prime, const BlindingSecrets& secrets);

/// False for V = cP + sG at infinity, for t = x(V) mod n equal to zero, or on mismatch.
bool verify(const Curve& curve, const PartBlindMessage& m, const Signature& sig, const CurvePoint& signer_key);

/// The blindness identity: R + (s - s')G + (c - c')P == cP + sG.
bool transcript_matches(const Curve& curve, const CurvePoint& r, const BlindSignature& transcript,
                        const Signature& sig, const CurvePoint& signer_key);

using SessionId = std::array<std::uint8_t, 16>;

class SessionError : public std::runtime_error {
 public:
  enum class Kind { unknown, consumed };
  SessionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct OpenedSession {
  SessionId id{};
  CurvePoint r;
};

/// Signer-side registry of one-shot signing sessions. Every k signs at most once
/// and is erased afterwards. All operations are atomic with respect to each other.
class SignerSessionStore {
 public:
  static constexpr std::uint64_t kDefaultExpiryBlocks = 1008;

  explicit SignerSessionStore(const Curve& curve, std::uint64_t expiry_blocks = kDefaultExpiryBlocks)
      : curve_(curve), expiry_blocks_(expiry_blocks) {}

  OpenedSession open(Entropy& entropy, std::uint64_t height);
  /// Opens a session with a caller-chosen k (used when k doubles as a deposit key).
  OpenedSession open_with_nonce(Entropy& entropy, const Scalar& k, std::uint64_t height);

  /// Re-registers an unconsumed session after a restart.
  void restore(const SessionId& id, const Scalar& k, std::uint64_t created_at);

  /// Test-and-set consume. Throws SessionError for unknown, expired, or consumed sessions.
  Scalar sign(const SessionId& id, const Scalar& c_prime, const KeyPair& signer_key);

  /// Drops unconsumed sessions opened more than expiry_blocks before `height`.
  std::size_t expire(std::uint64_t height);

  bool is_open(const SessionId& id) const;
  std::size_t open_count() const;

 private:
  struct Entry {
    std::optional<Scalar> k;  // erased once consumed
    CurvePoint r;
    std::uint64_t created_at = 0;
  };

  const Curve& curve_;
  std::uint64_t expiry_blocks_;
  mutable std::mutex mu_;
  std::map<SessionId, Entry> sessions_;
};

}  // namespace blindmix
