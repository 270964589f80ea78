#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blindmix/bank.hpp"
#include "blindmix/wire.hpp"

namespace blindmix {

struct InputKey {
  KeyPair key;
  bool used = false;
};

/// A deposit waiting for its blind signature. Holds the only copy of the blinding factors.
struct PendingMix {
  Digest tx_id{};
  std::size_t input_index = 0;
  PartBlindMessage message;
  BlindingSecrets secrets;
  Scalar c_prime;
  CurvePoint r;
};

struct StoredVoucher {
  WithdrawalVoucher voucher;
  std::optional<Digest> withdrawal_tx;
};

struct Wallet {
  std::vector<InputKey> input_keys;
  std::vector<KeyPair> output_keys;
  std::vector<PendingMix> pending;
  std::vector<StoredVoucher> vouchers;

  std::string to_json(const Curve& curve) const;
  static Wallet from_json(const Curve& curve, const std::string& text);
  /// Atomic replace (write to a sibling temp file, then rename).
  void save(const Curve& curve, const std::filesystem::path& path) const;
  static Wallet load(const Curve& curve, const std::filesystem::path& path);
};

class ClientError : public std::runtime_error {
 public:
  enum class Kind {
    bad_deposit_signature,
    invalid_denomination,
    insufficient_funds,
    not_confirmed,
    unknown_pending,
    bad_blind_signature,
    unknown_voucher,
    malformed_voucher,
    voucher_rejected,
  };

  ClientError(Kind kind, const std::string& what, std::optional<VoucherStatus> status = std::nullopt)
      : std::runtime_error(what), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  /// Bank verdict for voucher_rejected.
  std::optional<VoucherStatus> status() const { return status_; }

 private:
  Kind kind_;
  std::optional<VoucherStatus> status_;
};

const char* to_string(ClientError::Kind kind);

/// The user side of a mix. Operations on one wallet must be serialized by the caller.
class Client {
 public:
  Client(const Curve& curve, Wallet& wallet, BankConnection& bank, Entropy& entropy)
      : curve_(curve), wallet_(wallet), bank_(bank), entropy_(entropy) {}

  /// Adds a fresh input key (Q, f) and returns its address.
  Address new_input_key();
  /// Steps 2-3: verified deposit key, DT from one unused input key, blinding.
  PendingMix start_mix(Amount denomination);
  /// Step 5: deposit voucher out, s' back, unblind and check locally before storing.
  WithdrawalVoucher collect_signature(const PendingMix& entry);
  /// Step 6 for the stored voucher at `index`.
  Digest redeem(std::size_t index);

  std::string export_voucher(const WithdrawalVoucher& voucher) const;
  /// Parses, checks the checksum and asks the bank; stores and returns the voucher only if valid.
  WithdrawalVoucher import_voucher(const std::string& text);

  const BankPublicParams& params();

 private:
  const Curve& curve_;
  Wallet& wallet_;
  BankConnection& bank_;
  Entropy& entropy_;
  std::optional<BankPublicParams> params_;
};

/// Hex of encode_voucher || first 4 bytes of hash256(encode_voucher).
std::string encode_voucher_text(const Curve& curve, const WithdrawalVoucher& voucher);
/// Throws ClientError(malformed_voucher) on bad hex, length, checksum or fields.
WithdrawalVoucher decode_voucher_text(const Curve& curve, const std::string& text);

}  // namespace blindmix
