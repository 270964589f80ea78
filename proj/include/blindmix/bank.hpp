#pragma once

#include <boost/rational.hpp>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindmix/blind_sig.hpp"
#include "blindmix/kv_file.hpp"
#include "blindmix/ledger.hpp"

namespace blindmix {

using Rational = boost::rational<std::int64_t>;

/// Parses "1/10", "0.1" or "0" into an exact rational.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& r);

struct BankConfig {
  std::vector<Amount> denominations;
  std::uint32_t required_confirmations = 1;
  std::uint32_t withdrawal_delay_blocks = 144;
  Rational fee_rate{0};
  std::uint32_t withdrawal_pool_target = 10;
  /// Per pool address at init; 0 means largest denomination plus 10%.
  Amount withdrawal_funding = 0;
  std::uint64_t session_expiry_blocks = SignerSessionStore::kDefaultExpiryBlocks;
  /// Miner margin withheld from refunds of short deposits.
  Amount refund_margin = 1000;

  /// Throws BankError(config) on an empty or duplicated denomination list, a zero
  /// denomination, or a fee rate outside [0, 1).
  void validate() const;
  bool allows(Amount denomination) const;
  /// floor(v * (1 - fee_rate)).
  Amount payout(Amount denomination) const;
  Amount pool_funding() const;

  static BankConfig from_kv(const KvFile& kv);
  std::string to_kv() const;
};

struct BankPublicParams {
  CurvePoint bank_key;
  std::vector<Amount> denominations;
  Rational fee_rate{0};
  std::uint32_t required_confirmations = 0;
  std::uint32_t withdrawal_delay_blocks = 0;
};

/// (R, sign_d(R), address_of(R)) handed to a depositing user.
struct DepositOffer {
  CurvePoint r;
  PlainSignature signature;
  Address address;
};

/// Client-side check that the deposit key really comes from the bank.
bool verify_deposit_offer(const Curve& curve, const CurvePoint& bank_key, const DepositOffer& offer);

struct DepositVoucher {
  Scalar c_prime;
  Amount denomination = 0;
  Digest tx_id{};
  PlainSignature user_signature;
};

/// c' || v || tx_id, the bytes covered by the user's input-key signature.
Bytes deposit_voucher_payload(const Curve& curve, const Scalar& c_prime, Amount denomination, const Digest& tx_id);

struct WithdrawalVoucher {
  PartBlindMessage message;
  Signature signature;

  friend bool operator==(const WithdrawalVoucher&, const WithdrawalVoucher&) = default;
};

/// m || c || s.
Bytes encode_voucher(const Curve& curve, const WithdrawalVoucher& v);
WithdrawalVoucher decode_voucher(const Curve& curve, ByteView bytes);
/// Spent-set key: hash256(m || c || s).
Digest voucher_digest(const Curve& curve, const WithdrawalVoucher& v);

enum class VoucherStatus { valid, spent, invalid_message, bad_signature };

const char* to_string(VoucherStatus status);
std::optional<VoucherStatus> voucher_status_from_string(std::string_view s);

/// What the bank keeps per blind signature. Never contains gamma, delta, c or s.
struct SignedRecord {
  Digest tx_id{};
  Amount denomination = 0;
  Scalar c_prime;
  Scalar s_prime;
  CurvePoint r;
  std::uint64_t deposit_height = 0;
};

struct RedeemedRecord {
  WithdrawalVoucher voucher;
  Digest withdrawal_tx{};
};

enum class BankErrc {
  config,
  tx_already_used,
  insufficient_confirmations,
  unknown_transaction,
  unknown_deposit_address,
  bad_signature,
  invalid_denomination,
  insufficient_amount,
  voucher_spent,
  invalid_message,
  bad_voucher_signature,
  delay_not_reached,
  insufficient_liquidity,
  insufficient_deposits,
  ledger,
};

const char* to_string(BankErrc code);
std::optional<BankErrc> bank_errc_from_string(std::string_view s);

class BankError : public std::runtime_error {
 public:
  BankError(BankErrc code, const std::string& what, std::optional<Digest> refund_tx = std::nullopt)
      : std::runtime_error(what), code_(code), refund_tx_(refund_tx) {}

  BankErrc code() const { return code_; }
  /// Set for insufficient_amount: the refund transaction sent back to the user.
  const std::optional<Digest>& refund_tx() const { return refund_tx_; }

 private:
  BankErrc code_;
  std::optional<Digest> refund_tx_;
};

/// The mixing bank. Thread safe: every state mutation is an atomic check-and-insert
/// under one lock, and ledger submissions happen only after the mutation succeeded.
class Bank {
 public:
  /// Generates the bank key (P, d) and funds `withdrawal_pool_target` withdrawal
  /// addresses through the ledger. With a state path the snapshot is written
  /// after every mutation.
  static std::unique_ptr<Bank> create(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
                                      std::optional<std::filesystem::path> state_path = std::nullopt);
  /// Restores from a snapshot written by a previous instance.
  static std::unique_ptr<Bank> load(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
                                    const std::filesystem::path& state_path);

  Bank(const Bank&) = delete;
  Bank& operator=(const Bank&) = delete;

  const Curve& curve() const { return curve_; }
  const BankConfig& config() const { return config_; }
  const CurvePoint& public_key() const { return key_.public_key; }
  BankPublicParams public_params() const;

  DepositOffer issue_deposit_address();
  /// Checks in order: tx unused, confirmations, pays a bank deposit address, user
  /// signature under the DT's input key, denomination and amount. Returns s'.
  Scalar process_deposit(const DepositVoucher& voucher);
  VoucherStatus verify_voucher(const WithdrawalVoucher& voucher) const;
  Digest withdraw(const WithdrawalVoucher& voucher);
  /// CoinJoin-style move of `count` funded deposit addresses into fresh withdrawal addresses.
  Digest dispatch(std::size_t count);

  std::vector<SignedRecord> signed_records() const;
  std::vector<RedeemedRecord> redeemed() const;
  bool tx_used(const Digest& tx_id) const;
  bool voucher_spent(const WithdrawalVoucher& v) const;
  /// Every address whose key the bank holds, split by role.
  std::vector<Address> deposit_addresses() const;
  std::vector<Address> withdrawal_addresses() const;
  std::vector<Address> all_addresses() const;
  /// Sum of unspent outputs across every bank-held address.
  Amount holdings() const;
  std::size_t funded_deposit_count() const;

  /// Drops deposit sessions that were never used within session_expiry_blocks.
  std::size_t expire_sessions();

  std::string snapshot_json() const;
  void save() const;

 private:
  enum class SlotState { open, signed_, refunded };

  struct DepositSlot {
    KeyPair key;
    Address address;
    SessionId session{};
    std::uint64_t created_at = 0;
    SlotState state = SlotState::open;
  };

  struct PoolAddress {
    KeyPair key;
    Address address;
  };

  Bank(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
       std::optional<std::filesystem::path> state_path);

  void fund_pool_locked();
  PoolAddress new_pool_address_locked();
  VoucherStatus check_voucher_locked(const WithdrawalVoucher& v) const;
  bool delay_reached_locked(Amount denomination) const;
  Digest dispatch_locked(std::size_t count);
  std::vector<std::size_t> funded_deposit_slots_locked() const;
  void save_locked() const;
  std::string snapshot_json_locked() const;

  const Curve& curve_;
  Ledger& ledger_;
  BankConfig config_;
  Entropy& entropy_;
  std::optional<std::filesystem::path> state_path_;

  mutable std::mutex mu_;
  KeyPair key_;
  KeyPair treasury_;
  SignerSessionStore sessions_;
  std::vector<DepositSlot> deposits_;
  std::vector<PoolAddress> pool_;
  std::set<Digest> used_tx_ids_;
  std::vector<SignedRecord> signed_;
  std::set<Digest> spent_vouchers_;
  std::vector<RedeemedRecord> redeemed_;
  std::mt19937_64 selector_;
};

}  // namespace blindmix
