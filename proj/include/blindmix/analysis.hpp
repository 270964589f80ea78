#pragma once

#include <optional>
#include <set>
#include <vector>

#include "blindmix/bank.hpp"
#include "blindmix/client.hpp"
#include "blindmix/ledger.hpp"

namespace blindmix {

enum class TxKind { deposit, dispatch, withdrawal };

const char* to_string(TxKind kind);

struct TraceReport {
  Address target_input;
  std::uint64_t deposit_height = 0;
  std::set<std::pair<TxKind, Digest>> reachable;
  std::set<Digest> candidate_txs;
  std::set<Address> candidate_outputs;
  /// M: transactions in the window carrying an in-band payout.
  std::size_t candidate_count = 0;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower edge of the payout band, ceil(v * (1 - fee_rate)).
Amount band_floor(Amount denomination, const Rational& fee_rate);

/// Passive tracing from an input address. The chain DT -> deposit address -> PT ->
/// WTs is followed and reported; candidates are the mined transactions in blocks
/// (h_DT, h_DT + omega], outside that DT/PT chain, paying an amount in
/// [v(1 - fee), v] to an address that is not one of their own inputs.
TraceReport passive_trace(const Ledger& ledger, const Address& input, std::uint64_t omega, Amount denomination,
                          const Rational& fee_rate);

/// N / M exactly. Throws std::domain_error unless 1 <= N <= M.
Rational anonymity_probability(std::int64_t n, std::int64_t m);

enum class LinkKind { input_to_deposit, deposit_to_withdrawal, withdrawal_to_output };

const char* to_string(LinkKind kind);

struct Link {
  LinkKind kind;
  Address from;
  Address to;
  /// Index of the attacker wallet the edge is attributed to; unset when the edge is
  /// visible but carries no user identity.
  std::optional<std::size_t> owner;

  friend auto operator<=>(const Link&, const Link&) = default;
};

struct ActiveInfoSet {
  std::set<Link> links;
  std::set<Address> inputs;
  std::set<Address> deposits;
  std::set<Address> withdrawals;
  std::set<Address> outputs;

  std::size_t count(LinkKind kind, bool attributed) const;
};

/// What colluding users learn by combining their own wallets with the public chain:
/// their own addresses seed the bank's address roles, which then spread along the
/// transactions that touch them.
ActiveInfoSet active_info_set(const Curve& curve, const Ledger& ledger, const std::vector<const Wallet*>& attackers,
                              const CurvePoint& bank_key);

struct AuditResult {
  /// consistency[i][j] for signed record i against voucher j; unset where denominations differ.
  std::vector<std::vector<std::optional<bool>>> consistency;
  std::vector<std::size_t> flagged_records;
  /// Denominations whose record and voucher counts differ.
  std::vector<Amount> count_mismatches;
  std::size_t compared = 0;
  std::size_t consistent = 0;

  bool all_consistent() const { return compared == consistent && count_mismatches.empty(); }
};

/// The bank-side view: can any signing transcript be tied to any redeemed voucher?
/// Every pairing with a matching denomination is tested against the blindness identity.
AuditResult unlinkability_audit(const Curve& curve, const std::vector<SignedRecord>& records,
                                const std::vector<WithdrawalVoucher>& vouchers, const CurvePoint& bank_key);

}  // namespace blindmix
