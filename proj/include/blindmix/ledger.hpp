#pragma once

// Simulated UTXO chain: pay-to-pubkey-hash outputs, ECDSA-signed inputs, manually
// mined blocks. No proof of work, no reorgs, fees are implicit (inputs - outputs).

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "blindmix/ec_group.hpp"
#include "blindmix/plain_sig.hpp"

namespace blindmix {

using Amount = std::uint64_t;  // satoshi

inline constexpr Amount kSatoshiPerBtc = 100'000'000;

struct OutPoint {
  Digest tx{};
  std::uint32_t index = 0;

  friend auto operator<=>(const OutPoint&, const OutPoint&) = default;
};

struct TxInput {
  Digest prev_tx{};
  std::uint32_t prev_index = 0;
  CurvePoint pubkey;
  PlainSignature signature;
};

struct TxOutput {
  Address address;
  Amount amount = 0;
};

struct Transaction {
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;
  /// Creation height for ordinary transactions, mint sequence for coinbases.
  std::uint64_t timestamp = 0;

  bool is_coinbase() const { return inputs.empty(); }
};

/// Canonical encoding. With include_signatures = false every signature is zero-filled.
Bytes serialize_transaction(const Curve& curve, const Transaction& tx, bool include_signatures = true);
Transaction deserialize_transaction(const Curve& curve, ByteView bytes);

/// hash256 of the encoding with signatures zeroed. Doubles as the signing digest.
Digest transaction_id(const Curve& curve, const Transaction& tx);

struct SpendSource {
  OutPoint prev;
  KeyPair key;
};

/// Builds and signs every input over the transaction's signing digest.
Transaction build_signed_transaction(const Curve& curve, const std::vector<SpendSource>& inputs,
                                     std::vector<TxOutput> outputs, std::uint64_t timestamp);

struct Block {
  std::uint64_t height = 0;
  std::vector<Digest> tx_ids;
};

struct Utxo {
  OutPoint outpoint;
  Address address;
  Amount amount = 0;
};

struct LedgerEntry {
  Digest id{};
  Transaction tx;
  std::optional<std::uint64_t> height;  // nullopt while queued
};

struct ConservationReport {
  Amount minted = 0;
  Amount fees = 0;
  Amount unspent = 0;
  bool double_spend_free = true;
  bool balanced() const { return double_spend_free && unspent + fees == minted; }
};

enum class LedgerErrc {
  no_inputs,
  no_outputs,
  invalid_amount,
  duplicate_tx,
  missing_input,
  double_spend,
  address_mismatch,
  bad_signature,
  overspend,
  malformed,
};

const char* to_string(LedgerErrc code);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

/// Single serialized state machine; every public method is safe to call concurrently.
class Ledger {
 public:
  explicit Ledger(const Curve& curve);
  /// Opens (replaying if present) an append-only journal: one `coinbase <hex>`,
  /// `tx <hex>` or `block <height>` record per line.
  Ledger(const Curve& curve, const std::filesystem::path& journal);

  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  const Curve& curve() const { return curve_; }

  /// Validates and queues a transaction. Rejected transactions leave state unchanged.
  Digest submit(const Transaction& tx);
  /// Queues an input-less minting transaction. Throws LedgerError(invalid_amount) for 0.
  Digest coinbase(const Address& to, Amount amount);
  Block mine_block();

  /// 0 for unknown or queued transactions, else tip - block height + 1.
  std::uint64_t confirmations(const Digest& id) const;
  std::vector<Utxo> unspent_outputs(const Address& address) const;
  Amount balance(const Address& address) const;
  std::optional<Transaction> transaction(const Digest& id) const;
  std::optional<std::uint64_t> block_height_of(const Digest& id) const;
  std::optional<std::uint64_t> tip_height() const;
  /// Height the next mined block will receive.
  std::uint64_t next_height() const;
  std::vector<Block> blocks() const;
  std::vector<Digest> mempool() const;
  /// Outpoint -> spending transaction, for chain traversal.
  std::optional<Digest> spender_of(const OutPoint& out) const;
  /// Every accepted transaction in submission order.
  std::vector<LedgerEntry> entries() const;

  /// Full scan: minted = unspent + implicit fees, and no outpoint spent twice.
  ConservationReport audit() const;

 private:
  struct Record {
    Transaction tx;
    std::optional<std::uint64_t> height;
  };

  Digest accept_locked(const Transaction& tx);
  Digest mint_locked(const Transaction& tx);
  Block mine_locked();
  void journal(const std::string& line);

  const Curve& curve_;
  mutable std::mutex mu_;
  std::map<Digest, Record> txs_;
  std::vector<Digest> order_;
  std::map<OutPoint, TxOutput> utxos_;
  std::map<OutPoint, Digest> spent_by_;
  std::vector<Block> blocks_;
  std::vector<Digest> mempool_;
  std::uint64_t mint_sequence_ = 0;
  Amount minted_ = 0;
  Amount fees_ = 0;
  std::optional<std::ofstream> journal_;
};

}  // namespace blindmix
