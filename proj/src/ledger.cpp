#include "blindmix/ledger.hpp"

#include <limits>

#include "blindmix/hash.hpp"

namespace blindmix {

const char* to_string(LedgerErrc code) {
  switch (code) {
    case LedgerErrc::no_inputs: return "no_inputs";
    case LedgerErrc::no_outputs: return "no_outputs";
    case LedgerErrc::invalid_amount: return "invalid_amount";
    case LedgerErrc::duplicate_tx: return "duplicate_tx";
    case LedgerErrc::missing_input: return "missing_input";
    case LedgerErrc::double_spend: return "double_spend";
    case LedgerErrc::address_mismatch: return "address_mismatch";
    case LedgerErrc::bad_signature: return "bad_signature";
    case LedgerErrc::overspend: return "overspend";
    case LedgerErrc::malformed: return "malformed";
  }
  return "unknown";
}

Bytes serialize_transaction(const Curve& curve, const Transaction& tx, bool include_signatures) {
  Bytes out;
  append_u32(out, static_cast<std::uint32_t>(tx.inputs.size()));
  for (const TxInput& in : tx.inputs) {
    append(out, in.prev_tx);
    append_u32(out, in.prev_index);
    append(out, curve.serialize(in.pubkey));
    if (include_signatures) {
      append(out, encode_plain_signature(curve, in.signature));
    } else {
      out.insert(out.end(), 2 * curve.scalar_bytes(), 0);
    }
  }
  append_u32(out, static_cast<std::uint32_t>(tx.outputs.size()));
  for (const TxOutput& o : tx.outputs) {
    append(out, o.address.digest);
    append_u64(out, o.amount);
  }
  append_u64(out, tx.timestamp);
  return out;
}

Transaction deserialize_transaction(const Curve& curve, ByteView bytes) {
  ByteReader in(bytes);
  Transaction tx;
  const std::uint32_t n_in = in.u32();
  if (n_in > in.remaining()) throw DecodeError("implausible input count");
  for (std::uint32_t i = 0; i < n_in; ++i) {
    TxInput input;
    input.prev_tx = in.array<32>();
    input.prev_index = in.u32();
    input.pubkey = curve.deserialize(in.take(curve.point_bytes()));
    const auto sig = decode_plain_signature(curve, in.take(2 * curve.scalar_bytes()));
    if (!sig) throw DecodeError("malformed input signature");
    input.signature = *sig;
    tx.inputs.push_back(std::move(input));
  }
  const std::uint32_t n_out = in.u32();
  if (n_out > in.remaining()) throw DecodeError("implausible output count");
  for (std::uint32_t i = 0; i < n_out; ++i) {
    TxOutput o;
    o.address.digest = in.array<32>();
    o.amount = in.u64();
    tx.outputs.push_back(o);
  }
  tx.timestamp = in.u64();
  if (!in.done()) throw DecodeError("trailing bytes after transaction");
  return tx;
}

Digest transaction_id(const Curve& curve, const Transaction& tx) {
  return hash256(serialize_transaction(curve, tx, false));
}

Transaction build_signed_transaction(const Curve& curve, const std::vector<SpendSource>& inputs,
                                     std::vector<TxOutput> outputs, std::uint64_t timestamp) {
  Transaction tx;
  tx.outputs = std::move(outputs);
  tx.timestamp = timestamp;
  for (const SpendSource& src : inputs) {
    TxInput in;
    in.prev_tx = src.prev.tx;
    in.prev_index = src.prev.index;
    in.pubkey = src.key.public_key;
    tx.inputs.push_back(std::move(in));
  }
  const Digest digest = transaction_id(curve, tx);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    tx.inputs[i].signature = plain_sign(curve, inputs[i].key, digest);
  }
  return tx;
}

Ledger::Ledger(const Curve& curve) : curve_(curve) {}

Ledger::Ledger(const Curve& curve, const std::filesystem::path& journal) : curve_(curve) {
  if (std::filesystem::exists(journal)) {
    std::ifstream in(journal);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto space = line.find(' ');
      const std::string kind = line.substr(0, space);
      const std::string body = space == std::string::npos ? "" : line.substr(space + 1);
      try {
        if (kind == "block") {
          const Block b = mine_locked();
          if (std::to_string(b.height) != body) throw LedgerError(LedgerErrc::malformed, "block height mismatch");
        } else if (kind == "tx" || kind == "coinbase") {
          const Transaction tx = deserialize_transaction(curve_, from_hex(body));
          if (kind == "tx") {
            accept_locked(tx);
          } else {
            mint_locked(tx);
          }
        } else {
          throw LedgerError(LedgerErrc::malformed, "unknown record kind " + kind);
        }
      } catch (const std::exception& e) {
        throw LedgerError(LedgerErrc::malformed,
                          journal.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  journal_.emplace(journal, std::ios::app);
  if (!*journal_) throw std::runtime_error("cannot open ledger journal " + journal.string());
}

void Ledger::journal(const std::string& line) {
  if (!journal_) return;
  *journal_ << line << '\n';
  journal_->flush();
}

Digest Ledger::submit(const Transaction& tx) {
  std::lock_guard lock(mu_);
  const Digest id = accept_locked(tx);
  journal("tx " + to_hex(serialize_transaction(curve_, tx)));
  return id;
}

Digest Ledger::coinbase(const Address& to, Amount amount) {
  if (amount == 0) throw LedgerError(LedgerErrc::invalid_amount, "coinbase amount must be positive");
  std::lock_guard lock(mu_);
  Transaction tx;
  tx.outputs.push_back({to, amount});
  tx.timestamp = mint_sequence_;
  const Digest id = mint_locked(tx);
  journal("coinbase " + to_hex(serialize_transaction(curve_, tx)));
  return id;
}

Block Ledger::mine_block() {
  std::lock_guard lock(mu_);
  Block b = mine_locked();
  journal("block " + std::to_string(b.height));
  return b;
}

Digest Ledger::mint_locked(const Transaction& tx) {
  if (!tx.is_coinbase()) throw LedgerError(LedgerErrc::malformed, "coinbase must not have inputs");
  if (tx.outputs.empty()) throw LedgerError(LedgerErrc::no_outputs, "coinbase without outputs");
  Amount total = 0;
  for (const TxOutput& o : tx.outputs) {
    if (o.amount == 0 || o.amount > std::numeric_limits<Amount>::max() - total) {
      throw LedgerError(LedgerErrc::invalid_amount, "invalid coinbase amount");
    }
    total += o.amount;
  }
  const Digest id = transaction_id(curve_, tx);
  if (txs_.count(id) != 0) throw LedgerError(LedgerErrc::duplicate_tx, "duplicate coinbase");
  for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) utxos_.emplace(OutPoint{id, i}, tx.outputs[i]);
  txs_.emplace(id, Record{tx, std::nullopt});
  order_.push_back(id);
  mempool_.push_back(id);
  mint_sequence_ = std::max(mint_sequence_, tx.timestamp) + 1;
  minted_ += total;
  return id;
}

Digest Ledger::accept_locked(const Transaction& tx) {
  if (tx.inputs.empty()) throw LedgerError(LedgerErrc::no_inputs, "transaction has no inputs");
  if (tx.outputs.empty()) throw LedgerError(LedgerErrc::no_outputs, "transaction has no outputs");
  const Digest id = transaction_id(curve_, tx);
  if (txs_.count(id) != 0) throw LedgerError(LedgerErrc::duplicate_tx, "transaction already known");

  Amount in_total = 0;
  std::set<OutPoint> seen;
  for (const TxInput& in : tx.inputs) {
    const OutPoint op{in.prev_tx, in.prev_index};
    if (!seen.insert(op).second) throw LedgerError(LedgerErrc::double_spend, "input spent twice in one transaction");
    const auto it = utxos_.find(op);
    if (it == utxos_.end()) {
      if (spent_by_.count(op) != 0) throw LedgerError(LedgerErrc::double_spend, "input already spent");
      throw LedgerError(LedgerErrc::missing_input, "input references an unknown output");
    }
    if (in.pubkey.is_infinity() || address_of(curve_, in.pubkey) != it->second.address) {
      throw LedgerError(LedgerErrc::address_mismatch, "public key does not match the spent address");
    }
    if (!plain_verify(curve_, in.pubkey, id, in.signature)) {
      throw LedgerError(LedgerErrc::bad_signature, "input signature does not verify");
    }
    in_total += it->second.amount;
  }
  Amount out_total = 0;
  for (const TxOutput& o : tx.outputs) {
    if (o.amount == 0 || o.amount > std::numeric_limits<Amount>::max() - out_total) {
      throw LedgerError(LedgerErrc::invalid_amount, "invalid output amount");
    }
    out_total += o.amount;
  }
  if (out_total > in_total) throw LedgerError(LedgerErrc::overspend, "outputs exceed inputs");

  for (const TxInput& in : tx.inputs) {
    const OutPoint op{in.prev_tx, in.prev_index};
    utxos_.erase(op);
    spent_by_.emplace(op, id);
  }
  for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) utxos_.emplace(OutPoint{id, i}, tx.outputs[i]);
  txs_.emplace(id, Record{tx, std::nullopt});
  order_.push_back(id);
  mempool_.push_back(id);
  fees_ += in_total - out_total;
  return id;
}

Block Ledger::mine_locked() {
  Block b;
  b.height = blocks_.size();
  b.tx_ids = std::move(mempool_);
  mempool_.clear();
  for (const Digest& id : b.tx_ids) txs_.at(id).height = b.height;
  blocks_.push_back(b);
  return b;
}

std::uint64_t Ledger::confirmations(const Digest& id) const {
  std::lock_guard lock(mu_);
  const auto it = txs_.find(id);
  if (it == txs_.end() || !it->second.height) return 0;
  return blocks_.size() - *it->second.height;
}

std::vector<Utxo> Ledger::unspent_outputs(const Address& address) const {
  std::lock_guard lock(mu_);
  std::vector<Utxo> out;
  for (const auto& [op, o] : utxos_) {
    if (o.address == address) out.push_back({op, o.address, o.amount});
  }
  return out;
}

Amount Ledger::balance(const Address& address) const {
  Amount total = 0;
  for (const Utxo& u : unspent_outputs(address)) total += u.amount;
  return total;
}

std::optional<Transaction> Ledger::transaction(const Digest& id) const {
  std::lock_guard lock(mu_);
  const auto it = txs_.find(id);
  if (it == txs_.end()) return std::nullopt;
  return it->second.tx;
}

std::optional<std::uint64_t> Ledger::block_height_of(const Digest& id) const {
  std::lock_guard lock(mu_);
  const auto it = txs_.find(id);
  if (it == txs_.end()) return std::nullopt;
  return it->second.height;
}

std::optional<std::uint64_t> Ledger::tip_height() const {
  std::lock_guard lock(mu_);
  if (blocks_.empty()) return std::nullopt;
  return blocks_.size() - 1;
}

std::uint64_t Ledger::next_height() const {
  std::lock_guard lock(mu_);
  return blocks_.size();
}

std::vector<Block> Ledger::blocks() const {
  std::lock_guard lock(mu_);
  return blocks_;
}

std::vector<Digest> Ledger::mempool() const {
  std::lock_guard lock(mu_);
  return mempool_;
}

std::optional<Digest> Ledger::spender_of(const OutPoint& out) const {
  std::lock_guard lock(mu_);
  const auto it = spent_by_.find(out);
  if (it == spent_by_.end()) return std::nullopt;
  return it->second;
}

std::vector<LedgerEntry> Ledger::entries() const {
  std::lock_guard lock(mu_);
  std::vector<LedgerEntry> out;
  out.reserve(order_.size());
  for (const Digest& id : order_) {
    const Record& r = txs_.at(id);
    out.push_back({id, r.tx, r.height});
  }
  return out;
}

ConservationReport Ledger::audit() const {
  std::lock_guard lock(mu_);
  ConservationReport report;
  std::map<OutPoint, int> spend_count;
  std::map<OutPoint, Amount> created;
  for (const Digest& id : order_) {
    const Transaction& tx = txs_.at(id).tx;
    Amount in_total = 0;
    Amount out_total = 0;
    for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
      created[{id, i}] = tx.outputs[i].amount;
      out_total += tx.outputs[i].amount;
    }
    for (const TxInput& in : tx.inputs) {
      const OutPoint op{in.prev_tx, in.prev_index};
      if (++spend_count[op] > 1) report.double_spend_free = false;
      const auto it = created.find(op);
      if (it == created.end()) {
        report.double_spend_free = false;  // spends something that did not exist yet
      } else {
        in_total += it->second;
      }
    }
    if (tx.is_coinbase()) {
      report.minted += out_total;
    } else {
      report.fees += in_total - out_total;
    }
  }
  for (const auto& [op, amount] : created) {
    if (spend_count.count(op) == 0) report.unspent += amount;
  }
  Amount indexed = 0;
  for (const auto& [op, o] : utxos_) indexed += o.amount;
  if (indexed != report.unspent) report.double_spend_free = false;
  return report;
}

}  // namespace blindmix
