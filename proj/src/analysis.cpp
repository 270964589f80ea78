#include "blindmix/analysis.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace blindmix {

const char* to_string(TxKind kind) {
  switch (kind) {
    case TxKind::deposit: return "DT";
    case TxKind::dispatch: return "PT";
    case TxKind::withdrawal: return "WT";
  }
  return "?";
}

const char* to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::input_to_deposit: return "Q->R";
    case LinkKind::deposit_to_withdrawal: return "R->T";
    case LinkKind::withdrawal_to_output: return "T->O";
  }
  return "?";
}

Amount band_floor(Amount denomination, const Rational& fee_rate) {
  const Rational keep = Rational(1) - fee_rate;
  const auto num = static_cast<unsigned __int128>(denomination) * static_cast<unsigned __int128>(keep.numerator());
  const auto den = static_cast<unsigned __int128>(keep.denominator());
  return static_cast<Amount>((num + den - 1) / den);
}

namespace {

// Address of every input, resolved through the previous outputs.
std::set<Address> input_addresses(const Ledger& ledger, const Transaction& tx) {
  std::set<Address> out;
  for (const TxInput& in : tx.inputs) {
    if (const auto prev = ledger.transaction(in.prev_tx); prev && in.prev_index < prev->outputs.size()) {
      out.insert(prev->outputs[in.prev_index].address);
    }
  }
  return out;
}

}  // namespace

TraceReport passive_trace(const Ledger& ledger, const Address& input, std::uint64_t omega, Amount denomination,
                          const Rational& fee_rate) {
  TraceReport report;
  report.target_input = input;

  const std::vector<LedgerEntry> entries = ledger.entries();
  std::map<Digest, const LedgerEntry*> by_id;
  for (const LedgerEntry& e : entries) by_id[e.id] = &e;

  const LedgerEntry* dt = nullptr;
  for (const LedgerEntry& e : entries) {
    if (e.tx.is_coinbase() || !e.height) continue;
    if (!input_addresses(ledger, e.tx).count(input)) continue;
    const bool pays_elsewhere = std::any_of(e.tx.outputs.begin(), e.tx.outputs.end(),
                                            [&](const TxOutput& o) { return o.address != input; });
    if (pays_elsewhere) {
      dt = &e;
      break;
    }
  }
  if (dt == nullptr) throw AnalysisError("no mined deposit transaction spends from " + input.hex());
  report.deposit_height = *dt->height;
  report.reachable.insert({TxKind::deposit, dt->id});

  // DT -> deposit outputs -> PT -> withdrawal outputs -> WT.
  std::set<Digest> chain{dt->id};
  for (std::uint32_t i = 0; i < dt->tx.outputs.size(); ++i) {
    if (dt->tx.outputs[i].address == input) continue;
    const auto pt = ledger.spender_of({dt->id, i});
    if (!pt) continue;
    report.reachable.insert({TxKind::dispatch, *pt});
    chain.insert(*pt);
    const auto pt_tx = ledger.transaction(*pt);
    for (std::uint32_t j = 0; pt_tx && j < pt_tx->outputs.size(); ++j) {
      if (const auto wt = ledger.spender_of({*pt, j})) report.reachable.insert({TxKind::withdrawal, *wt});
    }
  }

  if (omega == 0) return report;
  const Amount low = band_floor(denomination, fee_rate);
  for (const LedgerEntry& e : entries) {
    if (e.tx.is_coinbase() || !e.height || chain.count(e.id)) continue;
    if (*e.height <= report.deposit_height || *e.height > report.deposit_height + omega) continue;
    const std::set<Address> own = input_addresses(ledger, e.tx);
    bool candidate = false;
    for (const TxOutput& o : e.tx.outputs) {
      if (o.amount >= low && o.amount <= denomination && !own.count(o.address)) {
        report.candidate_outputs.insert(o.address);
        candidate = true;
      }
    }
    if (candidate) report.candidate_txs.insert(e.id);
  }
  report.candidate_count = report.candidate_txs.size();
  return report;
}

Rational anonymity_probability(std::int64_t n, std::int64_t m) {
  if (m < 1 || n < 1 || n > m) throw std::domain_error("anonymity probability needs 1 <= N <= M");
  return Rational(n, m);
}

std::size_t ActiveInfoSet::count(LinkKind kind, bool attributed) const {
  return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [&](const Link& l) {
    return l.kind == kind && l.owner.has_value() == attributed;
  }));
}

ActiveInfoSet active_info_set(const Curve& curve, const Ledger& ledger, const std::vector<const Wallet*>& attackers,
                              const CurvePoint& bank_key) {
  ActiveInfoSet info;
  const std::vector<LedgerEntry> entries = ledger.entries();

  std::map<Address, std::size_t> own_inputs;
  std::map<Address, std::size_t> own_outputs;
  std::set<Digest> own_withdrawals;
  for (std::size_t w = 0; w < attackers.size(); ++w) {
    for (const InputKey& k : attackers[w]->input_keys) own_inputs[address_of(curve, k.key.public_key)] = w;
    for (const StoredVoucher& v : attackers[w]->vouchers) {
      if (!(v.voucher.message.bank_key == bank_key)) continue;
      own_outputs[v.voucher.message.output] = w;
      if (v.withdrawal_tx) own_withdrawals.insert(*v.withdrawal_tx);
    }
  }

  // Seeds: deposit addresses the attackers paid, withdrawal addresses that paid them.
  for (const LedgerEntry& e : entries) {
    if (e.tx.is_coinbase()) continue;
    const std::set<Address> from = input_addresses(ledger, e.tx);
    const bool own_deposit = std::any_of(from.begin(), from.end(), [&](const Address& a) { return own_inputs.count(a); });
    if (own_deposit) {
      for (const TxOutput& o : e.tx.outputs) {
        if (!from.count(o.address)) info.deposits.insert(o.address);
      }
    }
    if (own_withdrawals.count(e.id)) info.withdrawals.insert(from.begin(), from.end());
  }

  // Propagate roles along the chain until nothing changes.
  for (bool changed = true; changed;) {
    changed = false;
    auto add = [&](std::set<Address>& role, const Address& a) {
      if (role.insert(a).second) changed = true;
    };
    for (const LedgerEntry& e : entries) {
      if (e.tx.is_coinbase()) continue;
      const std::set<Address> from = input_addresses(ledger, e.tx);
      const bool spends_deposit = std::any_of(from.begin(), from.end(), [&](const Address& a) { return info.deposits.count(a); });
      const bool spends_withdrawal =
          std::any_of(from.begin(), from.end(), [&](const Address& a) { return info.withdrawals.count(a); });
      const bool funds_withdrawal = std::any_of(e.tx.outputs.begin(), e.tx.outputs.end(),
                                                [&](const TxOutput& o) { return info.withdrawals.count(o.address); });
      const bool funds_deposit = std::any_of(e.tx.outputs.begin(), e.tx.outputs.end(),
                                             [&](const TxOutput& o) { return info.deposits.count(o.address); });
      if (spends_deposit) {
        // A dispatch: every input is a deposit address, every output a withdrawal address.
        for (const Address& a : from) add(info.deposits, a);
        for (const TxOutput& o : e.tx.outputs) add(info.withdrawals, o.address);
      } else if (spends_withdrawal) {
        for (const TxOutput& o : e.tx.outputs) {
          if (!from.count(o.address)) add(info.outputs, o.address);
        }
      } else if (funds_withdrawal) {
        for (const TxOutput& o : e.tx.outputs) {
          if (!from.count(o.address)) add(info.withdrawals, o.address);
        }
      } else if (funds_deposit) {
        for (const Address& a : from) add(info.inputs, a);
      }
    }
  }

  for (const LedgerEntry& e : entries) {
    if (e.tx.is_coinbase()) continue;
    const std::set<Address> from = input_addresses(ledger, e.tx);
    for (const Address& f : from) {
      for (const TxOutput& o : e.tx.outputs) {
        if (from.count(o.address)) continue;
        if (info.inputs.count(f) && info.deposits.count(o.address)) {
          std::optional<std::size_t> owner;
          if (const auto it = own_inputs.find(f); it != own_inputs.end()) owner = it->second;
          info.links.insert({LinkKind::input_to_deposit, f, o.address, owner});
        } else if (info.deposits.count(f) && info.withdrawals.count(o.address)) {
          info.links.insert({LinkKind::deposit_to_withdrawal, f, o.address, std::nullopt});
        } else if (info.withdrawals.count(f) && info.outputs.count(o.address)) {
          std::optional<std::size_t> owner;
          if (const auto it = own_outputs.find(o.address); it != own_outputs.end()) owner = it->second;
          info.links.insert({LinkKind::withdrawal_to_output, f, o.address, owner});
        }
      }
    }
  }
  return info;
}

AuditResult unlinkability_audit(const Curve& curve, const std::vector<SignedRecord>& records,
                                const std::vector<WithdrawalVoucher>& vouchers, const CurvePoint& bank_key) {
  AuditResult result;
  std::map<Amount, std::pair<std::size_t, std::size_t>> counts;
  for (const SignedRecord& r : records) ++counts[r.denomination].first;
  for (const WithdrawalVoucher& v : vouchers) ++counts[v.message.denomination].second;
  for (const auto& [denomination, c] : counts) {
    if (c.first != c.second) result.count_mismatches.push_back(denomination);
  }

  result.consistency.assign(records.size(), std::vector<std::optional<bool>>(vouchers.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SignedRecord& r = records[i];
    bool row_ok = true;
    for (std::size_t j = 0; j < vouchers.size(); ++j) {
      const WithdrawalVoucher& v = vouchers[j];
      if (v.message.denomination != r.denomination) continue;
      const bool ok = transcript_matches(curve, r.r, {r.c_prime, r.s_prime}, v.signature, bank_key);
      result.consistency[i][j] = ok;
      ++result.compared;
      if (ok) {
        ++result.consistent;
      } else {
        row_ok = false;
      }
    }
    if (!row_ok) result.flagged_records.push_back(i);
  }
  return result;
}

}  // namespace blindmix
