#include "blindmix/bank.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "blindmix/hash.hpp"

namespace blindmix {

using nlohmann::json;

// ---- config -----------------------------------------------------------------

Rational parse_rational(std::string_view text) {
  const std::string s(text);
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      const std::int64_t num = std::stoll(s.substr(0, slash));
      const std::int64_t den = std::stoll(s.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      return {num, den};
    }
    if (const auto dot = s.find('.'); dot != std::string::npos) {
      const std::string whole = s.substr(0, dot);
      const std::string frac = s.substr(dot + 1);
      if (frac.size() > 12 || frac.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("bad decimal");
      }
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const std::int64_t w = whole.empty() ? 0 : std::stoll(whole);
      const std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
      return Rational(w * den + f, den);
    }
    return Rational(std::stoll(s));
  } catch (const std::exception&) {
    throw BankError(BankErrc::config, "cannot parse rational '" + s + "'");
  }
}

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

void BankConfig::validate() const {
  if (denominations.empty()) throw BankError(BankErrc::config, "denomination list is empty");
  std::set<Amount> seen;
  for (Amount v : denominations) {
    if (v == 0) throw BankError(BankErrc::config, "denominations must be positive");
    if (!seen.insert(v).second) throw BankError(BankErrc::config, "duplicate denomination");
  }
  if (fee_rate < 0 || fee_rate >= 1) throw BankError(BankErrc::config, "fee rate must lie in [0, 1)");
}

bool BankConfig::allows(Amount denomination) const {
  return std::find(denominations.begin(), denominations.end(), denomination) != denominations.end();
}

Amount BankConfig::payout(Amount denomination) const {
  const Rational keep = Rational(1) - fee_rate;
  const auto num = static_cast<unsigned __int128>(denomination) * static_cast<unsigned __int128>(keep.numerator());
  return static_cast<Amount>(num / static_cast<unsigned __int128>(keep.denominator()));
}

Amount BankConfig::pool_funding() const {
  if (withdrawal_funding != 0) return withdrawal_funding;
  const Amount largest = *std::max_element(denominations.begin(), denominations.end());
  return largest + largest / 10;
}

BankConfig BankConfig::from_kv(const KvFile& kv) {
  BankConfig c;
  std::stringstream list(kv.at("denominations"));
  std::string item;
  while (std::getline(list, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    try {
      c.denominations.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw BankError(BankErrc::config, "bad denomination '" + item + "'");
    }
  }
  auto number = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!kv.contains(key)) return fallback;
    try {
      return std::stoull(kv.at(key));
    } catch (const std::exception&) {
      throw BankError(BankErrc::config, std::string("bad value for ") + key);
    }
  };
  c.required_confirmations = static_cast<std::uint32_t>(number("required_confirmations", c.required_confirmations));
  c.withdrawal_delay_blocks = static_cast<std::uint32_t>(number("withdrawal_delay_blocks", c.withdrawal_delay_blocks));
  c.withdrawal_pool_target = static_cast<std::uint32_t>(number("withdrawal_pool_target", c.withdrawal_pool_target));
  c.withdrawal_funding = number("withdrawal_funding", c.withdrawal_funding);
  c.session_expiry_blocks = number("session_expiry_blocks", c.session_expiry_blocks);
  c.refund_margin = number("refund_margin", c.refund_margin);
  if (kv.contains("fee_rate")) c.fee_rate = parse_rational(kv.at("fee_rate"));
  c.validate();
  return c;
}

std::string BankConfig::to_kv() const {
  std::ostringstream out;
  out << "denominations = ";
  for (std::size_t i = 0; i < denominations.size(); ++i) out << (i ? ", " : "") << denominations[i];
  out << "\nrequired_confirmations = " << required_confirmations
      << "\nwithdrawal_delay_blocks = " << withdrawal_delay_blocks
      << "\nfee_rate = " << format_rational(fee_rate)
      << "\nwithdrawal_pool_target = " << withdrawal_pool_target
      << "\nwithdrawal_funding = " << withdrawal_funding
      << "\nsession_expiry_blocks = " << session_expiry_blocks
      << "\nrefund_margin = " << refund_margin << "\n";
  return out.str();
}

// ---- vouchers ----------------------------------------------------------------

bool verify_deposit_offer(const Curve& curve, const CurvePoint& bank_key, const DepositOffer& offer) {
  if (offer.r.is_infinity() || !curve.on_curve(offer.r)) return false;
  if (address_of(curve, offer.r) != offer.address) return false;
  return plain_verify(curve, bank_key, curve.serialize(offer.r), offer.signature);
}

Bytes deposit_voucher_payload(const Curve& curve, const Scalar& c_prime, Amount denomination, const Digest& tx_id) {
  Bytes out = curve.scalar_to_bytes(c_prime);
  append_u64(out, denomination);
  append(out, tx_id);
  return out;
}

Bytes encode_voucher(const Curve& curve, const WithdrawalVoucher& v) {
  Bytes out = encode_message(curve, v.message);
  append(out, curve.scalar_to_bytes(v.signature.c));
  append(out, curve.scalar_to_bytes(v.signature.s));
  return out;
}

WithdrawalVoucher decode_voucher(const Curve& curve, ByteView bytes) {
  const std::size_t m_len = message_size(curve);
  const std::size_t w = curve.scalar_bytes();
  if (bytes.size() != m_len + 2 * w) throw DecodeError("bad voucher length");
  WithdrawalVoucher v;
  v.message = decode_message(curve, bytes.first(m_len));
  const mpz_class c = mpz_from_bytes(bytes.subspan(m_len, w));
  const mpz_class s = mpz_from_bytes(bytes.subspan(m_len + w, w));
  if (c >= curve.order() || s >= curve.order()) throw DecodeError("voucher scalar out of range");
  v.signature = {{c}, {s}};
  return v;
}

Digest voucher_digest(const Curve& curve, const WithdrawalVoucher& v) { return hash256(encode_voucher(curve, v)); }

const char* to_string(VoucherStatus status) {
  switch (status) {
    case VoucherStatus::valid: return "valid";
    case VoucherStatus::spent: return "spent";
    case VoucherStatus::invalid_message: return "invalid_message";
    case VoucherStatus::bad_signature: return "bad_signature";
  }
  return "unknown";
}

std::optional<VoucherStatus> voucher_status_from_string(std::string_view s) {
  for (VoucherStatus v : {VoucherStatus::valid, VoucherStatus::spent, VoucherStatus::invalid_message,
                          VoucherStatus::bad_signature}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

constexpr BankErrc kAllErrcs[] = {
    BankErrc::config, BankErrc::tx_already_used, BankErrc::insufficient_confirmations,
    BankErrc::unknown_transaction, BankErrc::unknown_deposit_address, BankErrc::bad_signature,
    BankErrc::invalid_denomination, BankErrc::insufficient_amount, BankErrc::voucher_spent,
    BankErrc::invalid_message, BankErrc::bad_voucher_signature, BankErrc::delay_not_reached,
    BankErrc::insufficient_liquidity, BankErrc::insufficient_deposits, BankErrc::ledger,
};

}  // namespace

const char* to_string(BankErrc code) {
  switch (code) {
    case BankErrc::config: return "config";
    case BankErrc::tx_already_used: return "tx_already_used";
    case BankErrc::insufficient_confirmations: return "insufficient_confirmations";
    case BankErrc::unknown_transaction: return "unknown_transaction";
    case BankErrc::unknown_deposit_address: return "unknown_deposit_address";
    case BankErrc::bad_signature: return "bad_signature";
    case BankErrc::invalid_denomination: return "invalid_denomination";
    case BankErrc::insufficient_amount: return "insufficient_amount";
    case BankErrc::voucher_spent: return "spent";
    case BankErrc::invalid_message: return "invalid_message";
    case BankErrc::bad_voucher_signature: return "bad_voucher_signature";
    case BankErrc::delay_not_reached: return "delay_not_reached";
    case BankErrc::insufficient_liquidity: return "insufficient_liquidity";
    case BankErrc::insufficient_deposits: return "insufficient_deposits";
    case BankErrc::ledger: return "ledger";
  }
  return "unknown";
}

std::optional<BankErrc> bank_errc_from_string(std::string_view s) {
  for (BankErrc code : kAllErrcs) {
    if (s == to_string(code)) return code;
  }
  return std::nullopt;
}

// ---- bank --------------------------------------------------------------------

Bank::Bank(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
           std::optional<std::filesystem::path> state_path)
    : curve_(curve),
      ledger_(ledger),
      config_(std::move(config)),
      entropy_(entropy),
      state_path_(std::move(state_path)),
      sessions_(curve, config_.session_expiry_blocks) {
  config_.validate();
}

std::unique_ptr<Bank> Bank::create(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
                                   std::optional<std::filesystem::path> state_path) {
  std::unique_ptr<Bank> bank(new Bank(curve, ledger, std::move(config), entropy, std::move(state_path)));
  std::lock_guard lock(bank->mu_);
  bank->key_ = keygen(curve, entropy);
  bank->treasury_ = keygen(curve, entropy);
  bank->selector_.seed(entropy.next_u64());
  bank->fund_pool_locked();
  bank->save_locked();
  return bank;
}

void Bank::fund_pool_locked() {
  const std::uint32_t target = config_.withdrawal_pool_target;
  if (target == 0) return;
  const Amount each = config_.pool_funding();
  const Address treasury_addr = address_of(curve_, treasury_.public_key);
  try {
    const Digest mint = ledger_.coinbase(treasury_addr, each * target);
    std::vector<TxOutput> outputs;
    for (std::uint32_t i = 0; i < target; ++i) outputs.push_back({new_pool_address_locked().address, each});
    ledger_.submit(build_signed_transaction(curve_, {{{mint, 0}, treasury_}}, std::move(outputs),
                                            ledger_.next_height()));
  } catch (const LedgerError& e) {
    throw BankError(BankErrc::ledger, std::string("funding the withdrawal pool failed: ") + e.what());
  }
}

Bank::PoolAddress Bank::new_pool_address_locked() {
  PoolAddress a;
  a.key = keygen(curve_, entropy_);
  a.address = address_of(curve_, a.key.public_key);
  pool_.push_back(a);
  return a;
}

BankPublicParams Bank::public_params() const {
  return {key_.public_key, config_.denominations, config_.fee_rate, config_.required_confirmations,
          config_.withdrawal_delay_blocks};
}

DepositOffer Bank::issue_deposit_address() {
  std::lock_guard lock(mu_);
  DepositSlot slot;
  slot.key = keygen(curve_, entropy_);
  slot.address = address_of(curve_, slot.key.public_key);
  slot.created_at = ledger_.next_height();
  slot.session = sessions_.open_with_nonce(entropy_, slot.key.secret, slot.created_at).id;
  deposits_.push_back(slot);
  save_locked();
  const PlainSignature sig = plain_sign(curve_, key_, curve_.serialize(slot.key.public_key));
  return {slot.key.public_key, sig, slot.address};
}

Scalar Bank::process_deposit(const DepositVoucher& voucher) {
  std::lock_guard lock(mu_);
  // (a) replay
  if (used_tx_ids_.count(voucher.tx_id) != 0) {
    throw BankError(BankErrc::tx_already_used, "deposit transaction was already used");
  }
  // (b) confirmations
  const auto dt = ledger_.transaction(voucher.tx_id);
  if (!dt) throw BankError(BankErrc::unknown_transaction, "deposit transaction not found");
  if (ledger_.confirmations(voucher.tx_id) < config_.required_confirmations) {
    throw BankError(BankErrc::insufficient_confirmations, "deposit transaction lacks confirmations");
  }
  // (c) pays one of our open deposit addresses
  DepositSlot* slot = nullptr;
  Amount received = 0;
  for (const TxOutput& o : dt->outputs) {
    for (DepositSlot& s : deposits_) {
      if (s.address == o.address && s.state == SlotState::open) {
        if (slot == nullptr) slot = &s;
        if (slot == &s) received += o.amount;
      }
    }
  }
  if (slot == nullptr || !sessions_.is_open(slot->session)) {
    throw BankError(BankErrc::unknown_deposit_address, "deposit transaction does not pay an open deposit address");
  }
  // (d) the voucher is signed by the DT's input key Q
  if (dt->inputs.empty()) throw BankError(BankErrc::bad_signature, "deposit transaction has no input key");
  const CurvePoint& q = dt->inputs.front().pubkey;
  const Bytes payload = deposit_voucher_payload(curve_, voucher.c_prime, voucher.denomination, voucher.tx_id);
  if (!plain_verify(curve_, q, payload, voucher.user_signature)) {
    throw BankError(BankErrc::bad_signature, "deposit voucher signature does not verify under the input key");
  }
  // (e) denomination and amount
  if (!config_.allows(voucher.denomination)) {
    throw BankError(BankErrc::invalid_denomination, "denomination is not offered by this bank");
  }
  if (received < voucher.denomination) {
    used_tx_ids_.insert(voucher.tx_id);
    slot->state = SlotState::refunded;
    std::optional<Digest> refund;
    if (received > config_.refund_margin) {
      std::vector<SpendSource> inputs;
      for (const Utxo& u : ledger_.unspent_outputs(slot->address)) inputs.push_back({u.outpoint, slot->key});
      const Amount back = received - config_.refund_margin;
      refund = ledger_.submit(build_signed_transaction(curve_, inputs, {{address_of(curve_, q), back}},
                                                       ledger_.next_height()));
    }
    save_locked();
    throw BankError(BankErrc::insufficient_amount, "deposit amount is below the denomination; refunded", refund);
  }

  const Scalar s_prime = sessions_.sign(slot->session, voucher.c_prime, key_);
  used_tx_ids_.insert(voucher.tx_id);
  slot->state = SlotState::signed_;
  signed_.push_back({voucher.tx_id, voucher.denomination, curve_.scalar(voucher.c_prime.value), s_prime,
                     slot->key.public_key, *ledger_.block_height_of(voucher.tx_id)});
  save_locked();
  return s_prime;
}

VoucherStatus Bank::check_voucher_locked(const WithdrawalVoucher& v) const {
  const PartBlindMessage& m = v.message;
  if (!(m.bank_key == key_.public_key) || !config_.allows(m.denomination)) return VoucherStatus::invalid_message;
  for (const DepositSlot& s : deposits_) {
    if (s.address == m.output) return VoucherStatus::invalid_message;
  }
  for (const PoolAddress& p : pool_) {
    if (p.address == m.output) return VoucherStatus::invalid_message;
  }
  if (!verify(curve_, m, v.signature, key_.public_key)) return VoucherStatus::bad_signature;
  if (spent_vouchers_.count(voucher_digest(curve_, v)) != 0) return VoucherStatus::spent;
  return VoucherStatus::valid;
}

VoucherStatus Bank::verify_voucher(const WithdrawalVoucher& voucher) const {
  std::lock_guard lock(mu_);
  return check_voucher_locked(voucher);
}

bool Bank::delay_reached_locked(Amount denomination) const {
  // A voucher cannot be linked to its deposit, so the delay is enforced on the
  // denomination pool: some deposit of this denomination must have aged at least
  // withdrawal_delay_blocks (measured at the block the WT will enter) and not yet
  // be matched by an earlier withdrawal.
  const std::uint64_t height = ledger_.next_height();
  std::size_t matured = 0;
  for (const SignedRecord& r : signed_) {
    if (r.denomination == denomination && r.deposit_height + config_.withdrawal_delay_blocks <= height) ++matured;
  }
  std::size_t withdrawn = 0;
  for (const RedeemedRecord& r : redeemed_) {
    if (r.voucher.message.denomination == denomination) ++withdrawn;
  }
  return matured > withdrawn;
}

Digest Bank::withdraw(const WithdrawalVoucher& voucher) {
  std::lock_guard lock(mu_);
  switch (check_voucher_locked(voucher)) {
    case VoucherStatus::valid: break;
    case VoucherStatus::spent: throw BankError(BankErrc::voucher_spent, "voucher was already redeemed");
    case VoucherStatus::invalid_message: throw BankError(BankErrc::invalid_message, "voucher message is not valid for this bank");
    case VoucherStatus::bad_signature: throw BankError(BankErrc::bad_voucher_signature, "voucher signature does not verify");
  }
  const Amount v = voucher.message.denomination;
  if (!delay_reached_locked(v)) throw BankError(BankErrc::delay_not_reached, "withdrawal delay has not been reached");

  const Digest digest = voucher_digest(curve_, voucher);
  spent_vouchers_.insert(digest);
  try {
    auto candidates = [&] {
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (ledger_.balance(pool_[i].address) >= v) out.push_back(i);
      }
      return out;
    };
    std::vector<std::size_t> funded = candidates();
    if (funded.empty()) {
      const std::size_t available = funded_deposit_slots_locked().size();
      if (available == 0) throw BankError(BankErrc::insufficient_liquidity, "no funded withdrawal or deposit address");
      dispatch_locked(available);
      funded = candidates();
      if (funded.empty()) throw BankError(BankErrc::insufficient_liquidity, "no withdrawal address holds enough");
    }
    std::uniform_int_distribution<std::size_t> pick(0, funded.size() - 1);
    const PoolAddress& from = pool_[funded[pick(selector_)]];

    std::vector<SpendSource> inputs;
    Amount total = 0;
    for (const Utxo& u : ledger_.unspent_outputs(from.address)) {
      inputs.push_back({u.outpoint, from.key});
      total += u.amount;
    }
    const Amount pay = config_.payout(v);
    std::vector<TxOutput> outputs{{voucher.message.output, pay}};
    if (total > pay) outputs.push_back({from.address, total - pay});
    const Digest wt = ledger_.submit(build_signed_transaction(curve_, inputs, std::move(outputs), ledger_.next_height()));
    redeemed_.push_back({voucher, wt});
    save_locked();
    return wt;
  } catch (const LedgerError& e) {
    spent_vouchers_.erase(digest);
    throw BankError(BankErrc::ledger, std::string("withdrawal transaction rejected: ") + e.what());
  } catch (...) {
    spent_vouchers_.erase(digest);
    throw;
  }
}

std::vector<std::size_t> Bank::funded_deposit_slots_locked() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < deposits_.size(); ++i) {
    if (deposits_[i].state == SlotState::signed_ && ledger_.balance(deposits_[i].address) > 0) out.push_back(i);
  }
  return out;
}

Digest Bank::dispatch_locked(std::size_t count) {
  if (count == 0) throw BankError(BankErrc::insufficient_deposits, "dispatch count must be positive");
  const std::vector<std::size_t> funded = funded_deposit_slots_locked();
  if (funded.size() < count) throw BankError(BankErrc::insufficient_deposits, "not enough funded deposit addresses");
  std::vector<SpendSource> inputs;
  std::vector<TxOutput> outputs;
  for (std::size_t i = 0; i < count; ++i) {
    const DepositSlot& slot = deposits_[funded[i]];
    Amount total = 0;
    for (const Utxo& u : ledger_.unspent_outputs(slot.address)) {
      inputs.push_back({u.outpoint, slot.key});
      total += u.amount;
    }
    outputs.push_back({new_pool_address_locked().address, total});
  }
  try {
    return ledger_.submit(build_signed_transaction(curve_, inputs, std::move(outputs), ledger_.next_height()));
  } catch (const LedgerError& e) {
    pool_.resize(pool_.size() - count);
    throw BankError(BankErrc::ledger, std::string("dispatch transaction rejected: ") + e.what());
  }
}

Digest Bank::dispatch(std::size_t count) {
  std::lock_guard lock(mu_);
  const Digest id = dispatch_locked(count);
  save_locked();
  return id;
}

std::vector<SignedRecord> Bank::signed_records() const {
  std::lock_guard lock(mu_);
  return signed_;
}

std::vector<RedeemedRecord> Bank::redeemed() const {
  std::lock_guard lock(mu_);
  return redeemed_;
}

bool Bank::tx_used(const Digest& tx_id) const {
  std::lock_guard lock(mu_);
  return used_tx_ids_.count(tx_id) != 0;
}

bool Bank::voucher_spent(const WithdrawalVoucher& v) const {
  std::lock_guard lock(mu_);
  return spent_vouchers_.count(voucher_digest(curve_, v)) != 0;
}

std::vector<Address> Bank::deposit_addresses() const {
  std::lock_guard lock(mu_);
  std::vector<Address> out;
  for (const DepositSlot& s : deposits_) out.push_back(s.address);
  return out;
}

std::vector<Address> Bank::withdrawal_addresses() const {
  std::lock_guard lock(mu_);
  std::vector<Address> out;
  for (const PoolAddress& p : pool_) out.push_back(p.address);
  return out;
}

std::vector<Address> Bank::all_addresses() const {
  std::vector<Address> out = deposit_addresses();
  for (const Address& a : withdrawal_addresses()) out.push_back(a);
  std::lock_guard lock(mu_);
  out.push_back(address_of(curve_, treasury_.public_key));
  out.push_back(address_of(curve_, key_.public_key));
  return out;
}

Amount Bank::holdings() const {
  Amount total = 0;
  for (const Address& a : all_addresses()) total += ledger_.balance(a);
  return total;
}

std::size_t Bank::funded_deposit_count() const {
  std::lock_guard lock(mu_);
  return funded_deposit_slots_locked().size();
}

std::size_t Bank::expire_sessions() {
  std::lock_guard lock(mu_);
  const std::size_t dropped = sessions_.expire(ledger_.next_height());
  if (dropped != 0) save_locked();
  return dropped;
}

// ---- persistence -----------------------------------------------------------

namespace {

std::string scalar_hex(const Curve& curve, const Scalar& s) { return to_hex(curve.scalar_to_bytes(s)); }

Scalar scalar_from_json(const Curve& curve, const json& j) {
  return curve.scalar_from_bytes(from_hex(j.get<std::string>()));
}

}  // namespace

std::string Bank::snapshot_json() const {
  std::lock_guard lock(mu_);
  return snapshot_json_locked();
}

std::string Bank::snapshot_json_locked() const {
  json j;
  j["curve"] = curve_.name();
  j["bank_public_key"] = to_hex(curve_.serialize(key_.public_key));
  j["bank_secret"] = scalar_hex(curve_, key_.secret);
  j["treasury_secret"] = scalar_hex(curve_, treasury_.secret);
  j["deposits"] = json::array();
  for (const DepositSlot& s : deposits_) {
    j["deposits"].push_back({{"secret", scalar_hex(curve_, s.key.secret)},
                             {"session", to_hex(s.session)},
                             {"created_at", s.created_at},
                             {"state", s.state == SlotState::open     ? "open"
                                       : s.state == SlotState::signed_ ? "signed"
                                                                       : "refunded"},
                             {"session_open", sessions_.is_open(s.session)}});
  }
  j["withdrawal_pool"] = json::array();
  for (const PoolAddress& p : pool_) j["withdrawal_pool"].push_back(scalar_hex(curve_, p.key.secret));
  j["used_tx_ids"] = json::array();
  for (const Digest& d : used_tx_ids_) j["used_tx_ids"].push_back(to_hex(d));
  j["signed_records"] = json::array();
  for (const SignedRecord& r : signed_) {
    j["signed_records"].push_back({{"tx_id", to_hex(r.tx_id)},
                                   {"denomination", r.denomination},
                                   {"c_prime", scalar_hex(curve_, r.c_prime)},
                                   {"s_prime", scalar_hex(curve_, r.s_prime)},
                                   {"r", to_hex(curve_.serialize(r.r))},
                                   {"deposit_height", r.deposit_height}});
  }
  j["spent_vouchers"] = json::array();
  for (const Digest& d : spent_vouchers_) j["spent_vouchers"].push_back(to_hex(d));
  j["redeemed"] = json::array();
  for (const RedeemedRecord& r : redeemed_) {
    j["redeemed"].push_back({{"voucher", to_hex(encode_voucher(curve_, r.voucher))},
                             {"withdrawal_tx", to_hex(r.withdrawal_tx)}});
  }
  return j.dump(1);
}

void Bank::save() const {
  std::lock_guard lock(mu_);
  save_locked();
}

void Bank::save_locked() const {
  if (!state_path_) return;
  const std::filesystem::path tmp = state_path_->string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write bank state " + tmp.string());
    out << snapshot_json_locked() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, *state_path_);
}

std::unique_ptr<Bank> Bank::load(const Curve& curve, Ledger& ledger, BankConfig config, Entropy& entropy,
                                 const std::filesystem::path& state_path) {
  std::ifstream in(state_path);
  if (!in) throw std::runtime_error("cannot read bank state " + state_path.string());
  const json j = json::parse(in);
  if (j.at("curve").get<std::string>() != curve.name()) throw std::runtime_error("bank state is for another curve");

  std::unique_ptr<Bank> bank(new Bank(curve, ledger, std::move(config), entropy, state_path));
  std::lock_guard lock(bank->mu_);
  bank->key_ = keypair_from_secret(curve, scalar_from_json(curve, j.at("bank_secret")));
  bank->treasury_ = keypair_from_secret(curve, scalar_from_json(curve, j.at("treasury_secret")));
  bank->selector_.seed(entropy.next_u64());
  for (const json& d : j.at("deposits")) {
    DepositSlot slot;
    slot.key = keypair_from_secret(curve, scalar_from_json(curve, d.at("secret")));
    slot.address = address_of(curve, slot.key.public_key);
    slot.session = array_from_hex<16>(d.at("session").get<std::string>());
    slot.created_at = d.at("created_at").get<std::uint64_t>();
    const std::string state = d.at("state").get<std::string>();
    slot.state = state == "open" ? SlotState::open : state == "signed" ? SlotState::signed_ : SlotState::refunded;
    if (slot.state == SlotState::open && d.at("session_open").get<bool>()) {
      bank->sessions_.restore(slot.session, slot.key.secret, slot.created_at);
    }
    bank->deposits_.push_back(slot);
  }
  for (const json& p : j.at("withdrawal_pool")) {
    PoolAddress a;
    a.key = keypair_from_secret(curve, scalar_from_json(curve, p));
    a.address = address_of(curve, a.key.public_key);
    bank->pool_.push_back(a);
  }
  for (const json& d : j.at("used_tx_ids")) bank->used_tx_ids_.insert(array_from_hex<32>(d.get<std::string>()));
  for (const json& r : j.at("signed_records")) {
    bank->signed_.push_back({array_from_hex<32>(r.at("tx_id").get<std::string>()),
                             r.at("denomination").get<Amount>(), scalar_from_json(curve, r.at("c_prime")),
                             scalar_from_json(curve, r.at("s_prime")),
                             curve.deserialize(from_hex(r.at("r").get<std::string>())),
                             r.at("deposit_height").get<std::uint64_t>()});
  }
  for (const json& d : j.at("spent_vouchers")) bank->spent_vouchers_.insert(array_from_hex<32>(d.get<std::string>()));
  for (const json& r : j.at("redeemed")) {
    bank->redeemed_.push_back({decode_voucher(curve, from_hex(r.at("voucher").get<std::string>())),
                               array_from_hex<32>(r.at("withdrawal_tx").get<std::string>())});
  }
  return bank;
}

}  // namespace blindmix
