#include "blindmix/client.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "blindmix/hash.hpp"

namespace blindmix {

const char* to_string(ClientError::Kind kind) {
  using K = ClientError::Kind;
  switch (kind) {
    case K::bad_deposit_signature: return "bad_deposit_signature";
    case K::invalid_denomination: return "invalid_denomination";
    case K::insufficient_funds: return "insufficient_funds";
    case K::not_confirmed: return "not_confirmed";
    case K::unknown_pending: return "unknown_pending";
    case K::bad_blind_signature: return "bad_blind_signature";
    case K::unknown_voucher: return "unknown_voucher";
    case K::malformed_voucher: return "malformed_voucher";
    case K::voucher_rejected: return "voucher_rejected";
  }
  return "unknown";
}

// ---- wallet persistence ----------------------------------------------------

std::string Wallet::to_json(const Curve& curve) const {
  json j;
  j["curve"] = curve.name();
  j["input_keys"] = json::array();
  for (const InputKey& k : input_keys) {
    j["input_keys"].push_back({{"secret", scalar_hex(curve, k.key.secret)}, {"used", k.used}});
  }
  j["output_keys"] = json::array();
  for (const KeyPair& k : output_keys) j["output_keys"].push_back(scalar_hex(curve, k.secret));
  j["pending"] = json::array();
  for (const PendingMix& p : pending) {
    j["pending"].push_back({{"tx_id", to_hex(p.tx_id)},
                            {"input_index", p.input_index},
                            {"message", to_hex(encode_message(curve, p.message))},
                            {"gamma", scalar_hex(curve, p.secrets.gamma)},
                            {"delta", scalar_hex(curve, p.secrets.delta)},
                            {"t", scalar_hex(curve, p.secrets.t)},
                            {"c", scalar_hex(curve, p.secrets.c)},
                            {"c_prime", scalar_hex(curve, p.c_prime)},
                            {"r", point_hex(curve, p.r)}});
  }
  j["vouchers"] = json::array();
  for (const StoredVoucher& v : vouchers) {
    json entry = {{"voucher", to_hex(encode_voucher(curve, v.voucher))}};
    if (v.withdrawal_tx) entry["withdrawal_tx"] = to_hex(*v.withdrawal_tx);
    j["vouchers"].push_back(entry);
  }
  return j.dump(1);
}

Wallet Wallet::from_json(const Curve& curve, const std::string& text) {
  const json j = json::parse(text);
  if (j.at("curve").get<std::string>() != curve.name()) throw DecodeError("wallet belongs to another curve");
  Wallet w;
  for (const json& k : j.at("input_keys")) {
    w.input_keys.push_back(
        {keypair_from_secret(curve, scalar_from_hex(curve, k.at("secret").get<std::string>())), k.at("used").get<bool>()});
  }
  for (const json& k : j.at("output_keys")) {
    w.output_keys.push_back(keypair_from_secret(curve, scalar_from_hex(curve, k.get<std::string>())));
  }
  for (const json& p : j.at("pending")) {
    PendingMix m;
    m.tx_id = array_from_hex<32>(p.at("tx_id").get<std::string>());
    m.input_index = p.at("input_index").get<std::size_t>();
    m.message = decode_message(curve, from_hex(p.at("message").get<std::string>()));
    m.secrets.gamma = scalar_from_hex(curve, p.at("gamma").get<std::string>());
    m.secrets.delta = scalar_from_hex(curve, p.at("delta").get<std::string>());
    m.secrets.t = scalar_from_hex(curve, p.at("t").get<std::string>());
    m.secrets.c = scalar_from_hex(curve, p.at("c").get<std::string>());
    m.c_prime = scalar_from_hex(curve, p.at("c_prime").get<std::string>());
    m.r = point_from_hex(curve, p.at("r").get<std::string>());
    w.pending.push_back(m);
  }
  for (const json& v : j.at("vouchers")) {
    StoredVoucher s{decode_voucher(curve, from_hex(v.at("voucher").get<std::string>())), std::nullopt};
    if (v.contains("withdrawal_tx")) s.withdrawal_tx = array_from_hex<32>(v.at("withdrawal_tx").get<std::string>());
    w.vouchers.push_back(s);
  }
  return w;
}

void Wallet::save(const Curve& curve, const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write wallet " + tmp.string());
    out << to_json(curve) << '\n';
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Wallet Wallet::load(const Curve& curve, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read wallet " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return from_json(curve, text.str());
}

// ---- voucher text ------------------------------------------------------------

std::string encode_voucher_text(const Curve& curve, const WithdrawalVoucher& voucher) {
  Bytes body = encode_voucher(curve, voucher);
  const Digest check = hash256(body);
  body.insert(body.end(), check.begin(), check.begin() + 4);
  return to_hex(body);
}

WithdrawalVoucher decode_voucher_text(const Curve& curve, const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), ::isspace), trimmed.end());
  try {
    const Bytes raw = from_hex(trimmed);
    if (raw.size() < 4) throw DecodeError("too short");
    const ByteView body(raw.data(), raw.size() - 4);
    const Digest check = hash256(body);
    if (!std::equal(check.begin(), check.begin() + 4, raw.end() - 4)) throw DecodeError("checksum mismatch");
    return decode_voucher(curve, body);
  } catch (const DecodeError& e) {
    throw ClientError(ClientError::Kind::malformed_voucher, std::string("malformed voucher: ") + e.what());
  }
}

// ---- protocol ------------------------------------------------------------------

const BankPublicParams& Client::params() {
  if (!params_) params_ = bank_.get_params();
  return *params_;
}

Address Client::new_input_key() {
  wallet_.input_keys.push_back({keygen(curve_, entropy_), false});
  return address_of(curve_, wallet_.input_keys.back().key.public_key);
}

PendingMix Client::start_mix(Amount denomination) {
  const BankPublicParams& p = params();
  if (std::find(p.denominations.begin(), p.denominations.end(), denomination) == p.denominations.end()) {
    throw ClientError(ClientError::Kind::invalid_denomination, "bank does not offer this denomination");
  }

  std::optional<std::size_t> chosen;
  std::vector<Utxo> coins;
  Amount total = 0;
  for (std::size_t i = 0; i < wallet_.input_keys.size() && !chosen; ++i) {
    if (wallet_.input_keys[i].used) continue;
    coins = bank_.utxos(address_of(curve_, wallet_.input_keys[i].key.public_key));
    total = 0;
    for (const Utxo& u : coins) total += u.amount;
    if (total >= denomination) chosen = i;
  }
  if (!chosen) throw ClientError(ClientError::Kind::insufficient_funds, "no unused input key holds the denomination");

  const DepositOffer offer = bank_.get_deposit_address();
  if (!verify_deposit_offer(curve_, p.bank_key, offer)) {
    throw ClientError(ClientError::Kind::bad_deposit_signature, "deposit key is not signed by the bank");
  }

  const KeyPair output = keygen(curve_, entropy_);
  PartBlindMessage m;
  m.output = address_of(curve_, output.public_key);
  m.denomination = denomination;
  m.bank_key = p.bank_key;
  entropy_.fill(m.nonce);
  const BlindingResult blinded = blind(curve_, m, offer.r, p.bank_key, entropy_);

  const KeyPair& input = wallet_.input_keys[*chosen].key;
  std::vector<SpendSource> sources;
  for (const Utxo& u : coins) sources.push_back({u.outpoint, input});
  std::vector<TxOutput> outputs{{offer.address, denomination}};
  if (total > denomination) outputs.push_back({address_of(curve_, input.public_key), total - denomination});
  const Transaction dt = build_signed_transaction(curve_, sources, std::move(outputs), bank_.next_height());
  const Digest tx_id = bank_.submit_tx(dt);

  wallet_.input_keys[*chosen].used = true;
  wallet_.output_keys.push_back(output);
  PendingMix entry{tx_id, *chosen, m, blinded.secrets, blinded.c_prime, offer.r};
  wallet_.pending.push_back(entry);
  return entry;
}

WithdrawalVoucher Client::collect_signature(const PendingMix& entry) {
  if (entry.input_index >= wallet_.input_keys.size()) {
    throw ClientError(ClientError::Kind::unknown_pending, "pending entry refers to an unknown input key");
  }
  const BankPublicParams& p = params();
  if (bank_.confirmations(entry.tx_id) < p.required_confirmations) {
    throw ClientError(ClientError::Kind::not_confirmed, "deposit transaction lacks confirmations");
  }
  const KeyPair& input = wallet_.input_keys[entry.input_index].key;
  DepositVoucher dv;
  dv.c_prime = entry.c_prime;
  dv.denomination = entry.message.denomination;
  dv.tx_id = entry.tx_id;
  dv.user_signature = plain_sign(curve_, input, deposit_voucher_payload(curve_, dv.c_prime, dv.denomination, dv.tx_id));
  const Scalar s_prime = bank_.blind_sign(dv, input.public_key);

  auto drop_pending = [&] {
    std::erase_if(wallet_.pending, [&](const PendingMix& m) { return m.tx_id == entry.tx_id; });
  };
  const WithdrawalVoucher voucher{entry.message, unblind(curve_, s_prime, entry.secrets)};
  if (!verify(curve_, voucher.message, voucher.signature, p.bank_key)) {
    drop_pending();
    throw ClientError(ClientError::Kind::bad_blind_signature, "unblinded signature does not verify");
  }
  wallet_.vouchers.push_back({voucher, std::nullopt});
  drop_pending();
  return voucher;
}

Digest Client::redeem(std::size_t index) {
  if (index >= wallet_.vouchers.size()) throw ClientError(ClientError::Kind::unknown_voucher, "no such voucher");
  const Digest wt = bank_.withdraw(wallet_.vouchers[index].voucher);
  wallet_.vouchers[index].withdrawal_tx = wt;
  return wt;
}

std::string Client::export_voucher(const WithdrawalVoucher& voucher) const {
  return encode_voucher_text(curve_, voucher);
}

WithdrawalVoucher Client::import_voucher(const std::string& text) {
  const WithdrawalVoucher voucher = decode_voucher_text(curve_, text);
  const VoucherStatus status = bank_.verify(voucher);
  if (status != VoucherStatus::valid) {
    throw ClientError(ClientError::Kind::voucher_rejected, std::string("bank reports voucher ") + to_string(status),
                      status);
  }
  wallet_.vouchers.push_back({voucher, std::nullopt});
  return voucher;
}

}  // namespace blindmix
