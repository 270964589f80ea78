#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <functional>
#include <thread>

#include "env.hpp"

using namespace blindmix;
using namespace blindmix::testing;

TEST_SUITE("bank") {

TEST_CASE("config validation") {
  BankConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.denominations = {};
  CHECK(bank_error([&] { c.validate(); }) == BankErrc::config);
  c.denominations = {100000, 100000};
  CHECK(bank_error([&] { c.validate(); }) == BankErrc::config);
  c.denominations = {0};
  CHECK(bank_error([&] { c.validate(); }) == BankErrc::config);
  c = small_config();
  c.fee_rate = Rational(1);
  CHECK(bank_error([&] { c.validate(); }) == BankErrc::config);
}

TEST_CASE("config text round trip and payout") {
  BankConfig c = small_config();
  c.denominations = {100000, 200000};
  const BankConfig back = BankConfig::from_kv(KvFile::parse(c.to_kv()));
  CHECK(back.denominations == c.denominations);
  CHECK(back.fee_rate == c.fee_rate);
  CHECK(back.withdrawal_delay_blocks == c.withdrawal_delay_blocks);
  CHECK(c.payout(100000) == 90000);
  CHECK(parse_rational("0.1") == Rational(1, 10));
  CHECK(parse_rational("1/10") == Rational(1, 10));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(bank_error([] { parse_rational("x"); }) == BankErrc::config);
  CHECK(bank_error([] { BankConfig::from_kv(KvFile::parse("denominations =\n")); }) == BankErrc::config);
}

TEST_CASE("init funds the withdrawal pool") {
  BankEnv env;
  const auto pool = env.bank->withdrawal_addresses();
  CHECK(pool.size() == 3);
  for (const Address& a : pool) CHECK(env.ledger.balance(a) == 110000);
  CHECK(env.ledger.audit().balanced());
}

TEST_CASE("deposit address offers are signed and fresh") {
  BankEnv env;
  const DepositOffer a = env.bank->issue_deposit_address();
  const DepositOffer b = env.bank->issue_deposit_address();
  CHECK(verify_deposit_offer(env.curve, env.bank->public_key(), a));
  CHECK(a.address != b.address);
  DepositOffer forged = a;
  forged.r = b.r;
  forged.address = b.address;
  CHECK_FALSE(verify_deposit_offer(env.curve, env.bank->public_key(), forged));
}

TEST_CASE("honest deposit yields a verifying signature; tx replay is refused") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  CHECK(verify(env.curve, v.message, v.signature, env.bank->public_key()));
  CHECK(env.bank->tx_used(d.tx_id));
  CHECK(bank_error([&] { env.bank->process_deposit(d.voucher); }) == BankErrc::tx_already_used);
  const auto records = env.bank->signed_records();
  REQUIRE(records.size() == 1);
  CHECK(records[0].c_prime == d.blinded.c_prime);
  CHECK(records[0].tx_id == d.tx_id);
}

TEST_CASE("deposit checks in order") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  // Not yet mined.
  CHECK(bank_error([&] { env.bank->process_deposit(d.voucher); }) == BankErrc::insufficient_confirmations);
  CHECK_FALSE(env.bank->tx_used(d.tx_id));
  env.ledger.mine_block();

  DepositVoucher wrong_signer = d.voucher;
  wrong_signer.user_signature = plain_sign(env.curve, keygen(env.curve, env.user_rng),
                                           deposit_voucher_payload(env.curve, d.voucher.c_prime, 100000, d.tx_id));
  CHECK(bank_error([&] { env.bank->process_deposit(wrong_signer); }) == BankErrc::bad_signature);

  DepositVoucher unknown_tx = d.voucher;
  unknown_tx.tx_id[0] ^= 1;
  CHECK(bank_error([&] { env.bank->process_deposit(unknown_tx); }) == BankErrc::unknown_transaction);

  DepositVoucher odd_denomination = d.voucher;
  odd_denomination.denomination = 50000;
  odd_denomination.user_signature = plain_sign(
      env.curve, d.input, deposit_voucher_payload(env.curve, d.voucher.c_prime, 50000, d.tx_id));
  CHECK(bank_error([&] { env.bank->process_deposit(odd_denomination); }) == BankErrc::invalid_denomination);

  // None of the failures consumed anything.
  CHECK_NOTHROW(d.finish(env));
}

TEST_CASE("deposit to a foreign address is refused") {
  BankEnv env;
  const KeyPair q = env.funded_key(200000);
  env.ledger.mine_block();
  const Digest tx = env.pay(q, address_of(env.curve, keygen(env.curve, env.user_rng).public_key), 100000);
  env.ledger.mine_block();
  DepositVoucher v{env.curve.scalar(5), 100000, tx, {}};
  v.user_signature = plain_sign(env.curve, q, deposit_voucher_payload(env.curve, v.c_prime, 100000, tx));
  CHECK(bank_error([&] { env.bank->process_deposit(v); }) == BankErrc::unknown_deposit_address);
}

TEST_CASE("short deposit is refunded minus the miner margin") {
  BankEnv env;
  ManualDeposit d(env, 100000, 90000);
  env.ledger.mine_block();
  const Address back = address_of(env.curve, d.input.public_key);
  const Amount before = env.ledger.balance(back);
  try {
    env.bank->process_deposit(d.voucher);
    FAIL("short deposit accepted");
  } catch (const BankError& e) {
    CHECK(e.code() == BankErrc::insufficient_amount);
    REQUIRE(e.refund_tx().has_value());
    const auto refund = env.ledger.transaction(*e.refund_tx());
    REQUIRE(refund);
    REQUIRE(refund->outputs.size() == 1);
    CHECK(refund->outputs[0].address == back);
    CHECK(refund->outputs[0].amount == 89000);
  }
  CHECK(env.ledger.balance(back) == before + 89000);
  CHECK(bank_error([&] { env.bank->process_deposit(d.voucher); }) == BankErrc::tx_already_used);
  CHECK(env.ledger.audit().balanced());
}

TEST_CASE("voucher verification statuses") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  CHECK(env.bank->verify_voucher(v) == VoucherStatus::valid);

  WithdrawalVoucher other_bank = v;
  other_bank.message.bank_key = keygen(env.curve, env.user_rng).public_key;
  CHECK(env.bank->verify_voucher(other_bank) == VoucherStatus::invalid_message);

  WithdrawalVoucher to_bank = v;
  to_bank.message.output = env.bank->deposit_addresses().front();
  CHECK(env.bank->verify_voucher(to_bank) == VoucherStatus::invalid_message);

  WithdrawalVoucher tampered = v;
  tampered.signature.s = env.curve.add(tampered.signature.s, env.curve.scalar(1));
  CHECK(env.bank->verify_voucher(tampered) == VoucherStatus::bad_signature);

  // verify is read-only.
  CHECK(env.bank->verify_voucher(v) == VoucherStatus::valid);
  env.bank->withdraw(v);
  CHECK(env.bank->verify_voucher(v) == VoucherStatus::spent);
}

TEST_CASE("withdrawal pays v(1 - fee) once") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  const Digest wt = env.bank->withdraw(v);
  env.ledger.mine_block();
  CHECK(env.ledger.balance(v.message.output) == 90000);
  const auto tx = env.ledger.transaction(wt);
  REQUIRE(tx);
  CHECK(tx->outputs[0].amount == 90000);
  for (const Address& a : env.bank->deposit_addresses()) CHECK(a != v.message.output);
  CHECK(bank_error([&] { env.bank->withdraw(v); }) == BankErrc::voucher_spent);
  CHECK(env.ledger.audit().balanced());
}

TEST_CASE("withdrawal before the delay leaves the voucher unspent") {
  BankConfig cfg = small_config();
  cfg.withdrawal_delay_blocks = 3;
  BankEnv env(cfg);
  ManualDeposit d(env, 100000, 100000);
  const std::uint64_t h = env.ledger.mine_block().height;
  const WithdrawalVoucher v = d.finish(env);
  CHECK(bank_error([&] { env.bank->withdraw(v); }) == BankErrc::delay_not_reached);
  CHECK_FALSE(env.bank->voucher_spent(v));
  while (env.ledger.next_height() < h + 3) env.ledger.mine_block();
  CHECK_NOTHROW(env.bank->withdraw(v));
}

TEST_CASE("concurrent redemption of one voucher") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  std::atomic<int> ok{0};
  std::atomic<int> spent{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] {
      try {
        env.bank->withdraw(v);
        ++ok;
      } catch (const BankError& e) {
        if (e.code() == BankErrc::voucher_spent) ++spent;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 1);
  CHECK(spent == 15);
  CHECK(env.ledger.balance(v.message.output) == 90000);
}

TEST_CASE("empty pool triggers a dispatch from deposit addresses") {
  BankConfig cfg = small_config();
  cfg.withdrawal_pool_target = 0;
  BankEnv env(cfg);
  CHECK(env.bank->withdrawal_addresses().empty());
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  CHECK(env.bank->funded_deposit_count() == 1);
  env.bank->withdraw(v);
  CHECK(env.bank->funded_deposit_count() == 0);
  CHECK(env.bank->withdrawal_addresses().size() == 1);
  CHECK(env.ledger.balance(v.message.output) == 90000);
  CHECK(env.ledger.audit().balanced());
}

TEST_CASE("a large withdrawal dispatches the remaining deposits first") {
  BankConfig cfg = small_config();
  cfg.withdrawal_pool_target = 0;
  cfg.denominations = {100000, 200000};
  BankEnv env(cfg);
  ManualDeposit small(env, 100000, 100000);
  env.ledger.mine_block();
  small.finish(env);
  ManualDeposit big(env, 200000, 200000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = big.finish(env);
  env.bank->dispatch(1);  // moves only the small deposit
  env.ledger.mine_block();
  // No withdrawal address holds 200000 yet; the big deposit is dispatched first.
  CHECK(env.bank->funded_deposit_count() == 1);
  CHECK_NOTHROW(env.bank->withdraw(v));
  CHECK(env.bank->funded_deposit_count() == 0);
  CHECK(env.ledger.balance(v.message.output) == 180000);
}

TEST_CASE("dispatch moves funded deposits into fresh withdrawal addresses") {
  BankEnv env;
  std::vector<ManualDeposit> deposits;
  for (int i = 0; i < 4; ++i) deposits.emplace_back(env, 100000, 100000);
  env.ledger.mine_block();
  for (auto& d : deposits) d.finish(env);
  CHECK(bank_error([&] { env.bank->dispatch(0); }) == BankErrc::insufficient_deposits);
  CHECK(bank_error([&] { env.bank->dispatch(5); }) == BankErrc::insufficient_deposits);
  const auto before = env.bank->withdrawal_addresses().size();
  const Digest pt = env.bank->dispatch(4);
  const auto tx = env.ledger.transaction(pt);
  REQUIRE(tx);
  CHECK(tx->inputs.size() == 4);
  CHECK(tx->outputs.size() == 4);
  const auto pool = env.bank->withdrawal_addresses();
  CHECK(pool.size() == before + 4);
  for (std::size_t i = before; i < pool.size(); ++i) {
    CHECK(env.ledger.unspent_outputs(pool[i]).size() == 1);
    CHECK(env.ledger.balance(pool[i]) == 100000);
  }
}

TEST_CASE("fee accounting across a round") {
  BankEnv env;
  const Amount start = env.bank->holdings();
  std::vector<ManualDeposit> deposits;
  for (int i = 0; i < 3; ++i) deposits.emplace_back(env, 100000, 100000);
  env.ledger.mine_block();
  std::vector<WithdrawalVoucher> vouchers;
  for (auto& d : deposits) vouchers.push_back(d.finish(env));
  for (const auto& v : vouchers) env.bank->withdraw(v);
  env.ledger.mine_block();
  CHECK(env.bank->holdings() == start + 3 * 10000);
}

TEST_CASE("bank records hold no blinding secrets before withdrawal") {
  BankEnv env;
  ManualDeposit d(env, 100000, 100000);
  env.ledger.mine_block();
  const WithdrawalVoucher v = d.finish(env);
  const std::string snap = env.bank->snapshot_json();
  const Curve& c = env.curve;
  for (const Scalar& s : {d.blinded.secrets.gamma, d.blinded.secrets.delta, v.signature.c, v.signature.s}) {
    CHECK(snap.find(to_hex(c.scalar_to_bytes(s))) == std::string::npos);
  }
  CHECK(snap.find(v.message.output.hex()) == std::string::npos);
  CHECK(snap.find(to_hex(c.scalar_to_bytes(d.blinded.c_prime))) != std::string::npos);
}

TEST_CASE("state survives a restart") {
  const auto dir = std::filesystem::temp_directory_path() / "blindmix_bank_state_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto state = dir / "state.json";
  const Curve& c = Curve::secp256k1();
  Ledger ledger(c);
  SeededEntropy rng(4);
  SeededEntropy user(5);
  std::unique_ptr<Bank> bank = Bank::create(c, ledger, small_config(), rng, state);
  ledger.mine_block();
  const CurvePoint p = bank->public_key();

  // One finished deposit, one redeemed voucher and one offer still open.
  BankRequestHandler h1(*bank, ledger);
  LocalTransport t1(h1);
  BankConnection conn1(c, t1);
  Wallet wallet;
  Client client(c, wallet, conn1, user);
  for (int i = 0; i < 2; ++i) ledger.coinbase(client.new_input_key(), 110000);
  ledger.mine_block();
  const PendingMix first = client.start_mix(100000);
  const PendingMix second = client.start_mix(100000);
  ledger.mine_block();
  client.collect_signature(first);
  client.redeem(0);
  ledger.mine_block();
  const WithdrawalVoucher redeemed = wallet.vouchers[0].voucher;

  std::unique_ptr<Bank> again = Bank::load(c, ledger, small_config(), rng, state);
  CHECK(again->public_key() == p);
  CHECK(again->tx_used(first.tx_id));
  CHECK(again->voucher_spent(redeemed));
  CHECK(again->verify_voucher(redeemed) == VoucherStatus::spent);
  CHECK(again->withdrawal_addresses() == bank->withdrawal_addresses());
  CHECK(again->signed_records().size() == 1);
  bank.reset();

  // The open deposit session still signs after the restart.
  BankRequestHandler h2(*again, ledger);
  LocalTransport t2(h2);
  BankConnection conn2(c, t2);
  Client resumed(c, wallet, conn2, user);
  const WithdrawalVoucher v = resumed.collect_signature(second);
  CHECK(verify(c, v.message, v.signature, p));
  std::filesystem::remove_all(dir);
}

TEST_CASE("stale deposit sessions expire") {
  BankConfig cfg = small_config();
  cfg.session_expiry_blocks = 2;
  BankEnv env(cfg);
  env.bank->issue_deposit_address();
  CHECK(env.bank->expire_sessions() == 0);
  for (int i = 0; i < 3; ++i) env.ledger.mine_block();
  CHECK(env.bank->expire_sessions() == 1);
}

}
