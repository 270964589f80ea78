#include "doctest.h"

#include <filesystem>

#include "blindmix/ledger.hpp"

using namespace blindmix;

namespace {

struct Fixture {
  const Curve& c = Curve::secp256k1();
  SeededEntropy rng{31};
  Ledger ledger{c};

  KeyPair funded(Amount amount, Digest* id = nullptr) {
    const KeyPair k = keygen(c, rng);
    const Digest d = ledger.coinbase(address_of(c, k.public_key), amount);
    if (id) *id = d;
    return k;
  }
  Address addr(const KeyPair& k) const { return address_of(c, k.public_key); }
};

LedgerErrc rejection(Ledger& ledger, const Transaction& tx) {
  try {
    ledger.submit(tx);
  } catch (const LedgerError& e) {
    return e.code();
  }
  FAIL("transaction accepted");
  return LedgerErrc::malformed;
}

}  // namespace

TEST_SUITE("ledger") {

TEST_CASE("coinbase, mining and confirmations") {
  Fixture f;
  Digest cb{};
  const KeyPair a = f.funded(110000, &cb);
  CHECK(f.ledger.confirmations(cb) == 0);
  CHECK(f.ledger.balance(f.addr(a)) == 110000);
  const Block b0 = f.ledger.mine_block();
  CHECK(b0.height == 0);
  CHECK(f.ledger.confirmations(cb) == 1);
  for (int i = 0; i < 5; ++i) f.ledger.mine_block();
  CHECK(f.ledger.confirmations(cb) == 6);
  CHECK(f.ledger.confirmations(Digest{}) == 0);
  const auto utxos = f.ledger.unspent_outputs(f.addr(a));
  REQUIRE(utxos.size() == 1);
  CHECK(utxos[0].amount == 110000);
  CHECK_THROWS_AS(f.ledger.coinbase(f.addr(a), 0), LedgerError);
}

TEST_CASE("empty block still advances the height") {
  Fixture f;
  CHECK(f.ledger.next_height() == 0);
  CHECK(f.ledger.mine_block().tx_ids.empty());
  CHECK(f.ledger.mine_block().height == 1);
  CHECK(f.ledger.tip_height() == 1u);
}

TEST_CASE("two coinbases to one address are two outputs") {
  Fixture f;
  const KeyPair a = f.funded(5);
  f.ledger.coinbase(f.addr(a), 7);
  CHECK(f.ledger.unspent_outputs(f.addr(a)).size() == 2);
  CHECK(f.ledger.balance(f.addr(a)) == 12);
}

TEST_CASE("spend, resubmit and double spend") {
  Fixture f;
  Digest cb{};
  const KeyPair a = f.funded(1000, &cb);
  const KeyPair b = keygen(f.c, f.rng);
  const Transaction tx = build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 900}}, 0);
  const Digest id = f.ledger.submit(tx);
  CHECK(id == transaction_id(f.c, tx));
  CHECK(f.ledger.balance(f.addr(a)) == 0);
  CHECK(f.ledger.balance(f.addr(b)) == 900);
  CHECK(rejection(f.ledger, tx) == LedgerErrc::duplicate_tx);
  const Transaction again = build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(a), 100}}, 1);
  CHECK(rejection(f.ledger, again) == LedgerErrc::double_spend);
  CHECK(f.ledger.audit().balanced());
  CHECK(f.ledger.audit().fees == 100);
}

TEST_CASE("validation failures leave state unchanged") {
  Fixture f;
  Digest cb{};
  const KeyPair a = f.funded(1000, &cb);
  const KeyPair b = keygen(f.c, f.rng);
  const auto before = f.ledger.entries().size();

  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 1001}}, 0)) ==
        LedgerErrc::overspend);
  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 0}, b}}, {{f.addr(b), 10}}, 0)) ==
        LedgerErrc::address_mismatch);
  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 1}, a}}, {{f.addr(b), 10}}, 0)) ==
        LedgerErrc::missing_input);
  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 0}}, 0)) ==
        LedgerErrc::invalid_amount);
  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 0}, a}}, {}, 0)) == LedgerErrc::no_outputs);
  CHECK(rejection(f.ledger, build_signed_transaction(f.c, {{{cb, 0}, a}, {{cb, 0}, a}}, {{f.addr(b), 10}}, 0)) ==
        LedgerErrc::double_spend);

  Transaction forged = build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 10}}, 0);
  forged.outputs[0].amount = 20;
  CHECK(rejection(f.ledger, forged) == LedgerErrc::bad_signature);

  CHECK(f.ledger.entries().size() == before);
  CHECK(f.ledger.balance(f.addr(a)) == 1000);
}

TEST_CASE("signatures cover the whole transaction") {
  Fixture f;
  Digest cb{};
  const KeyPair a = f.funded(1000, &cb);
  const KeyPair b = keygen(f.c, f.rng);
  const Transaction tx = build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 10}}, 0);
  Transaction moved = tx;
  moved.outputs[0].address = f.addr(a);
  CHECK(rejection(f.ledger, moved) == LedgerErrc::bad_signature);
  Transaction retimed = tx;
  retimed.timestamp = 99;
  CHECK(rejection(f.ledger, retimed) == LedgerErrc::bad_signature);
}

TEST_CASE("ten-in ten-out CoinJoin") {
  Fixture f;
  std::vector<SpendSource> inputs;
  std::vector<TxOutput> outputs;
  for (int i = 0; i < 10; ++i) {
    Digest cb{};
    const KeyPair k = f.funded(100000, &cb);
    inputs.push_back({{cb, 0}, k});
    outputs.push_back({f.addr(keygen(f.c, f.rng)), 100000});
  }
  f.ledger.mine_block();
  const Transaction pt = build_signed_transaction(f.c, inputs, outputs, 1);
  const Digest id = f.ledger.submit(pt);
  f.ledger.mine_block();
  CHECK(f.ledger.confirmations(id) == 1);
  for (const TxOutput& o : outputs) CHECK(f.ledger.unspent_outputs(o.address).size() == 1);
  CHECK(f.ledger.audit().balanced());
}

TEST_CASE("serialization round trip and chain traversal") {
  Fixture f;
  Digest cb{};
  const KeyPair a = f.funded(500, &cb);
  const KeyPair b = keygen(f.c, f.rng);
  const Transaction tx = build_signed_transaction(f.c, {{{cb, 0}, a}}, {{f.addr(b), 400}, {f.addr(a), 50}}, 3);
  const Bytes wire = serialize_transaction(f.c, tx);
  const Transaction back = deserialize_transaction(f.c, wire);
  CHECK(serialize_transaction(f.c, back) == wire);
  CHECK(transaction_id(f.c, back) == transaction_id(f.c, tx));
  CHECK_THROWS_AS(deserialize_transaction(f.c, ByteView(wire).first(wire.size() - 1)), DecodeError);

  const Digest id = f.ledger.submit(tx);
  CHECK(f.ledger.spender_of({cb, 0}) == id);
  const auto stored = f.ledger.transaction(id);
  REQUIRE(stored);
  const auto prev = f.ledger.transaction(stored->inputs[0].prev_tx);
  REQUIRE(prev);
  CHECK(prev->outputs[stored->inputs[0].prev_index].address == f.addr(a));
}

TEST_CASE("same submissions give the same ids and blocks") {
  auto run = [] {
    const Curve& c = Curve::secp256k1();
    SeededEntropy rng(5);
    Ledger l(c);
    const KeyPair a = keygen(c, rng);
    const Digest cb = l.coinbase(address_of(c, a.public_key), 1000);
    l.mine_block();
    l.submit(build_signed_transaction(c, {{{cb, 0}, a}}, {{address_of(c, keygen(c, rng).public_key), 10}}, 1));
    return l.mine_block().tx_ids;
  };
  CHECK(run() == run());
}

TEST_CASE("journal replay reconstructs identical state") {
  const Curve& c = Curve::secp256k1();
  const auto path = std::filesystem::temp_directory_path() / "blindmix_ledger_journal_test.txt";
  std::filesystem::remove(path);
  SeededEntropy rng(6);
  Digest spend{};
  Address target{};
  {
    Ledger l(c, path);
    const KeyPair a = keygen(c, rng);
    const Digest cb = l.coinbase(address_of(c, a.public_key), 1000);
    l.mine_block();
    target = address_of(c, keygen(c, rng).public_key);
    spend = l.submit(build_signed_transaction(c, {{{cb, 0}, a}}, {{target, 990}}, 1));
    l.mine_block();
    l.mine_block();
  }
  Ledger again(c, path);
  CHECK(again.confirmations(spend) == 2);
  CHECK(again.balance(target) == 990);
  CHECK(again.next_height() == 3);
  CHECK(again.audit().balanced());
  std::filesystem::remove(path);
}

TEST_CASE("conservation after a random operation sequence") {
  Fixture f;
  std::vector<std::pair<OutPoint, KeyPair>> coins;
  for (int i = 0; i < 5; ++i) {
    Digest cb{};
    const KeyPair k = f.funded(10000 + i, &cb);
    coins.push_back({{cb, 0}, k});
  }
  for (int round = 0; round < 30; ++round) {
    if (coins.empty()) break;
    const std::size_t pick = f.rng.next_u64() % coins.size();
    const auto [out, key] = coins[pick];
    coins.erase(coins.begin() + static_cast<long>(pick));
    const auto prev = f.ledger.transaction(out.tx);
    const Amount value = prev->outputs[out.index].amount;
    if (value < 4) continue;
    const KeyPair x = keygen(f.c, f.rng);
    const KeyPair y = keygen(f.c, f.rng);
    const Transaction tx =
        build_signed_transaction(f.c, {{out, key}}, {{f.addr(x), value / 2}, {f.addr(y), value / 3}}, round);
    const Digest id = f.ledger.submit(tx);
    coins.push_back({{id, 0}, x});
    coins.push_back({{id, 1}, y});
    if (round % 4 == 0) f.ledger.mine_block();
  }
  const ConservationReport r = f.ledger.audit();
  CHECK(r.double_spend_free);
  CHECK(r.unspent + r.fees == r.minted);
}

}
