#include "doctest.h"

#include "blindmix/analysis.hpp"
#include "blindmix/experiment.hpp"
#include "env.hpp"

using namespace blindmix;
using namespace blindmix::testing;

namespace {

struct Replay {
  MixingSimulation sim{Curve::secp256k1(), ExperimentConfig{}};
  ExperimentResult result = sim.run();
};

// One shared replay; each case only reads it.
Replay& shared() {
  static Replay r;
  return r;
}

MixingSimulation& replay() { return shared().sim; }
const ExperimentResult& replay_result() { return shared().result; }

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("anonymity probability is exact") {
  CHECK(anonymity_probability(1, 10) == Rational(1, 10));
  CHECK(anonymity_probability(7, 7) == Rational(1));
  CHECK(anonymity_probability(2, 10) == Rational(1, 5));
  CHECK_THROWS_AS(anonymity_probability(1, 0), std::domain_error);
  CHECK_THROWS_AS(anonymity_probability(3, 2), std::domain_error);
  CHECK_THROWS_AS(anonymity_probability(0, 2), std::domain_error);
}

TEST_CASE("payout band floor") {
  CHECK(band_floor(100000, Rational(1, 10)) == 90000);
  CHECK(band_floor(100001, Rational(1, 10)) == 90001);
  CHECK(band_floor(100000, Rational(0)) == 100000);
}

TEST_CASE("passive trace on the ten user replay") {
  MixingSimulation& sim = replay();
  const ExperimentResult& r = replay_result();
  const std::set<Address> all_outputs(r.outputs.begin(), r.outputs.end());
  for (const Address& input : r.inputs) {
    const TraceReport t = passive_trace(sim.ledger(), input, 11, 100000, Rational(1, 10));
    CHECK(t.candidate_count == 10);
    CHECK(t.candidate_outputs == all_outputs);
    CHECK(t.reachable.size() >= 2);  // its DT and the CoinJoin PT
  }
  const TraceReport none = passive_trace(sim.ledger(), r.inputs[0], 0, 100000, Rational(1, 10));
  CHECK(none.candidate_count == 0);
  CHECK(none.candidate_outputs.empty());
  CHECK_THROWS_AS(passive_trace(sim.ledger(), Address{}, 11, 100000, Rational(1, 10)), AnalysisError);
}

TEST_CASE("a unique denomination is traceable") {
  ExperimentConfig cfg;
  cfg.users = 3;
  cfg.unique_denomination = 200000;
  cfg.seed = 3;
  MixingSimulation sim(Curve::secp256k1(), cfg);
  const ExperimentResult r = sim.run();
  const TraceReport lone = passive_trace(sim.ledger(), r.inputs.back(), 11, 200000, Rational(1, 10));
  CHECK(lone.candidate_count == 1);
  CHECK(lone.candidate_outputs == std::set<Address>{r.outputs.back()});
  CHECK(anonymity_probability(static_cast<std::int64_t>(lone.candidate_count),
                              static_cast<std::int64_t>(lone.candidate_count)) == Rational(1));
  const TraceReport crowd = passive_trace(sim.ledger(), r.inputs.front(), 11, 100000, Rational(1, 10));
  CHECK(crowd.candidate_count == 3);
}

TEST_CASE("unrelated in-band traffic widens the candidate set") {
  ExperimentConfig cfg;
  cfg.users = 2;
  cfg.seed = 4;
  MixingSimulation sim(Curve::secp256k1(), cfg);
  const ExperimentResult r0 = [&] {
    return sim.run();
  }();
  // A decoy mined in the window after the deposits.
  SeededEntropy rng(8);
  const KeyPair a = keygen(sim.curve(), rng);
  const Digest cb = sim.ledger().coinbase(address_of(sim.curve(), a.public_key), 95000);
  sim.ledger().mine_block();
  sim.ledger().submit(build_signed_transaction(
      sim.curve(), {{{cb, 0}, a}}, {{address_of(sim.curve(), keygen(sim.curve(), rng).public_key), 95000}}, 0));
  sim.ledger().mine_block();
  const TraceReport t = passive_trace(sim.ledger(), r0.inputs[0], 11, 100000, Rational(1, 10));
  CHECK(t.candidate_count == 3);
}

TEST_CASE("active attacker controlling half the users") {
  MixingSimulation& sim = replay();
  std::vector<const Wallet*> attackers;
  for (std::size_t i = 0; i < 5; ++i) attackers.push_back(&sim.wallets()[i]);
  const ActiveInfoSet info = active_info_set(sim.curve(), sim.ledger(), attackers, sim.bank().public_key());
  CHECK(info.count(LinkKind::input_to_deposit, true) == 5);
  CHECK(info.count(LinkKind::withdrawal_to_output, true) == 5);
  CHECK(info.count(LinkKind::deposit_to_withdrawal, true) == 0);
  CHECK(info.count(LinkKind::input_to_deposit, false) == 5);
  CHECK(info.count(LinkKind::withdrawal_to_output, false) == 5);
  // The CoinJoin shows every deposit feeding every new withdrawal address, with no owner.
  CHECK(info.count(LinkKind::deposit_to_withdrawal, false) == 100);
  CHECK(info.inputs.size() == 10);
  CHECK(info.outputs.size() == 10);
  for (const Link& l : info.links) {
    if (!l.owner) continue;
    CHECK(*l.owner < 5);
  }
}

TEST_CASE("no attackers reduces to passive knowledge; all attackers link everyone") {
  MixingSimulation& sim = replay();
  const ActiveInfoSet none = active_info_set(sim.curve(), sim.ledger(), {}, sim.bank().public_key());
  CHECK(none.links.empty());
  std::vector<const Wallet*> all;
  for (const Wallet& w : sim.wallets()) all.push_back(&w);
  const ActiveInfoSet every = active_info_set(sim.curve(), sim.ledger(), all, sim.bank().public_key());
  CHECK(every.count(LinkKind::input_to_deposit, true) == 10);
  CHECK(every.count(LinkKind::withdrawal_to_output, true) == 10);
  CHECK(every.count(LinkKind::deposit_to_withdrawal, true) == 0);
}

TEST_CASE("unlinkability audit over the replay records") {
  MixingSimulation& sim = replay();
  const std::vector<SignedRecord> records = sim.bank().signed_records();
  std::vector<WithdrawalVoucher> vouchers;
  for (const RedeemedRecord& r : sim.bank().redeemed()) vouchers.push_back(r.voucher);
  const AuditResult audit = unlinkability_audit(sim.curve(), records, vouchers, sim.bank().public_key());
  CHECK(audit.compared == 100);
  CHECK(audit.consistent == 100);
  CHECK(audit.all_consistent());
  CHECK(audit.flagged_records.empty());

  std::vector<SignedRecord> corrupted = records;
  corrupted[3].s_prime = sim.curve().add(corrupted[3].s_prime, sim.curve().scalar(1));
  const AuditResult bad = unlinkability_audit(sim.curve(), corrupted, vouchers, sim.bank().public_key());
  CHECK(bad.flagged_records == std::vector<std::size_t>{3});
  CHECK(bad.consistent == 90);
  for (std::size_t j = 0; j < vouchers.size(); ++j) CHECK(bad.consistency[3][j] == false);

  vouchers.pop_back();
  const AuditResult short_set = unlinkability_audit(sim.curve(), records, vouchers, sim.bank().public_key());
  CHECK(short_set.count_mismatches == std::vector<Amount>{100000});
  CHECK_FALSE(short_set.all_consistent());

  const AuditResult single = unlinkability_audit(sim.curve(), {records[0]}, {vouchers[0]}, sim.bank().public_key());
  CHECK(single.compared == 1);
  CHECK(single.all_consistent());
}

}
