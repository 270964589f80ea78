// blindmix-analyze: anonymity-set tracing, attacker views and the bank-side audit.
#include <iostream>

#include "CLI11.hpp"
#include "blindmix/analysis.hpp"
#include "blindmix/experiment.hpp"
#include "common.hpp"
#include "json.hpp"

using namespace blindmix;
using nlohmann::json;

namespace {

std::string rational_text(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

json trace_json(const TraceReport& t) {
  json outs = json::array();
  for (const Address& a : t.candidate_outputs) outs.push_back(a.hex());
  const auto m = static_cast<std::int64_t>(t.candidate_count);
  return {{"input", t.target_input.hex()},
          {"candidate_count", t.candidate_count},
          {"candidate_outputs", outs},
          {"link_probability", m == 0 ? json(nullptr) : json(rational_text(anonymity_probability(1, m)))}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anonymity analysis"};
  app.require_subcommand(1);

  std::string curve_name = "secp256k1";
  app.add_option("--curve", curve_name, "secp256k1 or toy")->capture_default_str();

  ExperimentConfig cfg;
  std::uint64_t omega = 11;
  std::size_t attackers = 0;
  std::string fee = "1/10";
  auto* replay = app.add_subcommand("replay", "Run a simulated mixing round and analyse it");
  replay->add_option("--users", cfg.users)->capture_default_str();
  replay->add_option("--denomination", cfg.denomination)->capture_default_str();
  replay->add_option("--funding", cfg.input_funding, "Coins minted per user input")->capture_default_str();
  replay->add_option("--fee", fee)->capture_default_str();
  replay->add_option("--delay", cfg.withdrawal_delay_blocks)->capture_default_str();
  replay->add_option("--unique", cfg.unique_denomination, "Add one user on this otherwise unused denomination");
  replay->add_option("--seed", cfg.seed)->capture_default_str();
  replay->add_option("--omega", omega, "Block window after each deposit")->capture_default_str();
  replay->add_option("--attackers", attackers, "Number of colluding users (the first k wallets)");

  std::int64_t n = 1;
  std::int64_t m = 1;
  auto* prob = app.add_subcommand("probability", "Exact N/M link probability");
  prob->add_option("N", n)->required();
  prob->add_option("M", m)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prob) {
      std::cout << rational_text(anonymity_probability(n, m)) << "\n";
      return 0;
    }
    const Curve& curve = tools::curve_by_name(curve_name);
    cfg.fee_rate = parse_rational(fee);
    MixingSimulation sim(curve, cfg);
    const ExperimentResult r = sim.run();

    json traces = json::array();
    for (std::size_t i = 0; i < r.inputs.size(); ++i) {
      traces.push_back(trace_json(passive_trace(sim.ledger(), r.inputs[i], omega, r.denominations[i], cfg.fee_rate)));
    }

    std::vector<WithdrawalVoucher> vouchers;
    for (const RedeemedRecord& rr : sim.bank().redeemed()) vouchers.push_back(rr.voucher);
    const AuditResult audit = unlinkability_audit(curve, sim.bank().signed_records(), vouchers, sim.bank().public_key());

    std::vector<const Wallet*> colluders;
    for (std::size_t i = 0; i < attackers && i < sim.wallets().size(); ++i) colluders.push_back(&sim.wallets()[i]);
    const ActiveInfoSet info = active_info_set(curve, sim.ledger(), colluders, sim.bank().public_key());
    json links = json::object();
    for (LinkKind k : {LinkKind::input_to_deposit, LinkKind::deposit_to_withdrawal, LinkKind::withdrawal_to_output}) {
      links[to_string(k)] = {{"attributed", info.count(k, true)}, {"unattributed", info.count(k, false)}};
    }

    json out = {{"users", r.inputs.size()},
                {"bank_fees", r.bank_after - r.bank_before},
                {"output_balances", r.output_balances},
                {"dispatch_tx", r.dispatch_tx ? json(to_hex(*r.dispatch_tx)) : json(nullptr)},
                {"traces", traces},
                {"audit", {{"compared", audit.compared}, {"consistent", audit.consistent},
                           {"all_consistent", audit.all_consistent()}}},
                {"attackers", colluders.size()},
                {"attacker_links", links}};
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
