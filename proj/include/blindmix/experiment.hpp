#pragma once

#include <memory>
#include <vector>

#include "blindmix/bank.hpp"
#include "blindmix/client.hpp"
#include "blindmix/ledger.hpp"
#include "blindmix/wire.hpp"

namespace blindmix {

/// Replay of a small mixing round on a private ledger: every user funds one input
/// address, deposits, collects a blind signature and withdraws; the bank then
/// dispatches the deposits to fresh withdrawal addresses in one CoinJoin.
struct ExperimentConfig {
  std::size_t users = 10;
  Amount denomination = 100000;
  Amount input_funding = 110000;
  Rational fee_rate{1, 10};
  std::uint32_t withdrawal_delay_blocks = 1;
  std::uint32_t required_confirmations = 1;
  /// Non-zero adds one more user mixing this (otherwise unused) denomination.
  Amount unique_denomination = 0;
  bool dispatch = true;
  std::uint64_t seed = 1;
};

struct ExperimentResult {
  std::vector<Address> inputs;
  std::vector<Address> outputs;
  std::vector<Amount> denominations;
  std::vector<Digest> deposit_txs;
  std::vector<Digest> withdrawal_txs;
  std::optional<Digest> dispatch_tx;
  std::vector<Amount> output_balances;
  Amount bank_before = 0;
  Amount bank_after = 0;
  std::uint64_t deposit_height = 0;
};

class MixingSimulation {
 public:
  MixingSimulation(const Curve& curve, ExperimentConfig config);

  ExperimentResult run();

  const Curve& curve() const { return curve_; }
  const ExperimentConfig& config() const { return config_; }
  Ledger& ledger() { return ledger_; }
  Bank& bank() { return *bank_; }
  BankConnection& connection() { return *connection_; }
  std::vector<Wallet>& wallets() { return wallets_; }

 private:
  const Curve& curve_;
  ExperimentConfig config_;
  Ledger ledger_;
  SeededEntropy bank_entropy_;
  SeededEntropy client_entropy_;
  std::unique_ptr<Bank> bank_;
  std::unique_ptr<BankRequestHandler> handler_;
  std::unique_ptr<LocalTransport> transport_;
  std::unique_ptr<BankConnection> connection_;
  std::vector<Wallet> wallets_;
};

}  // namespace blindmix
