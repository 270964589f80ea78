#include "blindmix/experiment.hpp"

namespace blindmix {

MixingSimulation::MixingSimulation(const Curve& curve, ExperimentConfig config)
    : curve_(curve),
      config_(std::move(config)),
      ledger_(curve),
      bank_entropy_(config_.seed * 2 + 1),
      client_entropy_(config_.seed * 2 + 2) {
  BankConfig bc;
  bc.denominations = {config_.denomination};
  if (config_.unique_denomination != 0) bc.denominations.push_back(config_.unique_denomination);
  bc.fee_rate = config_.fee_rate;
  bc.withdrawal_delay_blocks = config_.withdrawal_delay_blocks;
  bc.required_confirmations = config_.required_confirmations;
  bank_ = Bank::create(curve_, ledger_, bc, bank_entropy_);
  ledger_.mine_block();
  handler_ = std::make_unique<BankRequestHandler>(*bank_, ledger_);
  transport_ = std::make_unique<LocalTransport>(*handler_);
  connection_ = std::make_unique<BankConnection>(curve_, *transport_);
}

ExperimentResult MixingSimulation::run() {
  ExperimentResult result;
  const std::size_t total_users = config_.users + (config_.unique_denomination != 0 ? 1 : 0);
  wallets_.assign(total_users, Wallet{});
  std::vector<Client> clients;
  clients.reserve(total_users);
  for (Wallet& w : wallets_) clients.emplace_back(curve_, w, *connection_, client_entropy_);

  for (std::size_t i = 0; i < total_users; ++i) {
    const bool unique = i == config_.users;
    const Amount v = unique ? config_.unique_denomination : config_.denomination;
    const Amount funding = unique ? v + v / 10 : config_.input_funding;
    const Address input = clients[i].new_input_key();
    connection_->faucet(input, funding);
    result.inputs.push_back(input);
    result.denominations.push_back(v);
  }
  ledger_.mine_block();
  result.bank_before = bank_->holdings();

  std::vector<PendingMix> pending;
  for (std::size_t i = 0; i < total_users; ++i) {
    pending.push_back(clients[i].start_mix(result.denominations[i]));
    result.deposit_txs.push_back(pending.back().tx_id);
  }
  result.deposit_height = ledger_.mine_block().height;
  for (std::uint32_t c = 1; c < config_.required_confirmations; ++c) ledger_.mine_block();

  for (std::size_t i = 0; i < total_users; ++i) {
    const WithdrawalVoucher voucher = clients[i].collect_signature(pending[i]);
    result.outputs.push_back(voucher.message.output);
  }
  while (ledger_.next_height() < result.deposit_height + config_.withdrawal_delay_blocks) ledger_.mine_block();

  for (std::size_t i = 0; i < total_users; ++i) result.withdrawal_txs.push_back(clients[i].redeem(0));
  ledger_.mine_block();

  if (config_.dispatch) {
    result.dispatch_tx = connection_->dispatch(bank_->funded_deposit_count());
    ledger_.mine_block();
  }

  for (const Address& o : result.outputs) result.output_balances.push_back(ledger_.balance(o));
  result.bank_after = bank_->holdings();
  return result;
}

}  // namespace blindmix
