// blindmix-bank: runs the mixing bank against a journaled simulated ledger.
#include <pthread.h>

#include <csignal>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "blindmix/bank.hpp"
#include "blindmix/kv_file.hpp"
#include "blindmix/ledger.hpp"
#include "blindmix/wire.hpp"
#include "common.hpp"

using namespace blindmix;
namespace fs = std::filesystem;

namespace {

BankConfig build_config(const std::string& config_path, const std::vector<Amount>& denominations,
                        const std::string& fee, std::uint32_t confirmations, std::uint32_t delay,
                        std::uint32_t pool) {
  if (!config_path.empty()) return BankConfig::from_kv(KvFile::load(config_path));
  BankConfig c;
  c.denominations = denominations;
  c.fee_rate = parse_rational(fee);
  c.required_confirmations = confirmations;
  c.withdrawal_delay_blocks = delay;
  c.withdrawal_pool_target = pool;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixing bank server"};
  app.require_subcommand(1);

  std::string curve_name = "secp256k1";
  std::string journal = "ledger.journal";
  std::string state = "bank.json";
  std::string config_path;
  std::vector<Amount> denominations{100000};
  std::string fee = "1/10";
  std::uint32_t confirmations = 1;
  std::uint32_t delay = 1;
  std::uint32_t pool = 10;
  std::optional<std::uint64_t> seed;
  app.add_option("--curve", curve_name, "secp256k1 or toy")->capture_default_str();
  app.add_option("--ledger", journal, "Ledger journal file")->capture_default_str();
  app.add_option("--state", state, "Bank snapshot file")->capture_default_str();
  app.add_option("--config", config_path, "key = value config file; overrides the flags below");
  app.add_option("--denomination", denominations, "Allowed denomination (repeatable)")->capture_default_str();
  app.add_option("--fee", fee, "Fee rate as a fraction or decimal")->capture_default_str();
  app.add_option("--confirmations", confirmations)->capture_default_str();
  app.add_option("--delay", delay, "Withdrawal delay in blocks")->capture_default_str();
  app.add_option("--pool", pool, "Withdrawal addresses funded at init")->capture_default_str();
  app.add_option("--seed", seed, "Deterministic entropy for a single scripted invocation; reusing a seed across runs repeats keys");

  std::string listen = "unix:bank.sock";
  auto* serve = app.add_subcommand("serve", "Serve newline-delimited JSON requests");
  serve->add_option("--listen", listen, "unix:PATH or HOST:PORT")->capture_default_str();

  auto* init = app.add_subcommand("init", "Create the bank state and fund the withdrawal pool, then exit");
  auto* show = app.add_subcommand("show", "Print public parameters and holdings");
  auto* print_config = app.add_subcommand("print-config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    const Curve& curve = tools::curve_by_name(curve_name);
    const BankConfig config = build_config(config_path, denominations, fee, confirmations, delay, pool);
    if (*print_config) {
      std::cout << config.to_kv();
      return 0;
    }
    auto entropy = tools::make_entropy(seed);
    Ledger ledger(curve, journal);
    std::unique_ptr<Bank> bank;
    if (fs::exists(state)) {
      bank = Bank::load(curve, ledger, config, *entropy, state);
    } else {
      bank = Bank::create(curve, ledger, config, *entropy, state);
      ledger.mine_block();
    }

    if (*init || *show) {
      const BankPublicParams p = bank->public_params();
      std::cout << "curve " << curve.name() << "\n"
                << "bank_key " << to_hex(curve.serialize(p.bank_key)) << "\n"
                << "fee_rate " << format_rational(p.fee_rate) << "\n"
                << "holdings " << bank->holdings() << "\n"
                << "withdrawal_addresses " << bank->withdrawal_addresses().size() << "\n"
                << "funded_deposits " << bank->funded_deposit_count() << "\n"
                << "next_height " << ledger.next_height() << "\n";
      return 0;
    }

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    BankRequestHandler handler(*bank, ledger);
    BankServer server(handler, Endpoint::parse(listen));
    server.start();
    std::cout << "listening on " << listen;
    if (server.bound_port() != 0) std::cout << " (port " << server.bound_port() << ")";
    std::cout << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    bank->save();
    std::cout << "stopped" << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
