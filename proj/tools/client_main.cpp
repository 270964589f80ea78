// blindmix-client: wallet operations against a running bank.
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "blindmix/client.hpp"
#include "blindmix/wire.hpp"
#include "common.hpp"

using namespace blindmix;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Mixing client wallet"};
  app.require_subcommand(1);

  std::string curve_name = "secp256k1";
  std::string wallet_path = "wallet.json";
  std::string connect = "unix:bank.sock";
  std::optional<std::uint64_t> seed;
  app.add_option("--curve", curve_name, "secp256k1 or toy")->capture_default_str();
  app.add_option("--wallet", wallet_path, "Wallet file (created if missing)")->capture_default_str();
  app.add_option("--connect", connect, "Bank endpoint: unix:PATH or HOST:PORT")->capture_default_str();
  app.add_option("--seed", seed, "Deterministic entropy for a single scripted invocation; reusing a seed across runs repeats keys");

  auto* params = app.add_subcommand("params", "Show the bank's public parameters");
  auto* new_input = app.add_subcommand("new-input", "Create an input key and print its address");

  Amount faucet_amount = 0;
  std::string faucet_address;
  auto* faucet = app.add_subcommand("faucet", "Mint coins to an address on the simulated ledger");
  faucet->add_option("address", faucet_address)->required();
  faucet->add_option("amount", faucet_amount)->required();

  std::uint32_t blocks = 1;
  auto* mine = app.add_subcommand("mine", "Mine blocks on the simulated ledger");
  mine->add_option("blocks", blocks)->capture_default_str();

  Amount denomination = 0;
  auto* mix = app.add_subcommand("mix", "Deposit one denomination and keep the blinding secrets");
  mix->add_option("--denomination", denomination)->required();

  auto* collect = app.add_subcommand("collect", "Request blind signatures for every confirmed pending deposit");

  std::size_t index = 0;
  auto* redeem = app.add_subcommand("redeem", "Redeem a stored voucher");
  redeem->add_option("index", index)->required();

  auto* export_cmd = app.add_subcommand("export", "Print a stored voucher as transferable text");
  export_cmd->add_option("index", index)->required();

  std::string voucher_text;
  auto* import_cmd = app.add_subcommand("import", "Check a voucher with the bank and store it");
  import_cmd->add_option("text", voucher_text)->required();

  auto* list = app.add_subcommand("list", "Show input keys, pending deposits and vouchers");

  CLI11_PARSE(app, argc, argv);

  try {
    const Curve& curve = tools::curve_by_name(curve_name);
    auto entropy = tools::make_entropy(seed);
    Wallet wallet = fs::exists(wallet_path) ? Wallet::load(curve, wallet_path) : Wallet{};
    SocketTransport transport(Endpoint::parse(connect));
    BankConnection bank(curve, transport);
    Client client(curve, wallet, bank, *entropy);
    auto save = [&] { wallet.save(curve, wallet_path); };

    if (*params) {
      const BankPublicParams& p = client.params();
      std::cout << "bank_key " << point_hex(curve, p.bank_key) << "\n"
                << "fee_rate " << format_rational(p.fee_rate) << "\n"
                << "required_confirmations " << p.required_confirmations << "\n"
                << "withdrawal_delay_blocks " << p.withdrawal_delay_blocks << "\n"
                << "denominations";
      for (Amount d : p.denominations) std::cout << " " << d;
      std::cout << "\n";
    } else if (*new_input) {
      const Address a = client.new_input_key();
      save();
      std::cout << a.hex() << "\n";
    } else if (*faucet) {
      std::cout << to_hex(bank.faucet(Address::from_hex(faucet_address), faucet_amount)) << "\n";
    } else if (*mine) {
      std::cout << "next_height " << bank.mine(blocks) << "\n";
    } else if (*mix) {
      const PendingMix p = client.start_mix(denomination);
      save();
      std::cout << "deposit_tx " << to_hex(p.tx_id) << "\n";
    } else if (*collect) {
      const std::vector<PendingMix> pending = wallet.pending;
      int failures = 0;
      for (const PendingMix& p : pending) {
        try {
          const WithdrawalVoucher v = client.collect_signature(p);
          std::cout << "voucher " << wallet.vouchers.size() - 1 << " output " << v.message.output.hex() << "\n";
        } catch (const std::exception& e) {
          ++failures;
          std::cout << "pending " << to_hex(p.tx_id) << ": " << e.what() << "\n";
        }
        save();
      }
      if (failures != 0) return 2;
    } else if (*redeem) {
      const Digest wt = client.redeem(index);
      save();
      std::cout << "withdrawal_tx " << to_hex(wt) << "\n";
    } else if (*export_cmd) {
      if (index >= wallet.vouchers.size()) throw std::out_of_range("no voucher at that index");
      std::cout << client.export_voucher(wallet.vouchers[index].voucher) << "\n";
    } else if (*import_cmd) {
      const WithdrawalVoucher v = client.import_voucher(voucher_text);
      save();
      std::cout << "imported voucher for " << v.message.denomination << "\n";
    } else if (*list) {
      for (std::size_t i = 0; i < wallet.input_keys.size(); ++i) {
        const Address a = address_of(curve, wallet.input_keys[i].key.public_key);
        Amount balance = 0;
        for (const Utxo& u : bank.utxos(a)) balance += u.amount;
        std::cout << "input " << i << " " << a.hex() << " balance " << balance
                  << (wallet.input_keys[i].used ? " used" : "") << "\n";
      }
      for (const PendingMix& p : wallet.pending) {
        std::cout << "pending " << to_hex(p.tx_id) << " denomination " << p.message.denomination << "\n";
      }
      for (std::size_t i = 0; i < wallet.vouchers.size(); ++i) {
        const StoredVoucher& v = wallet.vouchers[i];
        std::cout << "voucher " << i << " denomination " << v.voucher.message.denomination << " output "
                  << v.voucher.message.output.hex();
        if (v.withdrawal_tx) std::cout << " redeemed " << to_hex(*v.withdrawal_tx);
        std::cout << "\n";
      }
    }
  } catch (const BankError& e) {
    std::cerr << "bank error " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const ClientError& e) {
    std::cerr << "client error " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
