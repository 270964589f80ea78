#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "blindmix/bank.hpp"
#include "blindmix/ledger.hpp"

namespace blindmix {

using nlohmann::json;

// Requests are {"method": ..., "params": {...}}; replies are {"result": {...}} or
// {"error": {"code": ..., "message": ...}}. Binary fields travel as hex.

class Transport {
 public:
  virtual ~Transport() = default;
  virtual json call(const json& request) = 0;
};

/// Server-side dispatch of one request onto a bank and its ledger.
class BankRequestHandler {
 public:
  BankRequestHandler(Bank& bank, Ledger& ledger) : bank_(bank), ledger_(ledger) {}
  json handle(const json& request);

 private:
  json dispatch_method(const std::string& method, const json& params);

  Bank& bank_;
  Ledger& ledger_;
};

class LocalTransport final : public Transport {
 public:
  explicit LocalTransport(BankRequestHandler& handler) : handler_(handler) {}
  json call(const json& request) override;

 private:
  BankRequestHandler& handler_;
};

/// Logs every request and reply passing through another transport.
class RecordingTransport final : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}
  json call(const json& request) override;
  std::vector<json> requests() const;
  std::vector<json> replies() const;

 private:
  Transport& inner_;
  mutable std::mutex mu_;
  std::vector<json> requests_;
  std::vector<json> replies_;
};

/// "unix:/path" or a path containing '/' selects a unix socket, "host:port" TCP.
struct Endpoint {
  bool unix_socket = true;
  std::string path;
  std::string host;
  std::uint16_t port = 0;

  static Endpoint parse(const std::string& text);
};

class SocketTransport final : public Transport {
 public:
  explicit SocketTransport(Endpoint endpoint);
  ~SocketTransport() override;
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  json call(const json& request) override;

 private:
  void connect_locked();

  Endpoint endpoint_;
  std::mutex mu_;
  int fd_ = -1;
  std::string buffer_;
};

/// Newline-delimited JSON server, one thread per connection.
class BankServer {
 public:
  BankServer(BankRequestHandler& handler, Endpoint endpoint);
  ~BankServer();
  BankServer(const BankServer&) = delete;
  BankServer& operator=(const BankServer&) = delete;

  void start();
  /// Blocks until stop() is called from another thread or a signal handler path.
  void wait();
  void stop();
  std::uint16_t bound_port() const { return bound_port_; }

 private:
  void accept_loop();
  void serve(int fd);

  BankRequestHandler& handler_;
  Endpoint endpoint_;
  int listen_fd_ = -1;
  std::uint16_t bound_port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex clients_mu_;
  std::vector<std::thread> clients_;
  std::vector<int> client_fds_;
};

/// Remote failures surface as BankError (bank codes) or LedgerError (ledger codes).
class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Typed client stub over any transport.
class BankConnection {
 public:
  BankConnection(const Curve& curve, Transport& transport) : curve_(curve), transport_(transport) {}

  const Curve& curve() const { return curve_; }

  BankPublicParams get_params();
  DepositOffer get_deposit_address();
  Scalar blind_sign(const DepositVoucher& voucher, const CurvePoint& user_pubkey);
  VoucherStatus verify(const WithdrawalVoucher& voucher);
  Digest withdraw(const WithdrawalVoucher& voucher);
  Digest dispatch(std::size_t count);

  Digest submit_tx(const Transaction& tx);
  std::uint64_t confirmations(const Digest& tx_id);
  std::vector<Utxo> utxos(const Address& address);
  std::optional<Transaction> get_tx(const Digest& tx_id);
  std::uint64_t next_height();
  std::uint64_t mine(std::uint32_t blocks);
  Digest faucet(const Address& to, Amount amount);

 private:
  json call(const std::string& method, json params);

  const Curve& curve_;
  Transport& transport_;
};

// Hex helpers shared by the handler and the stub.
std::string point_hex(const Curve& curve, const CurvePoint& p);
CurvePoint point_from_hex(const Curve& curve, const std::string& hex);
std::string scalar_hex(const Curve& curve, const Scalar& s);
Scalar scalar_from_hex(const Curve& curve, const std::string& hex);

}  // namespace blindmix
