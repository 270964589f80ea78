#include "blindmix/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace blindmix {

std::string point_hex(const Curve& curve, const CurvePoint& p) { return to_hex(curve.serialize(p)); }

CurvePoint point_from_hex(const Curve& curve, const std::string& hex) { return curve.deserialize(from_hex(hex)); }

std::string scalar_hex(const Curve& curve, const Scalar& s) { return to_hex(curve.scalar_to_bytes(s)); }

Scalar scalar_from_hex(const Curve& curve, const std::string& hex) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != curve.scalar_bytes()) throw DecodeError("bad scalar length");
  const mpz_class v = mpz_from_bytes(raw);
  if (v >= curve.order()) throw DecodeError("scalar out of range");
  return {v};
}

namespace {

json voucher_json(const Curve& curve, const WithdrawalVoucher& v) {
  return {{"m", to_hex(encode_message(curve, v.message))},
          {"c", scalar_hex(curve, v.signature.c)},
          {"s", scalar_hex(curve, v.signature.s)}};
}

WithdrawalVoucher voucher_from_json(const Curve& curve, const json& j) {
  WithdrawalVoucher v;
  v.message = decode_message(curve, from_hex(j.at("m").get<std::string>()));
  v.signature.c = scalar_from_hex(curve, j.at("c").get<std::string>());
  v.signature.s = scalar_from_hex(curve, j.at("s").get<std::string>());
  return v;
}

json error_reply(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

// ---- server side -----------------------------------------------------------

json BankRequestHandler::handle(const json& request) {
  try {
    if (!request.is_object() || !request.contains("method")) return error_reply("malformed", "missing method");
    const json params = request.value("params", json::object());
    return {{"result", dispatch_method(request.at("method").get<std::string>(), params)}};
  } catch (const BankError& e) {
    json reply = error_reply(to_string(e.code()), e.what());
    if (e.refund_tx()) reply["error"]["refund_tx"] = to_hex(*e.refund_tx());
    return reply;
  } catch (const LedgerError& e) {
    return error_reply(std::string("ledger.") + to_string(e.code()), e.what());
  } catch (const SessionError& e) {
    return error_reply("session", e.what());
  } catch (const DecodeError& e) {
    return error_reply("malformed", e.what());
  } catch (const json::exception& e) {
    return error_reply("malformed", e.what());
  } catch (const std::exception& e) {
    return error_reply("internal", e.what());
  }
}

json BankRequestHandler::dispatch_method(const std::string& method, const json& p) {
  const Curve& curve = bank_.curve();
  if (method == "get_params") {
    const BankPublicParams params = bank_.public_params();
    return {{"P", point_hex(curve, params.bank_key)},
            {"curve", curve.name()},
            {"denominations", params.denominations},
            {"fee_rate", format_rational(params.fee_rate)},
            {"required_confirmations", params.required_confirmations},
            {"withdrawal_delay_blocks", params.withdrawal_delay_blocks}};
  }
  if (method == "get_deposit_address") {
    const DepositOffer offer = bank_.issue_deposit_address();
    return {{"R", point_hex(curve, offer.r)},
            {"sig", to_hex(encode_plain_signature(curve, offer.signature))},
            {"address", offer.address.hex()}};
  }
  if (method == "blind_sign") {
    DepositVoucher v;
    v.c_prime = scalar_from_hex(curve, p.at("c_prime").get<std::string>());
    v.denomination = p.at("denomination").get<Amount>();
    v.tx_id = array_from_hex<32>(p.at("tx_id").get<std::string>());
    const auto sig = decode_plain_signature(curve, from_hex(p.at("user_sig").get<std::string>()));
    if (!sig) throw BankError(BankErrc::bad_signature, "malformed user signature");
    v.user_signature = *sig;
    // The bank trusts only the key recovered from the DT; a mismatching claim is refused early.
    const CurvePoint claimed = point_from_hex(curve, p.at("user_pubkey").get<std::string>());
    if (const auto dt = ledger_.transaction(v.tx_id); dt && !dt->inputs.empty() && !(dt->inputs.front().pubkey == claimed)) {
      throw BankError(BankErrc::bad_signature, "user key does not match the deposit transaction input");
    }
    return {{"s_prime", scalar_hex(curve, bank_.process_deposit(v))}};
  }
  if (method == "verify") {
    return {{"status", to_string(bank_.verify_voucher(voucher_from_json(curve, p)))}};
  }
  if (method == "withdraw") {
    return {{"tx_id", to_hex(bank_.withdraw(voucher_from_json(curve, p)))}};
  }
  if (method == "dispatch") {
    return {{"tx_id", to_hex(bank_.dispatch(p.at("count").get<std::size_t>()))}};
  }
  if (method == "submit_tx") {
    const Transaction tx = deserialize_transaction(curve, from_hex(p.at("tx").get<std::string>()));
    return {{"tx_id", to_hex(ledger_.submit(tx))}};
  }
  if (method == "confirmations") {
    return {{"confirmations", ledger_.confirmations(array_from_hex<32>(p.at("tx_id").get<std::string>()))}};
  }
  if (method == "utxos") {
    json out = json::array();
    for (const Utxo& u : ledger_.unspent_outputs(Address::from_hex(p.at("address").get<std::string>()))) {
      out.push_back({{"tx_id", to_hex(u.outpoint.tx)}, {"index", u.outpoint.index}, {"amount", u.amount}});
    }
    return {{"utxos", out}};
  }
  if (method == "get_tx") {
    const Digest id = array_from_hex<32>(p.at("tx_id").get<std::string>());
    const auto tx = ledger_.transaction(id);
    if (!tx) return {{"found", false}};
    return {{"found", true}, {"tx", to_hex(serialize_transaction(curve, *tx))}};
  }
  if (method == "ledger_height") return {{"next_height", ledger_.next_height()}};
  if (method == "mine") {
    const auto blocks = p.value("blocks", 1u);
    for (unsigned i = 0; i < blocks; ++i) ledger_.mine_block();
    return {{"next_height", ledger_.next_height()}};
  }
  if (method == "faucet") {
    return {{"tx_id", to_hex(ledger_.coinbase(Address::from_hex(p.at("address").get<std::string>()),
                                              p.at("amount").get<Amount>()))}};
  }
  throw DecodeError("unknown method '" + method + "'");
}

json LocalTransport::call(const json& request) {
  // Round-trip through text so in-process calls exercise the same encoding as sockets.
  return json::parse(handler_.handle(json::parse(request.dump())).dump());
}

json RecordingTransport::call(const json& request) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  json reply = inner_.call(request);
  std::lock_guard lock(mu_);
  replies_.push_back(reply);
  return reply;
}

std::vector<json> RecordingTransport::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<json> RecordingTransport::replies() const {
  std::lock_guard lock(mu_);
  return replies_;
}

// ---- sockets ---------------------------------------------------------------

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint e;
  if (text.rfind("unix:", 0) == 0) {
    e.path = text.substr(5);
    return e;
  }
  const auto colon = text.rfind(':');
  if (text.find('/') != std::string::npos || colon == std::string::npos) {
    e.path = text;
    return e;
  }
  e.unix_socket = false;
  e.host = text.substr(0, colon);
  const int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535) throw std::invalid_argument("bad port in endpoint " + text);
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw WireError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

// Reads one line into `line`; false on orderly EOF with nothing buffered.
bool read_line(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    if (const auto nl = buffer.find('\n'); nl != std::string::npos) {
      line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv");
    }
    if (n == 0) {
      if (buffer.empty()) return false;
      throw WireError("connection closed mid-message");
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

int connect_to(const Endpoint& e) {
  if (e.unix_socket) {
    const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) throw_errno("socket");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (e.path.size() >= sizeof addr.sun_path) throw WireError("socket path too long");
    std::strcpy(addr.sun_path, e.path.c_str());
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd);
      throw_errno("connect " + e.path);
    }
    return fd;
  }
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(e.host.c_str(), std::to_string(e.port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw WireError("cannot resolve " + e.host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw WireError("cannot connect to " + e.host + ":" + std::to_string(e.port));
  return fd;
}

}  // namespace

SocketTransport::SocketTransport(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

SocketTransport::~SocketTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void SocketTransport::connect_locked() {
  if (fd_ < 0) {
    fd_ = connect_to(endpoint_);
    buffer_.clear();
  }
}

json SocketTransport::call(const json& request) {
  std::lock_guard lock(mu_);
  connect_locked();
  try {
    write_all(fd_, request.dump() + "\n");
    std::string line;
    if (!read_line(fd_, buffer_, line)) throw WireError("server closed the connection");
    return json::parse(line);
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

BankServer::BankServer(BankRequestHandler& handler, Endpoint endpoint)
    : handler_(handler), endpoint_(std::move(endpoint)) {}

BankServer::~BankServer() { stop(); }

void BankServer::start() {
  if (endpoint_.unix_socket) {
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw_errno("socket");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (endpoint_.path.size() >= sizeof addr.sun_path) throw WireError("socket path too long");
    std::strcpy(addr.sun_path, endpoint_.path.c_str());
    ::unlink(endpoint_.path.c_str());
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw_errno("bind " + endpoint_.path);
  } else {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw_errno("socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint_.port);
    if (::inet_pton(AF_INET, endpoint_.host.c_str(), &addr.sin_addr) != 1) {
      throw WireError("listen host must be an IPv4 literal: " + endpoint_.host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw_errno("bind");
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    bound_port_ = ntohs(addr.sin_port);
  }
  if (::listen(listen_fd_, 64) != 0) throw_errno("listen");
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void BankServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(clients_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    clients_.emplace_back([this, fd] { serve(fd); });
  }
}

void BankServer::serve(int fd) {
  std::string buffer;
  std::string line;
  try {
    while (read_line(fd, buffer, line)) {
      json reply;
      try {
        reply = handler_.handle(json::parse(line));
      } catch (const json::exception& e) {
        reply = error_reply("malformed", e.what());
      }
      write_all(fd, reply.dump() + "\n");
    }
  } catch (const WireError&) {
    // peer went away
  }
}

void BankServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void BankServer::stop() {
  const bool was_running = running_.exchange(false);
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (acceptor_.joinable() && acceptor_.get_id() != std::this_thread::get_id()) acceptor_.join();
  std::vector<std::thread> clients;
  {
    std::lock_guard lock(clients_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    clients.swap(clients_);
  }
  for (std::thread& t : clients) t.join();
  {
    std::lock_guard lock(clients_mu_);
    for (int fd : client_fds_) ::close(fd);
    client_fds_.clear();
  }
  if (was_running && endpoint_.unix_socket) ::unlink(endpoint_.path.c_str());
}

// ---- client stub -----------------------------------------------------------

json BankConnection::call(const std::string& method, json params) {
  const json reply = transport_.call({{"method", method}, {"params", std::move(params)}});
  if (reply.contains("error")) {
    const json& err = reply.at("error");
    const std::string code = err.value("code", "internal");
    const std::string message = err.value("message", "");
    if (const auto bank_code = bank_errc_from_string(code)) {
      std::optional<Digest> refund;
      if (err.contains("refund_tx")) refund = array_from_hex<32>(err.at("refund_tx").get<std::string>());
      throw BankError(*bank_code, message, refund);
    }
    throw WireError(code + ": " + message);
  }
  if (!reply.contains("result")) throw WireError("reply without result");
  return reply.at("result");
}

BankPublicParams BankConnection::get_params() {
  const json r = call("get_params", json::object());
  if (r.at("curve").get<std::string>() != curve_.name()) throw WireError("bank runs on a different curve");
  BankPublicParams p;
  p.bank_key = point_from_hex(curve_, r.at("P").get<std::string>());
  p.denominations = r.at("denominations").get<std::vector<Amount>>();
  p.fee_rate = parse_rational(r.at("fee_rate").get<std::string>());
  p.required_confirmations = r.at("required_confirmations").get<std::uint32_t>();
  p.withdrawal_delay_blocks = r.at("withdrawal_delay_blocks").get<std::uint32_t>();
  return p;
}

DepositOffer BankConnection::get_deposit_address() {
  const json r = call("get_deposit_address", json::object());
  DepositOffer offer;
  offer.r = point_from_hex(curve_, r.at("R").get<std::string>());
  const auto sig = decode_plain_signature(curve_, from_hex(r.at("sig").get<std::string>()));
  if (!sig) throw WireError("malformed deposit address signature");
  offer.signature = *sig;
  offer.address = Address::from_hex(r.at("address").get<std::string>());
  return offer;
}

Scalar BankConnection::blind_sign(const DepositVoucher& v, const CurvePoint& user_pubkey) {
  const json r = call("blind_sign", {{"c_prime", scalar_hex(curve_, v.c_prime)},
                                     {"denomination", v.denomination},
                                     {"tx_id", to_hex(v.tx_id)},
                                     {"user_sig", to_hex(encode_plain_signature(curve_, v.user_signature))},
                                     {"user_pubkey", point_hex(curve_, user_pubkey)}});
  return scalar_from_hex(curve_, r.at("s_prime").get<std::string>());
}

VoucherStatus BankConnection::verify(const WithdrawalVoucher& voucher) {
  const json r = call("verify", voucher_json(curve_, voucher));
  const auto status = voucher_status_from_string(r.at("status").get<std::string>());
  if (!status) throw WireError("unknown voucher status");
  return *status;
}

Digest BankConnection::withdraw(const WithdrawalVoucher& voucher) {
  return array_from_hex<32>(call("withdraw", voucher_json(curve_, voucher)).at("tx_id").get<std::string>());
}

Digest BankConnection::dispatch(std::size_t count) {
  return array_from_hex<32>(call("dispatch", json::object({{"count", count}})).at("tx_id").get<std::string>());
}

Digest BankConnection::submit_tx(const Transaction& tx) {
  return array_from_hex<32>(
      call("submit_tx", json::object({{"tx", to_hex(serialize_transaction(curve_, tx))}})).at("tx_id").get<std::string>());
}

std::uint64_t BankConnection::confirmations(const Digest& tx_id) {
  return call("confirmations", json::object({{"tx_id", to_hex(tx_id)}})).at("confirmations").get<std::uint64_t>();
}

std::vector<Utxo> BankConnection::utxos(const Address& address) {
  std::vector<Utxo> out;
  const json r = call("utxos", json::object({{"address", address.hex()}}));
  for (const json& u : r.at("utxos")) {
    out.push_back({{array_from_hex<32>(u.at("tx_id").get<std::string>()), u.at("index").get<std::uint32_t>()},
                   address,
                   u.at("amount").get<Amount>()});
  }
  return out;
}

std::optional<Transaction> BankConnection::get_tx(const Digest& tx_id) {
  const json r = call("get_tx", json::object({{"tx_id", to_hex(tx_id)}}));
  if (!r.at("found").get<bool>()) return std::nullopt;
  return deserialize_transaction(curve_, from_hex(r.at("tx").get<std::string>()));
}

std::uint64_t BankConnection::next_height() {
  return call("ledger_height", json::object()).at("next_height").get<std::uint64_t>();
}

std::uint64_t BankConnection::mine(std::uint32_t blocks) {
  return call("mine", json::object({{"blocks", blocks}})).at("next_height").get<std::uint64_t>();
}

Digest BankConnection::faucet(const Address& to, Amount amount) {
  return array_from_hex<32>(call("faucet", {{"address", to.hex()}, {"amount", amount}}).at("tx_id").get<std::string>());
}

}  // namespace blindmix
