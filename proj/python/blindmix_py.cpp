// Python bindings. Points and scalars cross the boundary as hex strings.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blindmix/analysis.hpp"
#include "blindmix/bench.hpp"
#include "blindmix/blind_sig.hpp"
#include "blindmix/experiment.hpp"
#include "blindmix/wire.hpp"

namespace py = pybind11;
using namespace blindmix;

namespace {

const Curve& curve_by_name(const std::string& name) {
  if (name == "secp256k1") return Curve::secp256k1();
  if (name == "toy") return Curve::toy();
  throw py::value_error("unknown curve " + name);
}

py::object fraction(const Rational& r) {
  return py::module_::import("fractions").attr("Fraction")(r.numerator(), r.denominator());
}

PartBlindMessage make_message(const Curve& curve, const std::string& output, Amount denomination,
                              const std::string& bank_key, const py::bytes& nonce) {
  PartBlindMessage m;
  m.output = Address::from_hex(output);
  m.denomination = denomination;
  m.bank_key = point_from_hex(curve, bank_key);
  const std::string n = nonce;
  if (n.size() != m.nonce.size()) throw py::value_error("nonce must be 16 bytes");
  std::copy(n.begin(), n.end(), m.nonce.begin());
  return m;
}

// Signer with its own session store; k never leaves the object.
class PySigner {
 public:
  PySigner(const std::string& curve, std::optional<std::uint64_t> seed)
      : curve_(curve_by_name(curve)),
        entropy_(seed ? std::unique_ptr<Entropy>(std::make_unique<SeededEntropy>(*seed))
                      : std::unique_ptr<Entropy>(std::make_unique<SystemEntropy>())),
        key_(keygen(curve_, *entropy_)),
        sessions_(curve_) {}

  std::string public_key() const { return point_hex(curve_, key_.public_key); }

  py::tuple open() {
    const OpenedSession s = sessions_.open(*entropy_, 0);
    return py::make_tuple(py::bytes(reinterpret_cast<const char*>(s.id.data()), s.id.size()), point_hex(curve_, s.r));
  }

  std::string sign(const py::bytes& session, const std::string& c_prime) {
    const std::string raw = session;
    SessionId id{};
    if (raw.size() != id.size()) throw py::value_error("session id must be 16 bytes");
    std::copy(raw.begin(), raw.end(), id.begin());
    return scalar_hex(curve_, sessions_.sign(id, scalar_from_hex(curve_, c_prime), key_));
  }

 private:
  const Curve& curve_;
  std::unique_ptr<Entropy> entropy_;
  KeyPair key_;
  SignerSessionStore sessions_;
};

}  // namespace

PYBIND11_MODULE(_blindmix, mod) {
  mod.doc() = "EC blind signatures, a simulated mixing bank and its anonymity analysis";

  py::class_<PySigner>(mod, "Signer")
      .def(py::init<const std::string&, std::optional<std::uint64_t>>(), py::arg("curve") = "secp256k1",
           py::arg("seed") = py::none())
      .def_property_readonly("public_key", &PySigner::public_key)
      .def("open", &PySigner::open, "Returns (session_id, R)")
      .def("sign", &PySigner::sign, py::arg("session"), py::arg("c_prime"));

  mod.def(
      "blind",
      [](const std::string& curve_name, const std::string& output, Amount denomination, const std::string& bank_key,
         const py::bytes& nonce, const std::string& r, std::uint64_t seed) {
        const Curve& curve = curve_by_name(curve_name);
        SeededEntropy rng(seed);
        const PartBlindMessage m = make_message(curve, output, denomination, bank_key, nonce);
        const BlindingResult b = blind(curve, m, point_from_hex(curve, r), m.bank_key, rng);
        py::dict secrets;
        secrets["gamma"] = scalar_hex(curve, b.secrets.gamma);
        secrets["delta"] = scalar_hex(curve, b.secrets.delta);
        secrets["t"] = scalar_hex(curve, b.secrets.t);
        secrets["c"] = scalar_hex(curve, b.secrets.c);
        return py::make_tuple(scalar_hex(curve, b.c_prime), secrets);
      },
      py::arg("curve"), py::arg("output"), py::arg("denomination"), py::arg("bank_key"), py::arg("nonce"),
      py::arg("r"), py::arg("seed"), "Returns (c_prime, secrets)");

  mod.def(
      "unblind",
      [](const std::string& curve_name, const std::string& s_prime, const py::dict& secrets) {
        const Curve& curve = curve_by_name(curve_name);
        BlindingSecrets s{scalar_from_hex(curve, secrets["gamma"].cast<std::string>()),
                          scalar_from_hex(curve, secrets["delta"].cast<std::string>()),
                          scalar_from_hex(curve, secrets["t"].cast<std::string>()),
                          scalar_from_hex(curve, secrets["c"].cast<std::string>())};
        const Signature sig = unblind(curve, scalar_from_hex(curve, s_prime), s);
        return py::make_tuple(scalar_hex(curve, sig.c), scalar_hex(curve, sig.s));
      },
      py::arg("curve"), py::arg("s_prime"), py::arg("secrets"), "Returns (c, s)");

  mod.def(
      "verify",
      [](const std::string& curve_name, const std::string& output, Amount denomination, const std::string& bank_key,
         const py::bytes& nonce, const std::string& c, const std::string& s) {
        const Curve& curve = curve_by_name(curve_name);
        const PartBlindMessage m = make_message(curve, output, denomination, bank_key, nonce);
        return verify(curve, m, {scalar_from_hex(curve, c), scalar_from_hex(curve, s)}, m.bank_key);
      },
      py::arg("curve"), py::arg("output"), py::arg("denomination"), py::arg("bank_key"), py::arg("nonce"),
      py::arg("c"), py::arg("s"));

  mod.def(
      "anonymity_probability", [](std::int64_t n, std::int64_t m) { return fraction(anonymity_probability(n, m)); },
      py::arg("n"), py::arg("m"));

  mod.def(
      "run_experiment",
      [](std::size_t users, std::uint64_t seed, Amount unique_denomination, std::uint64_t omega) {
        ExperimentConfig cfg;
        cfg.users = users;
        cfg.seed = seed;
        cfg.unique_denomination = unique_denomination;
        MixingSimulation sim(Curve::secp256k1(), cfg);
        const ExperimentResult r = sim.run();
        py::list counts;
        for (std::size_t i = 0; i < r.inputs.size(); ++i) {
          counts.append(passive_trace(sim.ledger(), r.inputs[i], omega, r.denominations[i], cfg.fee_rate).candidate_count);
        }
        std::vector<WithdrawalVoucher> vouchers;
        for (const RedeemedRecord& rr : sim.bank().redeemed()) vouchers.push_back(rr.voucher);
        const AuditResult audit =
            unlinkability_audit(sim.curve(), sim.bank().signed_records(), vouchers, sim.bank().public_key());
        py::dict out;
        out["output_balances"] = r.output_balances;
        out["bank_fees"] = r.bank_after - r.bank_before;
        out["candidate_counts"] = counts;
        out["audit_consistent"] = audit.all_consistent();
        out["ledger_balanced"] = sim.ledger().audit().balanced();
        return out;
      },
      py::arg("users") = 10, py::arg("seed") = 1, py::arg("unique_denomination") = 0, py::arg("omega") = 11);

  mod.def(
      "run_comparison",
      [](std::size_t iterations, std::size_t repetitions, std::uint64_t seed) {
        SeededEntropy rng(seed);
        const ComparisonReport report = run_comparison(iterations, repetitions, rng);
        py::dict out;
        for (const auto& [name, timings] : {std::pair{"ecc", &report.ecc}, std::pair{"rsa", &report.rsa}}) {
          py::dict phases;
          for (Phase p : kPhases) phases[to_string(p)] = (*timings)[p].mean;
          phases["total"] = timings->total();
          out[name] = phases;
        }
        out["ratio"] = report.ratio();
        out["initiation_ratio"] = report.initiation_ratio();
        return out;
      },
      py::arg("iterations") = 10, py::arg("repetitions") = 1, py::arg("seed") = 1);
}
