#include "blindmix/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "blindmix/blind_sig.hpp"
#include "blindmix/rsa_blind.hpp"

namespace blindmix {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::initiation: return "initiation";
    case Phase::blinding: return "blinding";
    case Phase::blind_signing: return "blind_signing";
    case Phase::unblinding: return "unblinding";
    case Phase::verification: return "verification";
  }
  return "?";
}

double PhaseTimings::total() const {
  double sum = 0;
  for (const PhaseStat& s : phases) sum += s.mean;
  return sum;
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  explicit Stopwatch(double& sink) : sink_(sink), start_(Clock::now()) {}
  ~Stopwatch() { sink_ += std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  double& sink_;
  Clock::time_point start_;
};

using RepTotals = std::array<double, 5>;

PhaseTimings summarize(std::string scheme, const std::vector<RepTotals>& reps, std::size_t iterations) {
  PhaseTimings t;
  t.scheme = std::move(scheme);
  t.iterations = iterations;
  t.repetitions = reps.size();
  for (std::size_t p = 0; p < 5; ++p) {
    double mean = 0;
    for (const RepTotals& r : reps) mean += r[p];
    mean /= static_cast<double>(reps.size());
    double var = 0;
    for (const RepTotals& r : reps) var += (r[p] - mean) * (r[p] - mean);
    t.phases[p] = {mean, reps.size() > 1 ? std::sqrt(var / static_cast<double>(reps.size() - 1)) : 0.0};
  }
  return t;
}

constexpr std::size_t idx(Phase p) { return static_cast<std::size_t>(p); }

}  // namespace

PhaseTimings run_ecc_bench(const Curve& curve, std::size_t iterations, std::size_t repetitions, Entropy& entropy) {
  if (iterations == 0 || repetitions == 0) throw std::invalid_argument("iterations and repetitions must be positive");
  const KeyPair bank = keygen(curve, entropy);
  SignerSessionStore sessions(curve);
  std::vector<RepTotals> reps;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    RepTotals acc{};
    for (std::size_t i = 0; i < iterations; ++i) {
      {
        Stopwatch w(acc[idx(Phase::initiation)]);
        const KeyPair fresh = keygen(curve, entropy);
        if (fresh.public_key.is_infinity()) throw BenchError("keygen produced the point at infinity");
      }
      PartBlindMessage m;
      m.output = address_of(curve, bank.public_key);
      m.denomination = 100000;
      m.bank_key = bank.public_key;
      entropy.fill(m.nonce);

      OpenedSession session;
      {
        Stopwatch w(acc[idx(Phase::blind_signing)]);
        session = sessions.open(entropy, 0);
      }
      BlindingResult blinded;
      {
        Stopwatch w(acc[idx(Phase::blinding)]);
        blinded = blind(curve, m, session.r, bank.public_key, entropy);
      }
      Scalar s_prime;
      {
        Stopwatch w(acc[idx(Phase::blind_signing)]);
        s_prime = sessions.sign(session.id, blinded.c_prime, bank);
      }
      Signature sig;
      {
        Stopwatch w(acc[idx(Phase::unblinding)]);
        sig = unblind(curve, s_prime, blinded.secrets);
      }
      bool ok = false;
      {
        Stopwatch w(acc[idx(Phase::verification)]);
        ok = verify(curve, m, sig, bank.public_key);
      }
      if (!ok) throw BenchError("ECC blind signature failed to verify during the benchmark");
    }
    reps.push_back(acc);
  }
  return summarize("ecc-" + curve.name(), reps, iterations);
}

PhaseTimings run_rsa_bench(unsigned modulus_bits, std::size_t iterations, std::size_t repetitions, Entropy& entropy) {
  if (iterations == 0 || repetitions == 0) throw std::invalid_argument("iterations and repetitions must be positive");
  const RsaKeyPair bank = rsa_keygen(modulus_bits, entropy);
  std::vector<RepTotals> reps;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    RepTotals acc{};
    for (std::size_t i = 0; i < iterations; ++i) {
      {
        Stopwatch w(acc[idx(Phase::initiation)]);
        const RsaKeyPair fresh = rsa_keygen(modulus_bits, entropy);
        if (fresh.pub.n == 0) throw BenchError("RSA keygen produced an empty modulus");
      }
      const Bytes message = entropy.bytes(89);
      mpz_class representative;
      mpz_class r;
      mpz_class blinded;
      {
        Stopwatch w(acc[idx(Phase::blinding)]);
        representative = rsa_message_representative(bank.pub, message);
        r = rsa_blinding_factor(bank.pub, entropy);
        blinded = rsa_blind(bank.pub, representative, r);
      }
      mpz_class blind_sig;
      {
        Stopwatch w(acc[idx(Phase::blind_signing)]);
        blind_sig = rsa_blind_sign(bank, blinded);
      }
      mpz_class sig;
      {
        Stopwatch w(acc[idx(Phase::unblinding)]);
        sig = rsa_unblind(bank.pub, blind_sig, r);
      }
      bool ok = false;
      {
        Stopwatch w(acc[idx(Phase::verification)]);
        ok = rsa_verify(bank.pub, representative, sig);
      }
      if (!ok) throw BenchError("RSA blind signature failed to verify during the benchmark");
    }
    reps.push_back(acc);
  }
  return summarize("rsa-" + std::to_string(modulus_bits), reps, iterations);
}

std::vector<BenchRow> ComparisonReport::rows() const {
  std::vector<BenchRow> out;
  for (const PhaseTimings* t : {&ecc, &rsa}) {
    for (Phase p : kPhases) out.push_back({t->scheme, to_string(p), (*t)[p].mean, (*t)[p].stddev});
    out.push_back({t->scheme, "total", t->total(), 0.0});
  }
  return out;
}

std::string ComparisonReport::table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "iterations %zu, repetitions %zu (seconds per repetition)\n", ecc.iterations,
                ecc.repetitions);
  out << line;
  std::snprintf(line, sizeof line, "%-14s %14s %14s %10s\n", "phase", ecc.scheme.c_str(), rsa.scheme.c_str(), "rsa/ecc");
  out << line;
  for (Phase p : kPhases) {
    std::snprintf(line, sizeof line, "%-14s %14.6f %14.6f %10.1f\n", to_string(p), ecc[p].mean, rsa[p].mean,
                  rsa[p].mean / ecc[p].mean);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-14s %14.6f %14.6f %10.1f\n", "total", ecc.total(), rsa.total(), ratio());
  out << line;
  return out.str();
}

std::string ComparisonReport::csv() const {
  std::ostringstream out;
  out << "scheme,phase,mean_s,stddev_s\n";
  char line[160];
  for (const BenchRow& r : rows()) {
    std::snprintf(line, sizeof line, "%s,%s,%.9f,%.9f\n", r.scheme.c_str(), r.phase.c_str(), r.mean, r.stddev);
    out << line;
  }
  return out.str();
}

ComparisonReport run_comparison(std::size_t iterations, std::size_t repetitions, Entropy& entropy) {
  ComparisonReport report;
  report.ecc = run_ecc_bench(Curve::secp256k1(), iterations, repetitions, entropy);
  report.rsa = run_rsa_bench(1024, iterations, repetitions, entropy);
  return report;
}

}  // namespace blindmix
