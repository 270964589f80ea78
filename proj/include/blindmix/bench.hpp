#pragma once

#include <array>
#include <string>
#include <vector>

#include "blindmix/ec_group.hpp"
#include "blindmix/entropy.hpp"

namespace blindmix {

enum class Phase { initiation, blinding, blind_signing, unblinding, verification };

inline constexpr std::array<Phase, 5> kPhases{Phase::initiation, Phase::blinding, Phase::blind_signing,
                                               Phase::unblinding, Phase::verification};

const char* to_string(Phase phase);

struct PhaseStat {
  double mean = 0;    // seconds per repetition (sum over the I iterations)
  double stddev = 0;  // across repetitions
};

struct PhaseTimings {
  std::string scheme;
  std::array<PhaseStat, 5> phases{};
  std::size_t iterations = 0;
  std::size_t repetitions = 0;

  const PhaseStat& operator[](Phase p) const { return phases[static_cast<std::size_t>(p)]; }
  double total() const;
};

/// Raised when a timed iteration fails to verify; the benchmark is aborted.
class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PhaseTimings run_ecc_bench(const Curve& curve, std::size_t iterations, std::size_t repetitions, Entropy& entropy);
PhaseTimings run_rsa_bench(unsigned modulus_bits, std::size_t iterations, std::size_t repetitions, Entropy& entropy);

struct BenchRow {
  std::string scheme;
  std::string phase;
  double mean = 0;
  double stddev = 0;
};

struct ComparisonReport {
  PhaseTimings ecc;
  PhaseTimings rsa;

  /// RSA total / ECC total.
  double ratio() const { return rsa.total() / ecc.total(); }
  double initiation_ratio() const { return rsa[Phase::initiation].mean / ecc[Phase::initiation].mean; }
  std::vector<BenchRow> rows() const;
  std::string table() const;
  /// scheme,phase,mean_s,stddev_s lines with a header.
  std::string csv() const;
};

/// ECC on secp256k1 against 1024-bit RSA, run one after the other.
ComparisonReport run_comparison(std::size_t iterations, std::size_t repetitions, Entropy& entropy);

}  // namespace blindmix
