// blindmix-bench: phase timings for the EC blind signature against textbook blind RSA.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "blindmix/bench.hpp"
#include "common.hpp"

using namespace blindmix;

int main(int argc, char** argv) {
  CLI::App app{"Blind signature benchmark"};
  std::size_t iterations = 1000;
  std::size_t repetitions = 1;
  std::string csv_path;
  std::optional<std::uint64_t> seed;
  app.add_option("-i,--iterations", iterations, "Signing cycles per repetition")->capture_default_str();
  app.add_option("-r,--repetitions", repetitions)->capture_default_str();
  app.add_option("--csv", csv_path, "Also write per-phase rows to this file");
  app.add_option("--seed", seed, "Deterministic entropy");
  CLI11_PARSE(app, argc, argv);

  try {
    auto entropy = tools::make_entropy(seed);
    const ComparisonReport report = run_comparison(iterations, repetitions, *entropy);
    std::cout << report.table();
    std::cout << "rsa/ecc total ratio " << report.ratio() << "\n"
              << "rsa/ecc initiation ratio " << report.initiation_ratio() << "\n";
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      out << report.csv();
      if (!out) throw std::runtime_error("cannot write " + csv_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
