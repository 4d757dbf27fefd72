#pragma once
// Named randomized verification suites behind the `verify` command. Instances
// are derived from split_seed(base, index), so results are independent of
// thread scheduling and identical across reruns.

#include <cstdint>
#include <string>
#include <vector>

#include "pgrates/analysis.hpp"

namespace pgrates {

struct SuiteOptions {
  long long trials = -1;          // -1 = per-suite defaults; 0 = vacuous pass
  std::uint64_t seed = 20200521;  // base seed for instance derivation
};

struct SuiteResult {
  std::vector<CheckReport> reports;
  long long failures = 0;
};

// {lojasiewicz, reversed, entropy_lojasiewicz, smoothness, spectrum,
//  gradcheck, identities, degree, fixtures}
const std::vector<std::string>& suite_names();

// Unknown names throw InvalidInput.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts);

// Worker count for the randomized suites: PGRATES_THREADS when set, else the
// hardware concurrency (at least 1).
int effective_threads();

}  // namespace pgrates
