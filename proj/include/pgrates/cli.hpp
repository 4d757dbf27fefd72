#pragma once
// Command layer behind the pgrates binary: JSON run configs and manifests,
// verification suites as JSON-lines output, and the figure reproductions.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pgrates/json_io.hpp"
#include "pgrates/optimizer.hpp"

namespace pgrates {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// JSON -> RunConfig. Accepted keys: the problem (bandit "rewards" shorthand,
// full MDP fields, or a nested "problem" object), "mu", "rho",
// "method" {kind, eta | "auto", tau, alpha, t1 | "adaptive", switch_tol},
// "init" ("uniform" | {"seed"} | {"logits"} | {"probs"}), "iterations"
// (default 10000), "record_every", and an ignored "name". Unknown keys are
// rejected; the result is fully validated before it is returned.
RunConfig run_config_from_json(const json& j);

// Canonical echo (always a nested "problem"; "probs" inits come back as
// logits). Round-trips through run_config_from_json.
json run_config_to_json(const RunConfig& config);

// Summary written next to each trace CSV: the echoed config, resolved initial
// logits, final-row statistics, the measured exploration floor c, and a rate
// fit (power law for plain/two-stage/decaying runs, exponential for entropy
// runs; null when the trace cannot support a fit).
json trace_summary_json(const RunTrace& trace);

// Named runs making up one figure preset, at scale "full" or "desk" (T/10).
struct FigureRun {
  std::string name;
  RunConfig config;
};
std::vector<FigureRun> figure_runs(const std::string& figure, const std::string& scale);

// Commands; each maps its own errors to the documented exit codes.
int cmd_run(const std::string& config_path, const std::string& out_path);
int cmd_verify(const std::string& suite, long long trials, std::uint64_t seed,
               std::ostream& out, std::ostream& err);
int cmd_reproduce(const std::string& figure, const std::string& scale,
                  const std::string& out_dir);

// argv interface. Exit codes: 0 success, 1 check failures, 2 usage/config
// errors, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace pgrates
