#pragma once

#include "diraclab/config.hpp"
#include "diraclab/diagnostics.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diraclab::runner {

using config::json;

struct RunOptions {
  std::string out_dir = "out";
  bool resume = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool override_wall_guard = false;
  bool quiet = false;
  // Stop after this many diagnostics rows in this invocation, leaving a
  // resumable snapshot behind; negative means run to the end.
  long stop_after_rows = -1;
};

struct OutputFile {
  std::string path;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string name;
  std::string config_hash;
  std::string code_version;
  bool completed = true;
  bool resumed = false;
  std::vector<std::pair<std::string, double>> timings; // seconds
  std::vector<OutputFile> outputs;
  json summary;
  diagnostics::DiagnosticsSeries series;
  std::optional<diagnostics::ScatteringResult> scattering;

  json to_json() const;
};

// An output file could not be written; written() lists what was.
class OutputError : public std::runtime_error {
public:
  OutputError(const std::string &msg, std::vector<OutputFile> written)
      : std::runtime_error(msg), m_written(std::move(written)) {}
  const std::vector<OutputFile> &written() const { return m_written; }

private:
  std::vector<OutputFile> m_written;
};

const char *code_version();

// Runs one configuration into opt.out_dir (config.json, diagnostics.csv,
// summary.json, scattering.json, plots/, snapshot.bin, manifest.json).
// Throws config::ConfigError on validation failures and rethrows
// evolution::SolverAbort after persisting the last good state.
RunManifest run(config::SimulationConfig c, const RunOptions &opt);

//******************************************************************************
// Final states for each dt of c.convergence.dts, differences of successive
// refinements and the observed orders.
json free_convergence(const config::SimulationConfig &c);

// Morawetz refinement (smooth weights and the C^1 weight) and Hardy ratios.
json identity_checks(const config::IdentityConfig &ic, std::uint64_t seed);

// Condition (V), the angular assumptions and the A2 ratio of the weight.
json check_potential(const config::SimulationConfig &c);

json report_json(const potentials::AssumptionReport &r);
json scattering_json(const diagnostics::ScatteringResult &r);

} // namespace diraclab::runner
