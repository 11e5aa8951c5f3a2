#pragma once

#include "diraclab/angular.hpp"
#include "diraclab/norms.hpp"
#include "diraclab/potentials.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diraclab::config {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// Field-level validation failure; path names the offending key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &path, const std::string &msg)
      : std::runtime_error(path + ": " + msg), m_path(path) {}
  const std::string &path() const { return m_path; }

private:
  std::string m_path;
};

//******************************************************************************
struct ProfileConfig {
  std::string kind = "zero"; // zero, constant, gaussian, exponential, power, tabulated
  double amp = 0.0;
  double scale = 1.0;
  double p = 0.0;
  std::vector<double> r, f; // tabulated samples

  potentials::RadialProfile build() const;
};

// A constant 4x4 matrix: "beta", "identity", class V parameters or entries.
struct MatrixConfig {
  std::string kind = "beta"; // beta, identity, class_V, entries
  double a = 0.0, b = 0.0;
  cplx z = 0.0, w = 0.0;
  SpinorMatrix entries = SpinorMatrix::Zero();

  SpinorMatrix build() const;
};

struct PotentialConfig {
  ProfileConfig A0;
  std::vector<std::pair<ProfileConfig, MatrixConfig>> V0;
  double sigma = 1.0;

  potentials::PotentialSpec build() const;
};

//******************************************************************************
// Initial data profiles:
//   zero             u0 = 0
//   gaussian-spinor  A exp(-|x-c|^2/w^2) chi, chi a unit spinor
//   lm               chi0 + v0: chi0 = A exp(-|x-c|^2/w^2) Q(chi) in E with
//                    peak |chi0| = A, v0 a defect of the same shape in the
//                    complement of E with ||Lambda^s v0||_{H^1} = defect
//   channel-packet   psi+ = A (r/w)^(l+ + 1) exp(-(r-r0)^2/w^2) in one channel
// An unset spinor is drawn from the seed. If lambda_h1 is set the data are
// rescaled so that ||Lambda^s u0||_{H^1} equals it (not for lm).
struct InitialConfig {
  std::string profile = "gaussian-spinor";
  double amplitude = 1.0;
  double width = 1.0;
  Vec3 center = Vec3::Zero();
  std::optional<Spinor> spinor;
  std::optional<double> lambda_h1;
  double defect = 0.0;
  std::optional<Spinor> defect_spinor;
  int two_j = 1, two_m = 1, k = -1;
  double radius = 0.0;
};

struct ScatteringConfig {
  bool enabled = false;
  double first_window = 3.0;
  double sample_dt = 0.05;
  double shrink_factor = 1.0;
};

struct ConvergenceConfig {
  std::vector<double> dts = {0.04, 0.02, 0.01, 0.005};
};

struct IdentityConfig {
  int n = 64;
  std::vector<double> hs = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  double bump_radius = 0.72;
  double kink_radius = 0.4;
  int hardy_profiles = 50;
  std::vector<double> sigmas = {0.0, 0.25, 0.5, 1.0};
};

struct SimulationConfig {
  std::string name = "custom";
  // none: time evolution; free-convergence: dt refinement study;
  // identity-checks: static Morawetz and Hardy suites
  std::string study = "none";

  int N = 512;
  double R = 32.0;
  int two_j_max = 9;
  int angular_degree = -1;

  double dt = 0.01;
  double T = 1.0;
  long snapshot_every = 10;   // steps between diagnostics rows
  long checkpoint_every = 10; // diagnostics rows between snapshot files; 0 = end only
  bool cubic = true;

  PotentialConfig potential;
  InitialConfig initial;

  double s = 1.5;
  std::vector<norms::MixedNormSpec> tracked;
  std::optional<potentials::WeightSpec> weight; // adds a smoothing-norm column

  ScatteringConfig scattering;
  bool companion = false; // linear run of the E part of lm data
  ConvergenceConfig convergence;
  IdentityConfig identities;

  std::uint64_t seed = 1;
  bool override_wall_guard = false;
  bool svg = true;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

// Strict parsing: unknown keys and wrong types are ConfigErrors.
SimulationConfig from_json(const json &j);
json to_json(const SimulationConfig &c);
SimulationConfig load(const std::string &path);

// FNV-1a 64 over the canonical JSON dump.
std::uint64_t config_hash(const SimulationConfig &c);
std::string hex(std::uint64_t h);

//******************************************************************************
std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
SimulationConfig preset(const std::string &name);

//******************************************************************************
struct InitialData {
  angular::ChannelState u0;
  std::optional<angular::ChannelState> chi0; // E part of lm data
  double support_radius = 0.0; // beyond it |u0| < 1e-12 max |u0|
};

InitialData build_initial(const SimulationConfig &c, angular::DiscretizationPtr disc);

// Radius beyond which every angular L^2 norm is below rel times the largest.
double support_radius(const angular::ChannelState &s, double rel = 1e-12);

} // namespace diraclab::config
