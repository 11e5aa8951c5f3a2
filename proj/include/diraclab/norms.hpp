#pragma once

#include "diraclab/angular.hpp"
#include "diraclab/potentials.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace diraclab::norms {

using angular::ChannelState;
using angular::GridField;

inline constexpr double inf = std::numeric_limits<double>::infinity();

//******************************************************************************
// Dyadic mixed norm
//   || { || rho |x|^a Lambda^s u ||_{L^q_r L^r_omega(2^j <= |x| < 2^(j+1))} }_j ||_{l^p}
// with the radial L^q taken against r^2 dr. Exponents may be inf.
struct MixedNormSpec {
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
  double s = 0.0; // angular order, applied as |K|^s on channels
  std::optional<potentials::WeightSpec> weight;
  double x_power = 0.0;
  // Restrict the l^p sum to these shells; errors if a shell holds no grid point.
  std::optional<int> shell_min;
  std::optional<int> shell_max;

  // Throws std::invalid_argument on exponents outside [1, inf] or s < 0.
  void validate() const;
  std::string name() const;
};

struct ShellValue {
  int shell = 0;
  double value = 0.0;
  double coverage = 1.0; // fraction of [2^j, 2^(j+1)) inside the grid
  int points = 0;
};

struct MixedNormReport {
  double value = 0.0;
  std::vector<ShellValue> shells;
  // Shells only partly inside (0, R]; their covered part is what is summed.
  int clipped_shells = 0;
  // Truncation loss (norm^2) when Lambda^s had to analyze a grid field.
  double analysis_loss = 0.0;
  // L^inf parts are grid maxima, a lower bound of the true supremum.
  bool sup_is_grid_max = false;
};

MixedNormReport mixed_norm_report(const GridField &f, const MixedNormSpec &spec);
MixedNormReport mixed_norm_report(const ChannelState &s, const MixedNormSpec &spec);
double mixed_norm(const GridField &f, const MixedNormSpec &spec);
double mixed_norm(const ChannelState &s, const MixedNormSpec &spec);

//******************************************************************************
// || rho |x|^(-1/2) f ||_{L^2}
double smoothing_norm(const GridField &f, const potentials::WeightSpec &w);

// (||u||^2 + ||D u||^2)^(1/2) with D from apply_dirac_channel; D^2 = -Delta
// makes this the H^1 norm.
double h1_norm(const ChannelState &s);

// sup_i || u(r_i, .) ||_{L^2(S^2)}, exact per radius by orthonormality of the
// channel basis.
double sup_radial_l2_angular(const ChannelState &s);

//******************************************************************************
// Running L^2_t (trapezoid) or L^inf_t (max) of a scalar time series.
class SpaceTimeAccumulator {
public:
  enum class Kind { l2, sup };

  explicit SpaceTimeAccumulator(Kind kind) : m_kind(kind) {}

  // Throws std::invalid_argument unless t exceeds the previous time.
  void accumulate(double value, double t);

  Kind kind() const { return m_kind; }
  double value() const;
  const std::vector<double> &times() const { return m_t; }
  const std::vector<double> &samples() const { return m_v; }

private:
  Kind m_kind;
  std::vector<double> m_t, m_v;
  double m_sum = 0.0; // integral of value^2
  double m_max = 0.0;
};

inline SpaceTimeAccumulator accumulate(SpaceTimeAccumulator acc, double value,
                                       double t) {
  acc.accumulate(value, t);
  return acc;
}

// ||u||_X = || Lambda^s u ||_{L^2_t L^inf_|x| L^2_omega} + || Lambda^s u ||_{L^inf_t H^1}
// from an l2 accumulator of the first spatial norm and a sup accumulator of
// the second. Throws std::invalid_argument on differing sample times.
double x_norm(const SpaceTimeAccumulator &l2_part,
              const SpaceTimeAccumulator &sup_part);

// Feeds both X-norm accumulators from channel snapshots.
class XNormTracker {
public:
  explicit XNormTracker(double s);

  void add(const ChannelState &u, double t);
  // Record previously computed spatial norms (used when resuming).
  void add_values(double linf_l2, double h1, double t);

  double s() const { return m_s; }
  double l2_part() const { return m_l2.value(); }
  double sup_part() const { return m_sup.value(); }
  double value() const { return x_norm(m_l2, m_sup); }
  double last_linf_l2() const { return m_last_linf; }
  double last_h1() const { return m_last_h1; }

private:
  double m_s;
  SpaceTimeAccumulator m_l2{SpaceTimeAccumulator::Kind::l2};
  SpaceTimeAccumulator m_sup{SpaceTimeAccumulator::Kind::sup};
  double m_last_linf = 0.0, m_last_h1 = 0.0;
};

} // namespace diraclab::norms
