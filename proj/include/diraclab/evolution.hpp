#pragma once

#include "diraclab/angular.hpp"
#include "diraclab/potentials.hpp"
#include "diraclab/radial_evolution.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace diraclab::evolution {

using angular::ChannelState;
using angular::DiscretizationPtr;
using angular::GridField;

//******************************************************************************
// Pointwise substeps. Both are exact solutions of their ODEs.

// i u_t = <beta u, u> beta u at one point: c = |u1|^2 + |u2|^2 - |u3|^2 - |u4|^2
// is constant, so the upper pair turns by exp(-i c dt) and the lower pair by
// exp(+i c dt).
Spinor nonlinear_rotation(const Spinor &u, double dt);
void apply_nonlinear(GridField &f, double dt);
GridField nonlinear_substep(GridField f, double dt);

// exp(i V0(x) dt) at every grid point. Samples are cached per radius when V0
// is radial-times-constant and per point otherwise.
class V0Propagator {
public:
  // Throws std::invalid_argument on a non-hermitian or non-finite sample.
  V0Propagator(DiscretizationPtr disc, const potentials::PotentialSpec &spec,
               double dt);

  bool is_identity() const { return m_identity; }
  double dt() const { return m_dt; }
  void apply(GridField &f) const;

private:
  DiscretizationPtr m_disc;
  double m_dt;
  bool m_identity = true;
  bool m_radial = true;
  std::vector<SpinorMatrix> m_U; // N or N*Q entries, point index i*Q + q
};

GridField v0_substep(GridField f, const potentials::PotentialSpec &spec,
                     double dt);

//******************************************************************************
// V = A0 beta + V0. Radial V0 terms proportional to beta are channel-diagonal
// and move into the generator; what is left is applied pointwise.
struct GeneratorSplit {
  potentials::RadialProfile A0;
  potentials::PotentialSpec pointwise; // A0 = 0, the non-beta part of V0
};

GeneratorSplit split_for_generator(const potentials::PotentialSpec &spec);

//******************************************************************************
// Linear flow exp(i t (D + V)) on channel states. Exact when the pointwise
// part of V0 vanishes, Strang split with steps of at most max_dt otherwise.
// Negative times run the flow backwards. A supplied generator set must have
// been built from split_for_generator(spec).A0.
class LinearFlow {
public:
  LinearFlow(DiscretizationPtr disc, const potentials::PotentialSpec &spec,
             double max_dt, radial::GeneratorSetPtr gens = nullptr);

  const DiscretizationPtr &discretization() const { return m_disc; }
  const radial::GeneratorSetPtr &generators() const { return m_gens; }
  const potentials::PotentialSpec &pointwise_part() const { return m_split.pointwise; }
  const potentials::RadialProfile &generator_A0() const { return m_split.A0; }
  bool exact() const { return m_exact; }

  void propagate(ChannelState &s, double t) const;

private:
  DiscretizationPtr m_disc;
  GeneratorSplit m_split;
  double m_max_dt;
  bool m_exact;
  radial::GeneratorSetPtr m_gens;
  mutable std::optional<V0Propagator> m_v0; // last substep size used
};

//******************************************************************************
struct EvolutionState {
  double t = 0.0;
  double t_origin = 0.0; // t = t_origin + step * dt
  long step = 0;
  ChannelState channels;
  // Sum over steps of the norm^2 dropped by analysis after the pointwise
  // substeps, and the norm^2 fraction in the top two j-shells after the last
  // step.
  double truncation_loss = 0.0;
  double top_shell_fraction = 0.0;

  explicit EvolutionState(ChannelState s, double t0 = 0.0)
      : t(t0), t_origin(t0), channels(std::move(s)) {}

  // Synthesized field of the current channels, computed on demand.
  const GridField &field() const;
  // Call after modifying channels directly.
  void invalidate() { m_field.reset(); }

private:
  mutable std::optional<GridField> m_field;
};

struct SolverOptions {
  double dt = 0.01;
  bool cubic = true;
  // Warn when the top two j-shells carry more than this fraction of the norm
  // (only meaningful with at least three shells).
  double shell_warning = 1e-6;
};

class SolverAbort : public std::runtime_error {
public:
  SolverAbort(const std::string &what, EvolutionState last_good)
      : std::runtime_error(what), m_state(std::move(last_good)) {}
  const EvolutionState &last_good() const { return m_state; }

private:
  EvolutionState m_state;
};

// Strang splitting
//   linear dt/2, synthesize, V0 dt/2, cubic dt, V0 dt/2, analyze, linear dt/2
// with adjacent linear half steps merged inside advance().
class SplitStepSolver {
public:
  SplitStepSolver(DiscretizationPtr disc, const potentials::PotentialSpec &spec,
                  SolverOptions opt, radial::GeneratorSetPtr gens = nullptr);

  const SolverOptions &options() const { return m_opt; }
  const LinearFlow &linear() const { return m_linear; }
  bool has_pointwise_stage() const;

  void step(EvolutionState &s) const { advance(s, 1); }
  // n steps of size dt. Throws SolverAbort when the state turns non-finite;
  // the attached state is the input.
  void advance(EvolutionState &s, long n) const;

  // True once any step has exceeded the shell warning threshold.
  bool shell_warning_raised() const { return m_warned; }

private:
  void pointwise_stage(EvolutionState &s) const;

  DiscretizationPtr m_disc;
  SolverOptions m_opt;
  LinearFlow m_linear;
  std::optional<V0Propagator> m_v0_half;
  mutable bool m_warned = false;
};

//******************************************************************************
struct SimulateOptions {
  double T = 1.0;
  long snapshot_every = 10; // steps between observer calls
};

// Calls observe(state) at the initial time, every snapshot_every steps and at
// the end. The observer may return false to stop early.
using Observer = std::function<bool(const EvolutionState &)>;

EvolutionState simulate(const SplitStepSolver &solver, EvolutionState state,
                        const SimulateOptions &opt, const Observer &observe);

// simulate with the cubic substep disabled
EvolutionState linear_flow(DiscretizationPtr disc, ChannelState u0,
                           const potentials::PotentialSpec &spec, double dt,
                           const SimulateOptions &opt, const Observer &observe,
                           radial::GeneratorSetPtr gens = nullptr);

// Number of dt steps covering T, rejecting T that is not a multiple of dt.
long step_count(double T, double dt);

} // namespace diraclab::evolution
