#include "diraclab/evolution.hpp"

#include "diraclab/spinor_algebra.hpp"

#include <cmath>
#include <iostream>

namespace diraclab::evolution {

namespace {

SpinorMatrix hermitian_exp(const SpinorMatrix &M, double dt) {
  Eigen::SelfAdjointEigenSolver<SpinorMatrix> es(M);
  const Eigen::Vector4cd ph =
      (I * dt * es.eigenvalues().cast<cplx>()).array().exp().matrix();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

void check_sample(const SpinorMatrix &M, const Vec3 &x) {
  if (!M.allFinite())
    throw std::invalid_argument("V0: non-finite sample at |x| = " +
                                std::to_string(x.norm()));
  const double scale = std::max(1.0, spinor::max_entry(M));
  if (!spinor::is_hermitian(M, 1e-12 * scale))
    throw std::invalid_argument("V0: non-hermitian sample at |x| = " +
                                std::to_string(x.norm()));
}

bool is_beta_multiple(const SpinorMatrix &M, double &a) {
  const auto &beta = spinor::dirac_constants().beta;
  a = M(0, 0).real();
  const double tol = 1e-15 * std::max(1.0, std::abs(a));
  return std::abs(M(0, 0).imag()) <= tol &&
         spinor::max_entry(M - a * beta) <= tol;
}

bool all_finite(const ChannelState &s) {
  return s.plus.allFinite() && s.minus.allFinite();
}

} // namespace

//******************************************************************************
Spinor nonlinear_rotation(const Spinor &u, double dt) {
  const double c = std::norm(u(0)) + std::norm(u(1)) - std::norm(u(2)) -
                   std::norm(u(3));
  const cplx up = std::polar(1.0, -c * dt);
  const cplx down = std::conj(up);
  return Spinor{up * u(0), up * u(1), down * u(2), down * u(3)};
}

void apply_nonlinear(GridField &f, double dt) {
  const int N = f.disc->radial().size();
  const int Q = f.disc->sphere().size();
  for (int q = 0; q < Q; ++q)
    for (int i = 0; i < N; ++i) {
      const double c = std::norm(f.comp[0](i, q)) + std::norm(f.comp[1](i, q)) -
                       std::norm(f.comp[2](i, q)) - std::norm(f.comp[3](i, q));
      const cplx up = std::polar(1.0, -c * dt);
      const cplx down = std::conj(up);
      f.comp[0](i, q) *= up;
      f.comp[1](i, q) *= up;
      f.comp[2](i, q) *= down;
      f.comp[3](i, q) *= down;
    }
}

GridField nonlinear_substep(GridField f, double dt) {
  apply_nonlinear(f, dt);
  return f;
}

//******************************************************************************
V0Propagator::V0Propagator(DiscretizationPtr disc,
                           const potentials::PotentialSpec &spec, double dt)
    : m_disc(std::move(disc)), m_dt(dt) {
  if (spec.is_V0_zero() || dt == 0.0)
    return;
  m_identity = false;
  m_radial = spec.is_V0_radial();
  const int N = m_disc->radial().size();
  const int Q = m_disc->sphere().size();
  if (m_radial) {
    // a radial-times-constant V0 is a function of r only
    m_U.resize(N);
    for (int i = 0; i < N; ++i) {
      const Vec3 x = m_disc->point(i, 0);
      const SpinorMatrix M = potentials::evaluate_V0(spec, x);
      check_sample(M, x);
      m_U[i] = hermitian_exp(M, dt);
    }
  } else {
    m_U.resize(static_cast<std::size_t>(N) * Q);
    for (int i = 0; i < N; ++i)
      for (int q = 0; q < Q; ++q) {
        const Vec3 x = m_disc->point(i, q);
        const SpinorMatrix M = potentials::evaluate_V0(spec, x);
        check_sample(M, x);
        m_U[static_cast<std::size_t>(i) * Q + q] = hermitian_exp(M, dt);
      }
  }
}

void V0Propagator::apply(GridField &f) const {
  if (m_identity)
    return;
  if (f.disc != m_disc)
    throw std::invalid_argument("V0Propagator: field on another discretization");
  const int N = m_disc->radial().size();
  const int Q = m_disc->sphere().size();
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < Q; ++q) {
      const SpinorMatrix &U =
          m_radial ? m_U[i] : m_U[static_cast<std::size_t>(i) * Q + q];
      f.set(i, q, U * f.at(i, q));
    }
}

GridField v0_substep(GridField f, const potentials::PotentialSpec &spec,
                     double dt) {
  V0Propagator(f.disc, spec, dt).apply(f);
  return f;
}

//******************************************************************************
GeneratorSplit split_for_generator(const potentials::PotentialSpec &spec) {
  GeneratorSplit out;
  out.pointwise.V0_field = spec.V0_field;
  out.pointwise.V0_field_in_class_V = spec.V0_field_in_class_V;
  out.pointwise.sigma = spec.sigma;

  std::vector<std::pair<double, potentials::RadialProfile>> beta_terms;
  for (const auto &t : spec.V0_terms) {
    if (t.profile.is_zero() || t.matrix.isZero(0.0))
      continue;
    double a = 0.0;
    if (is_beta_multiple(t.matrix, a))
      beta_terms.emplace_back(a, t.profile);
    else
      out.pointwise.V0_terms.push_back(t);
  }
  if (beta_terms.empty()) {
    out.A0 = spec.A0;
  } else {
    out.A0 = potentials::RadialProfile::custom(
        [A0 = spec.A0, beta_terms](double r) {
          double v = A0(r);
          for (const auto &[a, p] : beta_terms)
            v += a * p(r);
          return v;
        });
  }
  return out;
}

//******************************************************************************
LinearFlow::LinearFlow(DiscretizationPtr disc,
                       const potentials::PotentialSpec &spec, double max_dt,
                       radial::GeneratorSetPtr gens)
    : m_disc(std::move(disc)), m_split(split_for_generator(spec)),
      m_max_dt(max_dt), m_exact(m_split.pointwise.is_V0_zero()),
      m_gens(std::move(gens)) {
  if (!(max_dt > 0.0))
    throw std::invalid_argument("LinearFlow: max_dt must be positive");
  if (!m_gens)
    m_gens = std::make_shared<const radial::GeneratorSet>(m_disc, m_split.A0);
  else if (m_gens->discretization() != m_disc)
    throw std::invalid_argument("LinearFlow: generators on another discretization");
}

void LinearFlow::propagate(ChannelState &s, double t) const {
  if (t == 0.0)
    return;
  if (m_exact) {
    m_gens->propagate(s, t);
    return;
  }
  const long n = static_cast<long>(std::ceil(std::abs(t) / m_max_dt - 1e-9));
  const double tau = t / static_cast<double>(n);
  if (!m_v0 || m_v0->dt() != tau)
    m_v0.emplace(m_disc, m_split.pointwise, tau);
  m_gens->propagate(s, 0.5 * tau);
  for (long k = 0; k < n; ++k) {
    GridField f = angular::synthesize(s);
    m_v0->apply(f);
    s = angular::analyze(f);
    m_gens->propagate(s, k + 1 < n ? tau : 0.5 * tau);
  }
}

//******************************************************************************
const GridField &EvolutionState::field() const {
  if (!m_field)
    m_field = angular::synthesize(channels);
  return *m_field;
}

SplitStepSolver::SplitStepSolver(DiscretizationPtr disc,
                                 const potentials::PotentialSpec &spec,
                                 SolverOptions opt, radial::GeneratorSetPtr gens)
    : m_disc(disc), m_opt(opt), m_linear(disc, spec, opt.dt, std::move(gens)) {
  if (!(opt.dt > 0.0) || !std::isfinite(opt.dt))
    throw std::invalid_argument("SplitStepSolver: dt must be positive");
  if (!m_linear.exact())
    m_v0_half.emplace(m_disc, m_linear.pointwise_part(), 0.5 * opt.dt);
}

bool SplitStepSolver::has_pointwise_stage() const {
  return m_opt.cubic || m_v0_half.has_value();
}

void SplitStepSolver::pointwise_stage(EvolutionState &s) const {
  GridField f = angular::synthesize(s.channels);
  if (m_v0_half)
    m_v0_half->apply(f);
  if (m_opt.cubic)
    apply_nonlinear(f, m_opt.dt);
  if (m_v0_half)
    m_v0_half->apply(f);
  const double grid_norm2 = f.l2_norm_squared();
  s.channels = angular::analyze(f);
  const double kept = s.channels.l2_norm_squared();
  s.truncation_loss += grid_norm2 - kept;
  const int top = std::max(1, m_disc->two_j_max() - 2);
  s.top_shell_fraction =
      kept > 0.0 ? s.channels.l2_norm_squared_from(top) / kept : 0.0;
  // with two shells or fewer the top two are everything
  if (top > 1 && s.top_shell_fraction > m_opt.shell_warning && !m_warned) {
    m_warned = true;
    std::cerr << "warning: top two j-shells carry " << s.top_shell_fraction
              << " of the norm after t = " << s.t
              << "; angular truncation may be under-resolved\n";
  }
}

void SplitStepSolver::advance(EvolutionState &s, long n) const {
  if (n <= 0)
    return;
  const EvolutionState start = s;
  const auto &gens = *m_linear.generators();
  const double dt = m_opt.dt;
  if (!has_pointwise_stage()) {
    gens.propagate(s.channels, n * dt);
  } else {
    gens.propagate(s.channels, 0.5 * dt);
    for (long k = 0; k < n; ++k) {
      pointwise_stage(s);
      gens.propagate(s.channels, k + 1 < n ? dt : 0.5 * dt);
    }
  }
  s.step += n;
  s.t = s.t_origin + s.step * dt;
  s.invalidate();
  if (!all_finite(s.channels) || !std::isfinite(s.truncation_loss))
    throw SolverAbort("non-finite state before t = " + std::to_string(s.t),
                      start);
}

//******************************************************************************
long step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0))
    throw std::invalid_argument("step_count: need dt > 0 and T >= 0");
  const double x = T / dt;
  const long n = std::lround(x);
  if (std::abs(x - n) > 1e-9 * std::max(1.0, x))
    throw std::invalid_argument("T = " + std::to_string(T) +
                                " is not a multiple of dt = " +
                                std::to_string(dt));
  return n;
}

EvolutionState simulate(const SplitStepSolver &solver, EvolutionState state,
                        const SimulateOptions &opt, const Observer &observe) {
  if (opt.snapshot_every <= 0)
    throw std::invalid_argument("simulate: snapshot_every must be positive");
  const long total = step_count(opt.T, solver.options().dt);
  if (observe && !observe(state))
    return state;
  long done = 0;
  while (done < total) {
    const long n = std::min(opt.snapshot_every, total - done);
    solver.advance(state, n);
    done += n;
    if (observe && !observe(state))
      break;
  }
  return state;
}

EvolutionState linear_flow(DiscretizationPtr disc, ChannelState u0,
                           const potentials::PotentialSpec &spec, double dt,
                           const SimulateOptions &opt, const Observer &observe,
                           radial::GeneratorSetPtr gens) {
  SolverOptions so;
  so.dt = dt;
  so.cubic = false;
  const SplitStepSolver solver(disc, spec, so, std::move(gens));
  return simulate(solver, EvolutionState(std::move(u0)), opt, observe);
}

} // namespace diraclab::evolution
