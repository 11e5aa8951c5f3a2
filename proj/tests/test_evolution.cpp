#include "doctest.h"

#include "diraclab/evolution.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace diraclab;
using namespace diraclab::evolution;
using potentials::MatrixTerm;
using potentials::PotentialSpec;
using potentials::RadialProfile;

namespace {

Spinor random_spinor(std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Spinor z;
  for (int i = 0; i < 4; ++i)
    z(i) = {nd(rng), nd(rng)};
  return z;
}

// RK4 on u' = -i <beta u, u> beta u with the coefficient re-evaluated at every
// stage, so nothing is assumed about its conservation.
Spinor rk4_cubic(Spinor u, double dt, int steps) {
  const auto &beta = spinor::dirac_constants().beta;
  const auto rhs = [&](const Spinor &v) -> Spinor {
    const cplx c = (beta * v).dot(v); // conj(v)^T beta v, real
    return -I * c * (beta * v);
  };
  const double h = dt / steps;
  for (int n = 0; n < steps; ++n) {
    const Spinor k1 = rhs(u);
    const Spinor k2 = rhs(u + 0.5 * h * k1);
    const Spinor k3 = rhs(u + 0.5 * h * k2);
    const Spinor k4 = rhs(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

double beta_form(const Spinor &u) {
  return (spinor::dirac_constants().beta * u).dot(u).real();
}

angular::DiscretizationPtr small_disc() {
  static const auto d = angular::make_discretization(128, 16.0, 3);
  return d;
}

ChannelState gaussian_state(const angular::DiscretizationPtr &d, const Spinor &chi,
                            const Vec3 &center, double width, double amp) {
  const auto f = angular::sample(d, [&](const Vec3 &x) -> Spinor {
    return amp * std::exp(-(x - center).squaredNorm() / (width * width)) * chi;
  });
  return angular::analyze(f);
}

double rel_diff(const ChannelState &a, const ChannelState &b) {
  return (a - b).l2_norm() / std::max(a.l2_norm(), 1e-300);
}

} // namespace

TEST_CASE("cubic rotation against micro-stepped RK4") {
  std::mt19937_64 rng(11);
  double worst = 0.0, worst_c = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Spinor u = random_spinor(rng, 0.7);
    const double dt = 0.05;
    const Spinor ref = rk4_cubic(u, dt, 1000);
    worst = std::max(worst, (nonlinear_rotation(u, dt) - ref).norm());
    worst_c = std::max(worst_c, std::abs(beta_form(ref) - beta_form(u)));
  }
  MESSAGE("rotation vs RK4 " << worst << ", drift of <beta u,u> under RK4 " << worst_c);
  CHECK(worst_c < 1e-12);
  CHECK(worst < 1e-10);
}

TEST_CASE("cubic rotation: examples and pointwise invariants") {
  const Spinor e1{1, 0, 0, 0};
  const Spinor out = nonlinear_rotation(e1, 0.3);
  CHECK(std::abs(out(0) - std::exp(-I * 0.3)) < 1e-15);
  CHECK(out.tail<3>().norm() == 0.0);

  std::mt19937_64 rng(5);
  for (int n = 0; n < 500; ++n) {
    const Spinor e = spinor::project_E(random_spinor(rng)).parallel;
    CHECK((nonlinear_rotation(e, 0.7) - e).norm() <= 1e-15 * e.norm());
    const Spinor u = random_spinor(rng);
    const Spinor v = nonlinear_rotation(u, 1.3);
    CHECK(std::abs(v.norm() - u.norm()) < 1e-14);
    CHECK(std::abs(beta_form(v) - beta_form(u)) < 1e-13);
  }
}

TEST_CASE("grid cubic substep applies the pointwise rotation") {
  const auto d = small_disc();
  std::mt19937_64 rng(3);
  angular::GridField f(d);
  for (int c = 0; c < 4; ++c)
    f.comp[c] = Eigen::MatrixXcd::Random(d->radial().size(), d->sphere().size());
  const auto g = nonlinear_substep(f, 0.2);
  for (int t = 0; t < 50; ++t) {
    const int i = std::uniform_int_distribution<int>(0, d->radial().size() - 1)(rng);
    const int q = std::uniform_int_distribution<int>(0, d->sphere().size() - 1)(rng);
    CHECK((g.at(i, q) - nonlinear_rotation(f.at(i, q), 0.2)).norm() < 1e-15);
  }
  CHECK(std::abs(g.l2_norm() - f.l2_norm()) < 1e-12 * f.l2_norm());
  CHECK((nonlinear_substep(f, 0.0) - f).max_abs() == 0.0);
}

TEST_CASE("V0 substep") {
  const auto d = small_disc();
  const auto &dc = spinor::dirac_constants();
  angular::GridField f(d);
  for (int c = 0; c < 4; ++c)
    f.comp[c] = Eigen::MatrixXcd::Random(d->radial().size(), d->sphere().size());

  SUBCASE("zero potential is the identity") {
    CHECK((v0_substep(f, PotentialSpec{}, 0.3) - f).max_abs() == 0.0);
  }
  SUBCASE("c beta turns upper and lower pairs oppositely") {
    PotentialSpec spec;
    spec.V0_terms.push_back({RadialProfile::constant(0.8), dc.beta});
    const auto g = v0_substep(f, spec, 0.25);
    const cplx up = std::exp(I * 0.8 * 0.25);
    for (int i = 0; i < d->radial().size(); i += 7)
      for (int q = 0; q < d->sphere().size(); q += 5) {
        const Spinor u = f.at(i, q);
        const Spinor expect{up * u(0), up * u(1), u(2) / up, u(3) / up};
        CHECK((g.at(i, q) - expect).norm() < 1e-14);
      }
  }
  SUBCASE("general hermitian field against the matrix exponential") {
    PotentialSpec spec;
    spec.V0_field = [&](const Vec3 &x) -> SpinorMatrix {
      SpinorMatrix M = std::exp(-x.norm()) * spinor::make_class_V(0.3, -0.2, {0.1, 0.4}, {-0.5, 0.2});
      M += x(2) / (1.0 + x.squaredNorm()) * dc.alpha[0];
      return M;
    };
    const double dt = 0.37;
    const auto g = v0_substep(f, spec, dt);
    for (int i = 0; i < d->radial().size(); i += 11)
      for (int q = 0; q < d->sphere().size(); q += 3) {
        const SpinorMatrix U = (I * dt * spec.V0_field(d->point(i, q))).exp();
        CHECK((g.at(i, q) - U * f.at(i, q)).norm() < 1e-13);
        CHECK(std::abs(g.at(i, q).norm() - f.at(i, q).norm()) < 1e-14);
      }
  }
  SUBCASE("non-hermitian sample is rejected") {
    PotentialSpec spec;
    SpinorMatrix M = SpinorMatrix::Zero();
    M(0, 1) = 1.0;
    spec.V0_terms.push_back({RadialProfile::constant(1.0), M});
    CHECK_THROWS_AS(V0Propagator(d, spec, 0.1), std::invalid_argument);
  }
}

TEST_CASE("class V exponentials commute with the LM conjugation") {
  // gamma conj(exp(i V t)) = exp(i V t) gamma for V in the class, which is the
  // substep-level reason the flow preserves E.
  const auto &dc = spinor::dirac_constants();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int n = 0; n < 100; ++n) {
    const SpinorMatrix V =
        spinor::make_class_V(nd(rng), nd(rng), {nd(rng), nd(rng)}, {nd(rng), nd(rng)});
    REQUIRE(spinor::in_class_V(V, 1e-14));
    CHECK(spinor::max_entry(V.conjugate() * dc.gamma + dc.gamma * V) < 1e-14);
    const SpinorMatrix U = (I * 0.9 * V).exp();
    CHECK(spinor::max_entry(dc.gamma * U.conjugate() - U * dc.gamma) < 1e-12);
  }
}

TEST_CASE("beta parts of V0 move into the generator") {
  const auto &dc = spinor::dirac_constants();
  PotentialSpec spec;
  spec.A0 = RadialProfile::gaussian(0.5, 2.0);
  spec.V0_terms.push_back({RadialProfile::exponential(0.1, 1.0), dc.beta});
  spec.V0_terms.push_back({RadialProfile::exponential(1.0, 1.0),
                           spinor::make_class_V(0.0, 0.0, {0.2, 0.0}, {0.0, 0.0})});
  const auto s = split_for_generator(spec);
  CHECK(s.pointwise.V0_terms.size() == 1);
  CHECK(s.pointwise.A0.is_zero());
  for (double r : {0.1, 1.0, 3.0})
    CHECK(s.A0(r) == doctest::Approx(0.5 * std::exp(-r * r / 4) + 0.1 * std::exp(-r)).epsilon(1e-15));
}

TEST_CASE("degenerate splitting equals the channel propagator") {
  const auto d = small_disc();
  const auto u0 = gaussian_state(d, Spinor{1, 0.5, 0, -0.25}, Vec3{0.3, 0, 0.2}, 1.2, 1.0);
  PotentialSpec spec;
  spec.A0 = RadialProfile::exponential(0.3, 1.0);
  SolverOptions so;
  so.dt = 0.05;
  so.cubic = false;
  const SplitStepSolver solver(d, spec, so);
  CHECK_FALSE(solver.has_pointwise_stage());
  EvolutionState s(u0);
  solver.advance(s, 20);
  ChannelState ref = u0;
  radial::GeneratorSet(d, spec.A0).propagate(ref, 1.0);
  CHECK(rel_diff(s.channels, ref) < 1e-13);
  CHECK(s.t == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pointwise beta potential converges to the folded generator at order 2") {
  const auto d = small_disc();
  const auto &dc = spinor::dirac_constants();
  const auto u0 = gaussian_state(d, Spinor{1, 0, 0.5, 0}, Vec3{0, 0, 0.4}, 1.0, 1.0);
  // the same V0 given as a field is not recognised as radial, so it is split
  PotentialSpec as_field;
  as_field.V0_field = [&](const Vec3 &x) -> SpinorMatrix {
    return 0.5 * std::exp(-x.norm()) * dc.beta;
  };
  PotentialSpec folded;
  folded.A0 = RadialProfile::exponential(0.5, 1.0);
  ChannelState exact = u0;
  radial::GeneratorSet(d, folded.A0).propagate(exact, 1.0);

  std::vector<double> err;
  for (double dt : {0.2, 0.1, 0.05}) {
    LinearFlow lf(d, as_field, dt);
    CHECK_FALSE(lf.exact());
    ChannelState s = u0;
    lf.propagate(s, 1.0);
    err.push_back(rel_diff(s, exact));
  }
  const double p1 = std::log2(err[0] / err[1]);
  const double p2 = std::log2(err[1] / err[2]);
  MESSAGE("errors " << err[0] << " " << err[1] << " " << err[2] << " orders " << p1 << " " << p2);
  CHECK(p1 > 1.9);
  CHECK(p2 > 1.9);
}

TEST_CASE("exact linear flow runs backwards") {
  const auto d = small_disc();
  const auto u0 = gaussian_state(d, Spinor{0.2, 1, 0, 0.5}, Vec3{0.5, 0.1, 0}, 1.0, 1.0);
  PotentialSpec spec;
  spec.A0 = RadialProfile::constant(0.2);
  LinearFlow lf(d, spec, 0.01);
  ChannelState s = u0;
  lf.propagate(s, 2.5);
  CHECK(std::abs(s.l2_norm() - u0.l2_norm()) < 1e-12 * u0.l2_norm());
  lf.propagate(s, -2.5);
  CHECK(rel_diff(s, u0) < 1e-12);
}

TEST_CASE("norm bookkeeping under the cubic flow") {
  const auto d = small_disc();
  const auto u0 = gaussian_state(d, Spinor{1, 0.5, 0.3, -0.2}, Vec3{0.5, 0, 0.3}, 1.0, 1.5);
  PotentialSpec spec;
  spec.A0 = RadialProfile::exponential(0.1, 1.0);
  SolverOptions so;
  so.dt = 0.02;
  const SplitStepSolver solver(d, spec, so);
  EvolutionState s(u0);
  const double m0 = u0.l2_norm_squared();
  solver.advance(s, 50);
  const double m1 = s.channels.l2_norm_squared();
  MESSAGE("truncation loss " << s.truncation_loss << " of " << m0);
  CHECK(s.truncation_loss >= -1e-13 * m0);
  CHECK(std::abs(m1 + s.truncation_loss - m0) < 1e-12 * m0);
}

TEST_CASE("LM data under a class V potential: cubic term inactive") {
  const auto d = small_disc();
  const auto &dc = spinor::dirac_constants();
  // pointwise projection onto E of an off-centre Gaussian: E-valued, all j
  const auto f0 = angular::sample(d, [&](const Vec3 &x) -> Spinor {
    const Spinor z{1.0, {0.3, 0.2}, -0.5, {0.1, -0.7}};
    return spinor::project_E(2.0 * std::exp(-(x - Vec3{0.4, -0.3, 0.5}).squaredNorm()) * z).parallel;
  });
  const ChannelState u0 = angular::analyze(f0);
  PotentialSpec spec;
  spec.A0 = RadialProfile::gaussian(0.3, 1.5);
  spec.V0_terms.push_back({RadialProfile::exponential(1.0, 1.0),
                           spinor::make_class_V(0.2, -0.1, {0.15, 0.05}, {-0.1, 0.2})});
  REQUIRE(spec.is_V0_in_class_V());

  // the truncated state is still E-valued
  const auto g0 = angular::synthesize(u0);
  double defect0 = 0.0;
  for (int i = 0; i < d->radial().size(); ++i)
    for (int q = 0; q < d->sphere().size(); ++q)
      defect0 = std::max(defect0, (spinor::lm_conjugate(g0.at(i, q)) - g0.at(i, q)).norm());
  CHECK(defect0 < 1e-13);

  SolverOptions so;
  so.dt = 0.02;
  const SplitStepSolver nl(d, spec, so);
  so.cubic = false;
  const SplitStepSolver lin(d, spec, so, nl.linear().generators());
  EvolutionState a(u0), b(u0);
  double chiral = 0.0, defect = 0.0;
  for (int k = 0; k < 10; ++k) {
    nl.advance(a, 5);
    lin.advance(b, 5);
    const auto &g = a.field();
    for (int i = 0; i < d->radial().size(); ++i)
      for (int q = 0; q < d->sphere().size(); ++q) {
        const Spinor u = g.at(i, q);
        chiral = std::max(chiral, std::abs(beta_form(u)));
        defect = std::max(defect, (spinor::lm_conjugate(u) - u).norm());
      }
  }
  MESSAGE("sup |<beta u,u>| " << chiral << ", sup |gamma conj(u) - u| " << defect
                              << ", nonlinear vs linear " << rel_diff(a.channels, b.channels));
  CHECK(chiral < 1e-12);
  CHECK(defect < 1e-12);
  CHECK(rel_diff(a.channels, b.channels) < 1e-12);
}

TEST_CASE("Strang splitting self-converges at second order") {
  const auto d = small_disc();
  const auto u0 = gaussian_state(d, Spinor{1, 0.4, 0.2, -0.3}, Vec3{0.3, 0.2, 0}, 1.0, 1.0);
  PotentialSpec spec;
  spec.A0 = RadialProfile::exponential(0.2, 1.0);
  spec.V0_terms.push_back({RadialProfile::exponential(1.0, 1.0),
                           spinor::make_class_V(0.0, 0.0, {0.1, 0.0}, {0.0, 0.1})});
  std::vector<ChannelState> sols;
  radial::GeneratorSetPtr gens;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    SolverOptions so;
    so.dt = dt;
    const SplitStepSolver solver(d, spec, so, gens);
    gens = solver.linear().generators();
    EvolutionState s(u0);
    solver.advance(s, step_count(1.0, dt));
    sols.push_back(s.channels);
  }
  const double e1 = (sols[0] - sols[1]).l2_norm();
  const double e2 = (sols[1] - sols[2]).l2_norm();
  const double e3 = (sols[2] - sols[3]).l2_norm();
  MESSAGE("successive differences " << e1 << " " << e2 << " " << e3);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("simulate: observer cadence, zero data, abort") {
  const auto d = small_disc();
  SolverOptions so;
  so.dt = 0.05;
  const SplitStepSolver solver(d, PotentialSpec{}, so);
  std::vector<double> times;
  SimulateOptions opt;
  opt.T = 1.0;
  opt.snapshot_every = 6;
  const auto end = simulate(solver, EvolutionState(ChannelState(d)), opt,
                            [&](const EvolutionState &s) {
                              times.push_back(s.t);
                              CHECK(s.channels.l2_norm() == 0.0);
                              return true;
                            });
  REQUIRE(times.size() == 5);
  CHECK(times.front() == 0.0);
  CHECK(times[1] == doctest::Approx(0.3));
  CHECK(times.back() == doctest::Approx(1.0));
  CHECK(end.step == 20);

  CHECK_THROWS_AS(step_count(1.0, 0.3), std::invalid_argument);

  ChannelState bad(d);
  bad.plus(3, 0) = std::numeric_limits<double>::quiet_NaN();
  EvolutionState s(bad);
  CHECK_THROWS_AS(solver.advance(s, 2), SolverAbort);
}

TEST_CASE("linear_flow matches simulate when the cubic term vanishes") {
  const auto d = small_disc();
  const auto f0 = angular::sample(d, [&](const Vec3 &x) -> Spinor {
    return spinor::project_E(std::exp(-(x - Vec3{0.2, 0, 0.3}).squaredNorm()) *
                             Spinor{1.0, 0.5, {0, 0.3}, 0.2})
        .parallel;
  });
  const ChannelState u0 = angular::analyze(f0);
  PotentialSpec spec;
  spec.V0_terms.push_back({RadialProfile::exponential(0.1, 1.0), spinor::dirac_constants().beta});
  SimulateOptions opt;
  opt.T = 0.5;
  const auto lin = linear_flow(d, u0, spec, 0.05, opt, nullptr);
  SolverOptions so;
  so.dt = 0.05;
  const auto nl = simulate(SplitStepSolver(d, spec, so), EvolutionState(u0), opt, nullptr);
  CHECK(rel_diff(lin.channels, nl.channels) < 1e-12);
  CHECK(std::abs(lin.channels.l2_norm() - u0.l2_norm()) < 1e-10 * u0.l2_norm());
}
