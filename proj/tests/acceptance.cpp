// Acceptance criteria 1-10: one PASS/FAIL line each. --only N runs a single
// criterion, --out DIR holds the preset runs.

#include "diraclab/config.hpp"
#include "diraclab/diagnostics.hpp"
#include "diraclab/evolution.hpp"
#include "diraclab/norms.hpp"
#include "diraclab/potentials.hpp"
#include "diraclab/runner.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <CLI11.hpp>
#include <gsl/gsl_integration.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace diraclab;
using angular::ChannelIndex;
using angular::ChannelState;
using angular::Sign;
using config::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s; // <= 0: none
  std::function<void(Outcome &)> body;
};

std::string g_out = "acceptance_out";

Spinor random_spinor(std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Spinor z;
  for (int i = 0; i < 4; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    z(i) = {re, im};
  }
  return z;
}

// (a, b, -conj(b), conj(a)) is the general element of E
Spinor random_E(std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  const cplx a{nd(rng), nd(rng)}, b{nd(rng), nd(rng)};
  return Spinor{a, b, -std::conj(b), std::conj(a)};
}

runner::RunOptions run_options(const std::string &name) {
  runner::RunOptions o;
  o.out_dir = g_out + "/" + name;
  o.quiet = true;
  return o;
}

//******************************************************************************
void algebra(Outcome &o) {
  const auto &d = spinor::dirac_constants();
  const SpinorMatrix I4 = SpinorMatrix::Identity();
  double worst = 0.0;
  const auto upd = [&](const SpinorMatrix &m) { worst = std::max(worst, m.cwiseAbs().maxCoeff()); };
  for (int j = 0; j < 3; ++j) {
    upd(d.alpha[j] * d.beta + d.beta * d.alpha[j]);
    for (int k = 0; k < 3; ++k)
      upd(d.alpha[j] * d.alpha[k] + d.alpha[k] * d.alpha[j] - (j == k ? 2.0 : 0.0) * I4);
    upd(d.alpha[j].conjugate() * d.gamma - d.gamma * d.alpha[j]);
  }
  upd(d.beta * d.beta - I4);
  upd(d.gamma * d.gamma - I4);
  upd(d.beta * d.gamma + d.gamma * d.beta);
  // beta in the class V: hermitian and conj(beta) gamma = -gamma beta
  upd(d.beta - d.beta.adjoint());
  upd(d.beta.conjugate() * d.gamma + d.gamma * d.beta);
  o.check(worst == 0.0, "matrix relations exact");
  o.check(spinor::in_class_V(d.beta, 0.0), "in_class_V(beta)");

  std::mt19937_64 rng(20240601);
  double chiral = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Spinor z = random_E(rng);
    chiral = std::max(chiral, spinor::chiral_invariant(z) / std::pow(z.squaredNorm(), 2));
  }
  o.check(chiral <= 1e-12, "chiral invariant on E");
  o.detail << "relations max residual " << worst << ", max chiral/|z|^4 on 1000 E-vectors "
           << chiral;
}

//******************************************************************************
// Product Gauss-Legendre x trapezoid rule on the sphere, independent of the
// library quadrature.
struct TensorSphere {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  TensorSphere(int n_theta, int n_phi) {
    gsl_integration_glfixed_table *t = gsl_integration_glfixed_table_alloc(n_theta);
    for (int i = 0; i < n_theta; ++i) {
      double x = 0.0, w = 0.0;
      gsl_integration_glfixed_point(-1.0, 1.0, i, &x, &w, t);
      const double s = std::sqrt(1.0 - x * x);
      for (int k = 0; k < n_phi; ++k) {
        const double ph = 2.0 * pi * k / n_phi;
        nodes.emplace_back(s * std::cos(ph), s * std::sin(ph), x);
        weights.push_back(w * 2.0 * pi / n_phi);
      }
    }
    gsl_integration_glfixed_table_free(t);
  }
};

// K Phi with K = beta (2 S.L + 1), L = -i x ^ grad acting on the degree-0
// extension of Phi, by 4th-order centred differences at |x| = 1.
Spinor K_by_differences(const ChannelIndex &c, Sign s, const Vec3 &w) {
  const auto &d = spinor::dirac_constants();
  const double h = 1e-3;
  const auto f = [&](const Vec3 &x) { return angular::phi_basis(c, s, x.normalized()); };
  std::array<Spinor, 3> grad;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = h * Vec3::Unit(j);
    grad[j] = (8.0 * (f(w + e) - f(w - e)) - (f(w + 2 * e) - f(w - 2 * e))) / (12.0 * h);
  }
  Spinor out = f(w);
  for (int j = 0; j < 3; ++j) {
    const int k = (j + 1) % 3, l = (j + 2) % 3;
    const Spinor Lj = -I * (w(k) * grad[l] - w(l) * grad[k]);
    out += 2.0 * (d.S[j] * Lj);
  }
  return d.beta * out;
}

// -i alpha.grad by centred differences of step h
Spinor dirac_fd(const ChannelState &u, const Vec3 &x, double h) {
  const auto &d = spinor::dirac_constants();
  Spinor out = Spinor::Zero();
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = h * Vec3::Unit(j);
    out += -I * (d.alpha[j] * ((u.evaluate(x + e) - u.evaluate(x - e)) / (2.0 * h)));
  }
  return out;
}

void partial_waves(Outcome &o) {
  const auto chs = angular::channels_up_to(9);
  const TensorSphere ts(16, 32);
  std::vector<Eigen::MatrixXcd> vals;
  std::vector<std::pair<ChannelIndex, Sign>> labels;
  for (const auto &c : chs)
    for (Sign s : {Sign::plus, Sign::minus}) {
      Eigen::MatrixXcd v(ts.nodes.size(), 4);
      for (std::size_t q = 0; q < ts.nodes.size(); ++q)
        v.row(q) = angular::phi_basis(c, s, ts.nodes[q]).transpose();
      vals.push_back(v);
      labels.emplace_back(c, s);
    }
  double gram = 0.0;
  for (std::size_t a = 0; a < vals.size(); ++a)
    for (std::size_t b = a; b < vals.size(); ++b) {
      cplx g = 0.0;
      for (std::size_t q = 0; q < ts.nodes.size(); ++q)
        g += ts.weights[q] * vals[b].row(q).dot(vals[a].row(q));
      gram = std::max(gram, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  o.check(gram <= 1e-9, "Gram matrix");

  // K Phi = -k Phi by differentiating Phi directly
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  double keig = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vec3 w = Vec3(nd(rng), nd(rng), nd(rng)).normalized();
    for (const auto &[c, s] : labels) {
      const Spinor phi = angular::phi_basis(c, s, w);
      keig = std::max(keig, (K_by_differences(c, s, w) + double(c.k) * phi).norm());
    }
  }
  o.check(keig <= 1e-8, "K eigenvalues (difference oracle, step 1e-3)");

  // round trip of a random band-limited state
  const auto disc = angular::make_discretization(64, 8.0, 9);
  ChannelState r(disc);
  for (int i = 0; i < r.plus.rows(); ++i)
    for (int j = 0; j < r.plus.cols(); ++j) {
      const double a = nd(rng), b = nd(rng), c = nd(rng), e = nd(rng);
      r.plus(i, j) = {a, b};
      r.minus(i, j) = {c, e};
    }
  const double rt = (angular::analyze(angular::synthesize(r)) - r).l2_norm() / r.l2_norm();
  o.check(rt <= 1e-10, "analyze/synthesize round trip");

  // channel Dirac operator against centred differences on a 32^3 lattice;
  // the O(h^2) envelope is the Richardson estimate (4/3)|fd(h) - fd(h/2)|
  const auto d3 = angular::make_discretization(512, 8.0, 5);
  ChannelState u(d3);
  const std::vector<std::pair<ChannelIndex, cplx>> mix = {
      {ChannelIndex::make(1, 1, -1), 1.0},
      {ChannelIndex::make(3, -1, 2), cplx(0.3, -0.4)},
      {ChannelIndex::make(5, 3, -3), cplx(-0.2, 0.1)}};
  for (const auto &[c, a] : mix) {
    const int n = d3->position(c);
    for (int i = 0; i < d3->radial().size(); ++i) {
      const double rr = d3->radial().r(i);
      u.plus(i, n) = a * std::pow(rr, c.l_plus() + 1) * std::exp(-rr * rr);
      u.minus(i, n) = 0.5 * a * std::pow(rr, c.l_minus() + 1) * std::exp(-rr * rr);
    }
  }
  const ChannelState du = angular::apply_dirac_channel(u);
  const double L = 2.0, h = 2.0 * L / 32;
  double err = 0.0, env = 0.0, worst_ratio = 0.0;
  for (int a = 1; a < 31; ++a)
    for (int b = 1; b < 31; ++b)
      for (int c = 1; c < 31; ++c) {
        const Vec3 x(-L + (a + 0.5) * h, -L + (b + 0.5) * h, -L + (c + 0.5) * h);
        if (x.norm() < 0.25)
          continue;
        const Spinor f1 = dirac_fd(u, x, h), f2 = dirac_fd(u, x, h / 2);
        const double e = (du.evaluate(x) - f1).norm();
        const double v = (4.0 / 3.0) * (f1 - f2).norm();
        err = std::max(err, e);
        env = std::max(env, v);
        worst_ratio = std::max(worst_ratio, e / (v + 1e-6));
      }
  o.check(err <= 1.1 * env, "apply_dirac_channel within the O(h^2) envelope");
  o.detail << "Gram " << gram << ", K eig " << keig << ", round trip " << rt
           << ", Dirac vs 32^3 differences " << err << " (envelope " << env << ")";
}

//******************************************************************************
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void conservation(Outcome &o) {
  const auto c = config::preset("conservation");
  o.check(c.N == 512 && c.T == 16.0 && c.dt == 0.01, "preset parameters");
  const auto m = runner::run(c, run_options("conservation"));
  const double md = m.summary["mass_drift_rel_max"].get<double>();
  const double gd = m.summary["gamma_charge_drift_rel_max"].get<double>();
  o.check(md <= 1e-8, "mass drift");
  o.check(gd <= 1e-6, "gamma-charge drift");
  o.detail << "mass drift " << md << ", gamma-charge drift " << gd << " over "
           << m.series.rows.size() << " rows";
}

//******************************************************************************
void lm_preservation(Outcome &o) {
  auto c = config::preset("lm-large");
  c.initial.defect = 0.0;
  c.companion = false;
  c.scattering.enabled = false;
  c.T = 8.0;
  c.potential.A0 = {};
  c.potential.A0.kind = "exponential";
  c.potential.A0.amp = 0.3;
  c.potential.A0.scale = 2.0;
  c.potential.V0.clear();
  config::ProfileConfig p;
  p.kind = "exponential";
  p.amp = 1.0;
  p.scale = 1.0;
  config::MatrixConfig mc;
  mc.kind = "class_V";
  mc.a = 0.2;
  mc.b = -0.1;
  mc.z = cplx(0.15, 0.05);
  mc.w = cplx(-0.1, 0.2);
  c.potential.V0.push_back({p, mc});
  const auto spec = c.potential.build();
  o.check(spec.is_V0_in_class_V(), "V0 in the class V");

  const auto disc = angular::make_discretization(c.N, c.R, c.two_j_max, c.angular_degree);
  const auto init = config::build_initial(c, disc);
  const auto g0 = angular::synthesize(init.u0);
  double u0_inf = 0.0;
  for (int i = 0; i < disc->radial().size(); ++i)
    for (int q = 0; q < disc->sphere().size(); ++q)
      u0_inf = std::max(u0_inf, g0.at(i, q).norm());

  evolution::SolverOptions so;
  so.dt = c.dt;
  const evolution::SplitStepSolver nl(disc, spec, so);
  so.cubic = false;
  const evolution::SplitStepSolver lin(disc, spec, so, nl.linear().generators());
  evolution::EvolutionState a(init.u0), b(init.u0);
  double chiral = diagnostics::lm_monitor(g0).chiral_sup, diff = 0.0;
  const long total = evolution::step_count(c.T, c.dt);
  while (a.step < total) {
    nl.advance(a, 20);
    lin.advance(b, 20);
    chiral = std::max(chiral, diagnostics::lm_monitor(a.field()).chiral_sup);
    diff = std::max(diff, (a.channels - b.channels).l2_norm() / b.channels.l2_norm());
  }
  const double ratio = chiral / (u0_inf * u0_inf);
  o.check(ratio <= 1e-7, "sup |<beta u,u>| relative to |u0|_inf^2");
  o.check(diff <= 1e-6, "nonlinear vs linear");
  o.detail << "|u0|_inf " << u0_inf << ", sup_t |<beta u,u>|_inf / |u0|_inf^2 " << ratio
           << ", max relative L2 nonlinear - linear " << diff << " (N=" << c.N
           << ", T=" << c.T << ")";
}

//******************************************************************************
// u' = -i <beta u,u> beta u by RK4 with the coefficient re-evaluated per stage
Spinor rk4_cubic(Spinor u, double dt, int steps) {
  const auto &beta = spinor::dirac_constants().beta;
  const auto rhs = [&](const Spinor &v) -> Spinor {
    return -I * (beta * v).dot(v) * (beta * v);
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

void rotation(Outcome &o) {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> udt(0.001, 0.1);
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const Spinor u = random_spinor(rng, 0.7);
    const double dt = udt(rng);
    worst = std::max(worst, (evolution::nonlinear_rotation(u, dt) - rk4_cubic(u, dt, 400)).norm());
  }
  o.check(worst <= 1e-10, "rotation vs RK4");
  o.detail << "max |exact - RK4| over 10^4 spinors " << worst;
}

//******************************************************************************
void splitting(Outcome &o) {
  auto c = config::preset("free-convergence");
  c.convergence.dts = {0.04, 0.02, 0.01, 0.005};
  const json r = runner::free_convergence(c);
  for (const auto &x : r["orders"]) {
    const double p = x.get<double>();
    o.check(std::abs(p - 2.0) <= 0.1, "order " + std::to_string(p));
    o.detail << "order " << p << ", ";
  }
  const double fit = r["fitted_order"].get<double>();
  o.check(std::abs(fit - 2.0) <= 0.1, "fitted order");
  o.detail << "fitted " << fit;
}

//******************************************************************************
void identities(Outcome &o) {
  auto ic = config::preset("identity-checks").identities;
  ic.n = 64;
  ic.hs = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  ic.sigmas = {0.0, 0.25, 0.5, 1.0};
  const json r = runner::identity_checks(ic, 1);
  const auto &m = r["morawetz_smooth"];
  for (const auto &s : m["slopes_id2"]) {
    o.check(!s.is_null() && s.get<double>() >= 1.9, "id2 slope");
    o.detail << "id2 slope " << s << ", ";
  }
  o.check(m["overall_slope_id2"].get<double>() >= 1.9, "id2 overall slope");
  o.detail << "overall " << m["overall_slope_id2"].get<double>() << "; Hardy max ratio";
  for (const auto &h : r["hardy"]) {
    const double sigma = h["sigma"].get<double>(), ratio = h["max_ratio"].get<double>();
    o.check(ratio <= 2.0 / (sigma + 1.0) + 1e-3, "Hardy sigma " + std::to_string(sigma));
    o.detail << " " << ratio << " (<= " << 2.0 / (sigma + 1.0) << ")";
  }
}

//******************************************************************************
void norm_suite(Outcome &o) {
  // indicator of 1 <= |x| < 2: L2 norm sqrt(28 pi / 3)
  const auto fine = angular::make_discretization(2048, 4.0, 1);
  const auto ind = angular::sample(fine, [](const Vec3 &x) -> Spinor {
    const double r = x.norm();
    return (r >= 1.0 && r < 2.0 ? 1.0 : 0.0) * Spinor{1, 0, 0, 0};
  });
  const double exact = std::sqrt(28.0 * pi / 3.0);
  double ind_err = 0.0;
  for (double p : {1.0, 2.0, norms::inf}) {
    norms::MixedNormSpec s;
    s.p = p;
    ind_err = std::max(ind_err, rel(norms::mixed_norm(ind, s), exact));
  }
  norms::MixedNormSpec lr;
  lr.r = norms::inf;
  ind_err = std::max(ind_err, rel(norms::mixed_norm(ind, lr), std::sqrt(7.0 / 3.0)));
  o.check(ind_err <= 1e-6, "shell indicator");

  const auto d = angular::make_discretization(256, 16.0, 5);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  bool ordered = true;
  double parseval = 0.0;
  for (int t = 0; t < 100; ++t) {
    ChannelState s(d);
    for (int n = 0; n < d->n_channels(); ++n) {
      const double c = std::abs(nd(rng)) * 4.0 + 0.5, w = 0.5 + std::abs(nd(rng));
      const double a1 = nd(rng), a2 = nd(rng), a3 = nd(rng), a4 = nd(rng);
      for (int i = 0; i < d->radial().size(); ++i) {
        const double e = std::exp(-std::pow((d->radial().r(i) - c) / w, 2));
        s.plus(i, n) = cplx(a1, a2) * e;
        s.minus(i, n) = cplx(a3, a4) * e;
      }
    }
    const auto f = angular::synthesize(s);
    norms::MixedNormSpec spec;
    spec.p = 1.0;
    const double n1 = norms::mixed_norm(f, spec);
    spec.p = 2.0;
    const double n2 = norms::mixed_norm(f, spec);
    spec.p = norms::inf;
    const double ni = norms::mixed_norm(f, spec);
    ordered = ordered && n1 >= n2 && n2 >= ni;
    // shell sum vs channel coefficients vs quadrature on the grid
    parseval = std::max(parseval, rel(n2, s.l2_norm()));
    parseval = std::max(parseval, rel(std::sqrt(f.l2_norm_squared()), s.l2_norm()));
  }
  o.check(ordered, "l1 >= l2 >= linf");
  o.check(parseval <= 1e-9, "Parseval");
  o.detail << "indicator rel error " << ind_err << ", ordering on 100 fields "
           << (ordered ? "holds" : "violated") << ", Parseval " << parseval;
}

//******************************************************************************
void scattering(Outcome &o) {
  for (const char *name : {"small-data", "lm-large"}) {
    const auto c = config::preset(name);
    o.check(c.T == 24.0 && c.scattering.enabled, std::string(name) + " preset");
    const auto m = runner::run(c, run_options(name));
    const auto &sc = *m.scattering;
    bool decreasing = sc.tails.size() >= 3;
    for (std::size_t i = 1; i < sc.tails.size(); ++i)
      decreasing = decreasing && sc.tails[i].lambda_h1 < sc.tails[i - 1].lambda_h1;
    o.check(decreasing, std::string(name) + " tails decrease over >= 3 windows");
    const auto &x = m.summary["x_norm"];
    const double r1 = x["l2t_ratio"].get<double>(), r2 = x["sup_ratio"].get<double>();
    o.check(r1 <= 3.0 && r2 <= 3.0, std::string(name) + " X-norm partials");
    o.detail << name << ": tails";
    for (const auto &t : sc.tails)
      o.detail << " " << t.lambda_h1;
    o.detail << ", X partial ratios " << r1 << " " << r2 << "; ";
  }
}

//******************************************************************************
void checkers(Outcome &o) {
  const auto zero = potentials::check_condition_V(potentials::PotentialSpec{});
  bool all_zero = true;
  for (const auto &q : zero.quantities)
    all_zero = all_zero && q.value == 0.0;
  o.check(all_zero, "V = 0 gives zeros");

  potentials::PotentialSpec s;
  s.A0 = potentials::RadialProfile::power(1.0, 2.0);
  s.V0_terms.push_back({potentials::RadialProfile::exponential(0.5, 1.0),
                        spinor::make_class_V(0.3, -0.2, {0.1, 0.05}, {0.0, 0.1})});
  const auto r1 = potentials::check_condition_V(s);
  double worst = 0.0;
  for (double lam : {0.25, 3.0}) {
    const auto rl = potentials::check_condition_V(s.scaled(lam));
    for (const auto &q : r1.quantities) {
      if (q.name.find('+') != std::string::npos)
        continue; // sums of linear and quadratic parts
      const bool quad = q.name.find("|V|^2") != std::string::npos;
      const double expect = (quad ? lam * lam : lam) * q.value;
      const double got = rl.value(q.name);
      worst = std::max(worst, q.value == 0.0 ? std::abs(got) : rel(got, expect));
    }
  }
  o.check(worst <= 1e-10, "scaling");
  const double a2 = potentials::check_A2([](double) { return 1.0; }).ratio;
  o.check(a2 == 1.0, "A2 ratio of the constant weight");
  o.detail << "zero potential " << (all_zero ? "all zero" : "nonzero") << ", scaling rel error "
           << worst << ", A2(1) = " << a2;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "Run one criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--out", g_out, "Directory for preset runs");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "algebra suite", 1.0, algebra},
      {2, "partial-wave suite", 60.0, partial_waves},
      {3, "conservation preset", 300.0, conservation},
      {4, "LM preservation", 300.0, lm_preservation},
      {5, "nonlinear substep oracle", 0.0, rotation},
      {6, "splitting order", 0.0, splitting},
      {7, "identity suite", 600.0, identities},
      {8, "norm suite", 0.0, norm_suite},
      {9, "scattering surrogate", 1200.0, scattering},
      {10, "assumption checkers", 0.0, checkers},
  };
  bool ok = true;
  for (const auto &c : all) {
    if (only && c.id != only)
      continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail << " [over time limit " << c.time_limit_s << " s]";
    }
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, c.name.c_str(),
                o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
