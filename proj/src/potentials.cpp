#include "diraclab/potentials.hpp"
#include "diraclab/angular.hpp"
#include "diraclab/grids.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diraclab::potentials {

RadialProfile RadialProfile::constant(double amp) {
  RadialProfile p;
  p.m_kind = Kind::constant;
  p.m_amp = amp;
  return p;
}

RadialProfile RadialProfile::gaussian(double amp, double scale) {
  if (!(scale > 0.0))
    throw std::invalid_argument("gaussian profile: scale must be positive");
  RadialProfile p;
  p.m_kind = Kind::gaussian;
  p.m_amp = amp;
  p.m_scale = scale;
  return p;
}

RadialProfile RadialProfile::exponential(double amp, double scale) {
  if (!(scale > 0.0))
    throw std::invalid_argument("exponential profile: scale must be positive");
  RadialProfile p;
  p.m_kind = Kind::exponential;
  p.m_amp = amp;
  p.m_scale = scale;
  return p;
}

RadialProfile RadialProfile::power(double amp, double exponent, double scale) {
  if (!(scale > 0.0))
    throw std::invalid_argument("power profile: scale must be positive");
  RadialProfile p;
  p.m_kind = Kind::power;
  p.m_amp = amp;
  p.m_p = exponent;
  p.m_scale = scale;
  return p;
}

RadialProfile RadialProfile::tabulated(std::vector<double> r,
                                       std::vector<double> f) {
  if (r.size() != f.size() || r.size() < 3)
    throw std::invalid_argument("tabulated profile: need >= 3 matching samples");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1]))
      throw std::invalid_argument("tabulated profile: radii must increase");
  for (double v : f)
    if (!std::isfinite(v))
      throw std::invalid_argument("tabulated profile: non-finite sample");
  RadialProfile p;
  p.m_kind = Kind::tabulated;
  p.m_tr = std::move(r);
  p.m_tf = std::move(f);
  gsl_spline *sp = gsl_spline_alloc(gsl_interp_cspline, p.m_tr.size());
  gsl_spline_init(sp, p.m_tr.data(), p.m_tf.data(), p.m_tr.size());
  p.m_spline = std::shared_ptr<void>(
      sp, [](void *s) { gsl_spline_free(static_cast<gsl_spline *>(s)); });
  return p;
}

RadialProfile RadialProfile::custom(std::function<double(double)> f) {
  RadialProfile p;
  p.m_kind = Kind::custom;
  p.m_fn = std::move(f);
  return p;
}

double RadialProfile::operator()(double r) const {
  double v = 0.0;
  switch (m_kind) {
  case Kind::zero:
    return 0.0;
  case Kind::constant:
    v = m_amp;
    break;
  case Kind::gaussian:
    v = m_amp * std::exp(-(r / m_scale) * (r / m_scale));
    break;
  case Kind::exponential:
    v = m_amp * std::exp(-r / m_scale);
    break;
  case Kind::power:
    v = m_amp * std::pow(1.0 + (r / m_scale) * (r / m_scale), -m_p);
    break;
  case Kind::tabulated:
    if (r >= m_tr.back())
      v = r == m_tr.back() ? m_tf.back() : 0.0;
    else if (r <= m_tr.front())
      v = m_tf.front();
    else
      v = gsl_spline_eval(static_cast<const gsl_spline *>(m_spline.get()), r,
                          nullptr);
    break;
  case Kind::custom:
    v = m_fn(r);
    break;
  }
  return m_factor * v;
}

bool RadialProfile::is_zero() const {
  return m_kind == Kind::zero || m_factor == 0.0 ||
         (m_kind != Kind::tabulated && m_kind != Kind::custom && m_amp == 0.0);
}

RadialProfile RadialProfile::scaled(double c) const {
  RadialProfile p = *this;
  p.m_factor *= c;
  return p;
}

//******************************************************************************
bool PotentialSpec::is_V0_zero() const {
  if (V0_field)
    return false;
  return std::all_of(V0_terms.begin(), V0_terms.end(), [](const MatrixTerm &t) {
    return t.profile.is_zero() || t.matrix.isZero(0.0);
  });
}

bool PotentialSpec::is_zero() const { return A0.is_zero() && is_V0_zero(); }

bool PotentialSpec::is_V0_radial() const { return !V0_field; }

bool PotentialSpec::is_V0_in_class_V() const {
  if (V0_field && !V0_field_in_class_V)
    return false;
  return std::all_of(V0_terms.begin(), V0_terms.end(), [](const MatrixTerm &t) {
    return spinor::in_class_V(t.matrix, 1e-12);
  });
}

PotentialSpec PotentialSpec::scaled(double c) const {
  PotentialSpec s = *this;
  s.A0 = A0.scaled(c);
  for (auto &t : s.V0_terms)
    t.profile = t.profile.scaled(c);
  if (V0_field) {
    auto f = V0_field;
    s.V0_field = [f, c](const Vec3 &x) -> SpinorMatrix { return c * f(x); };
  }
  return s;
}

SpinorMatrix evaluate_V0(const PotentialSpec &spec, const Vec3 &x) {
  const double r = x.norm();
  if (r == 0.0)
    throw std::domain_error("potential evaluated at the origin");
  SpinorMatrix M = SpinorMatrix::Zero();
  for (const auto &t : spec.V0_terms)
    M += t.profile(r) * t.matrix;
  if (spec.V0_field)
    M += spec.V0_field(x);
  return M;
}

SpinorMatrix evaluate(const PotentialSpec &spec, const Vec3 &x) {
  SpinorMatrix M = evaluate_V0(spec, x);
  const double a = spec.A0(x.norm());
  if (a != 0.0)
    M += a * spinor::dirac_constants().beta;
  return M;
}

SpinorMatrix dirac_of(const std::function<SpinorMatrix(const Vec3 &)> &M,
                      const Vec3 &x) {
  const auto &dc = spinor::dirac_constants();
  const double h = std::max(1e-6, 1e-3 * x.norm());
  SpinorMatrix out = SpinorMatrix::Zero();
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = h * Vec3::Unit(j);
    const SpinorMatrix d = (M(x - 2.0 * e) - 8.0 * M(x - e) + 8.0 * M(x + e) -
                            M(x + 2.0 * e)) /
                           (12.0 * h);
    out += -I * (dc.alpha[j] * d);
  }
  return out;
}

double matrix_norm(const SpinorMatrix &M) {
  if (M.isZero(0.0))
    return 0.0;
  Eigen::JacobiSVD<SpinorMatrix> svd(M);
  return svd.singularValues()(0);
}

//******************************************************************************
double WeightSpec::rho(double r) const {
  switch (kind) {
  case Kind::constant:
    return param;
  case Kind::power_split:
    return r <= 1.0 ? std::pow(r, param) : std::pow(r, -param);
  case Kind::log: {
    const double l = std::log(r);
    return std::pow(1.0 + l * l, -0.5 * param);
  }
  }
  return param;
}

std::string WeightSpec::name() const {
  switch (kind) {
  case Kind::constant:
    return "constant(" + std::to_string(param) + ")";
  case Kind::power_split:
    return "power_split(eps=" + std::to_string(param) + ")";
  case Kind::log:
    return "log(nu=" + std::to_string(param) + ")";
  }
  return "?";
}

//******************************************************************************
bool Quantity::pass() const {
  if (!std::isfinite(value) || value < 0.0)
    return false;
  return !threshold || value < *threshold;
}

const Quantity &AssumptionReport::get(const std::string &name) const {
  for (const auto &q : quantities)
    if (q.name == name)
      return q;
  throw std::out_of_range("AssumptionReport: no quantity named " + name);
}

bool AssumptionReport::all_pass() const {
  return std::all_of(quantities.begin(), quantities.end(),
                     [](const Quantity &q) { return q.pass(); });
}

namespace {

void validate(const ShellOptions &opt) {
  if (opt.shell_max < opt.shell_min)
    throw std::invalid_argument("shell range is empty");
  if (opt.radii_per_shell < 1 || opt.angular_degree < 0)
    throw std::invalid_argument("invalid shell sampling");
}

double shell_radius(int j, int i, int n) {
  return std::ldexp(std::exp2((i + 0.5) / n), j);
}

void require_finite(double v, const char *what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite potential sample in ") + what);
}

} // namespace

AssumptionReport check_condition_V(const PotentialSpec &spec,
                                   const ShellOptions &opt) {
  validate(opt);
  const AngularQuadrature quad(opt.angular_degree);
  const bool v0_zero = spec.is_V0_zero();
  const auto V = [&](const Vec3 &x) { return evaluate(spec, x); };
  const auto V0 = [&](const Vec3 &x) { return evaluate_V0(spec, x); };

  double l1_x_v0 = 0.0;
  double sup_a = 0.0, sup_b = 0.0, sup_ab = 0.0;
  double l1_v2 = 0.0, l1_dv = 0.0, l1_dv0 = 0.0, l1_all = 0.0;
  for (int j = opt.shell_min; j <= opt.shell_max; ++j) {
    double s_xv0 = 0.0, s_v2 = 0.0, s_dv = 0.0, s_dv0 = 0.0, s_all = 0.0;
    for (int i = 0; i < opt.radii_per_shell; ++i) {
      const double r = shell_radius(j, i, opt.radii_per_shell);
      const double wdelta = std::pow(r, 2.0 + opt.delta);
      for (int q = 0; q < quad.size(); ++q) {
        const Vec3 x = r * quad.node(q);
        const double nv = matrix_norm(V(x));
        const double nv0 = v0_zero ? 0.0 : matrix_norm(V0(x));
        const double ndv = spec.is_zero() ? 0.0 : matrix_norm(dirac_of(V, x));
        const double ndv0 = v0_zero ? 0.0 : matrix_norm(dirac_of(V0, x));
        require_finite(nv + nv0 + ndv + ndv0, "check_condition_V");
        s_xv0 = std::max(s_xv0, r * nv0);
        s_v2 = std::max(s_v2, r * r * nv * nv);
        s_dv = std::max(s_dv, r * r * ndv);
        s_dv0 = std::max(s_dv0, r * r * ndv0);
        s_all = std::max(s_all, r * r * (nv * nv + ndv + ndv0));
        sup_a = std::max(sup_a, wdelta * nv * nv);
        sup_b = std::max(sup_b, wdelta * ndv);
        sup_ab = std::max(sup_ab, wdelta * (nv * nv + ndv));
      }
    }
    l1_x_v0 += s_xv0;
    l1_v2 += s_v2;
    l1_dv += s_dv;
    l1_dv0 += s_dv0;
    l1_all += s_all;
  }

  AssumptionReport rep;
  rep.shell_min = opt.shell_min;
  rep.shell_max = opt.shell_max;
  rep.radii_per_shell = opt.radii_per_shell;
  rep.angular_degree = opt.angular_degree;
  rep.delta = opt.delta;
  rep.quantities = {
      {"|x|V0 l1Linf", l1_x_v0, spec.sigma},
      {"sup |x|^(2+delta)(|V|^2+|DV|)", sup_ab, std::nullopt},
      {"sup |x|^(2+delta)|V|^2", sup_a, std::nullopt},
      {"sup |x|^(2+delta)|DV|", sup_b, std::nullopt},
      {"|x|^2(|V|^2+|DV|+|DV0|) l1Linf", l1_all, std::nullopt},
      {"|x|^2|V|^2 l1Linf", l1_v2, std::nullopt},
      {"|x|^2|DV| l1Linf", l1_dv, std::nullopt},
      {"|x|^2|DV0| l1Linf", l1_dv0, std::nullopt},
      {"|x||B| l1Linf", 0.0, std::nullopt},
  };
  rep.notes = {
      "suprema are maxima over sampled points (lower bounds of the true sup)",
      "l1 sums cover the listed shells only",
      "DV by 4th-order centred differences of each matrix entry",
      "magnetic terms vanish identically since A = 0",
      "self-adjointness and the no-resonance clause are not certified here"};
  return rep;
}

AssumptionReport check_angular_assumptions(const PotentialSpec &spec, double s,
                                           const WeightSpec &w,
                                           const ShellOptions &opt) {
  validate(opt);
  if (!(s > 1.0 && s <= 2.0))
    throw std::invalid_argument("check_angular_assumptions: need 1 < s <= 2");
  const AngularQuadrature quad(opt.angular_degree);
  const angular::SphereHarmonics sh(quad, opt.angular_degree);
  const int Q = quad.size();
  const auto V = [&](const Vec3 &x) { return evaluate(spec, x); };

  double q_v0 = 0.0, q_dv = 0.0, q_a0 = 0.0;
  Eigen::MatrixXcd v0_vals(Q, 16), dv_vals(Q, 48);
  Eigen::MatrixXcd a0_vals(1, Q);
  for (int j = opt.shell_min; j <= opt.shell_max; ++j)
    for (int i = 0; i < opt.radii_per_shell; ++i) {
      const double r = shell_radius(j, i, opt.radii_per_shell);
      const double weight = r / (w.rho(r) * w.rho(r));
      const double h = std::max(1e-6, 1e-3 * r);
      for (int q = 0; q < Q; ++q) {
        const Vec3 x = r * quad.node(q);
        const SpinorMatrix m0 = evaluate_V0(spec, x);
        v0_vals.row(q) = Eigen::Map<const Eigen::RowVectorXcd>(m0.data(), 16);
        for (int a = 0; a < 3; ++a) {
          const Vec3 e = h * Vec3::Unit(a);
          const SpinorMatrix d = (V(x - 2.0 * e) - 8.0 * V(x - e) +
                                  8.0 * V(x + e) - V(x + 2.0 * e)) /
                                 (12.0 * h);
          dv_vals.block(q, 16 * a, 1, 16) =
              Eigen::Map<const Eigen::RowVectorXcd>(d.data(), 16);
        }
        a0_vals(0, q) = spec.A0(r);
      }
      const double n0 =
          angular::sphere_l2(quad, angular::lambda_s_sphere(sh, v0_vals, s));
      const double nd =
          angular::sphere_l2(quad, angular::lambda_s_sphere(sh, dv_vals, s));
      require_finite(n0 + nd, "check_angular_assumptions");
      q_v0 = std::max(q_v0, weight * n0);
      q_dv = std::max(q_dv, weight * nd);

      // |x ^ grad A0| = |L A0| and Delta_S A0 by spectral differentiation
      const Eigen::MatrixXcd c = sh.analyze(a0_vals);
      Eigen::VectorXd om2 = Eigen::VectorXd::Zero(Q);
      for (int a = 0; a < 3; ++a)
        om2 += sh.synthesize(c * sh.angular_momentum(a).transpose())
                   .transpose()
                   .cwiseAbs2();
      Eigen::MatrixXcd lap = c;
      for (int k = 0; k < sh.n_coeffs(); ++k) {
        const int l = angular::SphereHarmonics::degree_of(k);
        lap(0, k) *= -double(l * (l + 1));
      }
      const double om = std::sqrt(om2.maxCoeff());
      const double ds = sh.synthesize(lap).cwiseAbs().maxCoeff();
      const double bracket = std::sqrt(1.0 + r * r);
      q_a0 = std::max(q_a0, weight * om +
                                bracket / (w.rho(r) * w.rho(r)) * ds);
    }

  AssumptionReport rep;
  rep.shell_min = opt.shell_min;
  rep.shell_max = opt.shell_max;
  rep.radii_per_shell = opt.radii_per_shell;
  rep.angular_degree = opt.angular_degree;
  rep.delta = opt.delta;
  rep.quantities = {
      {"sup rho^-2|x| |Lambda^s V0|_L2w", q_v0, spec.sigma},
      {"sup rho^-2|x| |Lambda^s dV|_L2w", q_dv, std::nullopt},
      {"sup rho^-2|x| |x^dA0|_Linfw + rho^-2<x> |Delta_S A0|_Linfw", q_a0,
       std::nullopt},
  };
  rep.notes = {"weight " + w.name() + ", s = " + std::to_string(s),
               "Lambda^s through scalar harmonics l <= " +
                   std::to_string(opt.angular_degree) +
                   " on each matrix entry (Frobenius sum)"};
  if (spec.A0.kind() != RadialProfile::Kind::zero)
    rep.notes.push_back("A0 is radial: the A0 angular quantity vanishes "
                        "analytically; the computed value is roundoff");
  return rep;
}

//******************************************************************************
A2Result check_A2(const std::function<double(double)> &w, const A2Family &fam) {
  const auto gs = gauss_legendre(fam.nodes, 0.0, 1.0);
  const auto gm = gauss_legendre(fam.nodes, -1.0, 1.0);
  A2Result out;
  auto ball = [&](double a, double b) {
    double sw = 0.0, swi = 0.0, vol = 0.0;
    for (int i = 0; i < fam.nodes; ++i) {
      const double s = b * gs.x[i];
      const double ws = gs.w[i] * s * s;
      for (int k = 0; k < fam.nodes; ++k) {
        const double r = std::sqrt(std::max(0.0, a * a + s * s + 2.0 * a * s * gm.x[k]));
        const double W = ws * gm.w[k];
        const double v = w(r);
        sw += W * v;
        swi += W / v;
        vol += W;
      }
    }
    const double ratio = (sw / vol) * (swi / vol);
    ++out.balls;
    if (ratio > out.ratio) {
      out.ratio = ratio;
      out.worst_center = a;
      out.worst_radius = b;
    }
  };
  for (int bb = fam.radius_min; bb <= fam.radius_max; ++bb) {
    const double b = std::ldexp(1.0, bb);
    ball(0.0, b);
    for (int aa = fam.center_min; aa <= fam.center_max; ++aa)
      ball(std::ldexp(1.0, aa), b);
  }
  return out;
}

A2Result check_A2(const WeightSpec &w, const A2Family &fam) {
  return check_A2([&w](double r) { return w.a2_weight(r); }, fam);
}

namespace {

double integrate_tail(const std::function<double(double)> &f, double a,
                      bool upper) {
  gsl_set_error_handler_off();
  gsl_integration_workspace *ws = gsl_integration_workspace_alloc(1000);
  gsl_function F;
  F.function = [](double t, void *p) {
    return (*static_cast<const std::function<double(double)> *>(p))(t);
  };
  F.params = const_cast<std::function<double(double)> *>(&f);
  double result = 0.0, err = 0.0;
  const int status =
      upper ? gsl_integration_qagiu(&F, a, 1e-12, 1e-7, 1000, ws, &result, &err)
            : gsl_integration_qagil(&F, a, 1e-12, 1e-7, 1000, ws, &result, &err);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS)
    return std::numeric_limits<double>::infinity();
  return result + err;
}

} // namespace

L2LinfResult rho_l2_linf(const WeightSpec &w, int shell_min, int shell_max) {
  if (shell_max < shell_min)
    throw std::invalid_argument("rho_l2_linf: empty shell range");
  L2LinfResult out;
  out.shell_min = shell_min;
  out.shell_max = shell_max;
  double sum = 0.0;
  for (int j = shell_min; j <= shell_max; ++j) {
    double sup = 0.0;
    for (int i = 0; i <= 64; ++i) {
      const double r = std::ldexp(std::exp2(i / 64.0), j);
      sup = std::max(sup, w.rho(r) * w.rho(r));
    }
    sum += sup;
  }
  out.in_range = std::sqrt(sum);
  if (w.kind == WeightSpec::Kind::constant) {
    out.tail_bound = w.param == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    // rho peaks at |x| = 1 and is monotone on either side, so the shell sup is
    // rho(2^j)^2 for j >= 0 and rho(2^(j+1))^2 for j < 0; bound the sums by
    // integrals of these monotone envelopes.
    const std::function<double(double)> up = [&w](double t) {
      const double v = w.rho(std::exp2(t));
      return v * v;
    };
    const std::function<double(double)> down = [&w](double t) {
      const double v = w.rho(std::exp2(t + 1.0));
      return v * v;
    };
    double tail = 0.0;
    if (shell_max >= 0)
      tail += integrate_tail(up, shell_max, true);
    else
      tail = std::numeric_limits<double>::infinity();
    if (shell_min <= -1)
      tail += integrate_tail(down, shell_min, false);
    else
      tail = std::numeric_limits<double>::infinity();
    out.tail_bound = tail;
  }
  out.total_bound = std::sqrt(sum + out.tail_bound);
  return out;
}

} // namespace diraclab::potentials
