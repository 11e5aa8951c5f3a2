#include "diraclab/diagnostics.hpp"

#include "diraclab/radial_evolution.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace diraclab::diagnostics {

namespace {

double beta_density(const Spinor &u) {
  return std::norm(u(0)) + std::norm(u(1)) - std::norm(u(2)) - std::norm(u(3));
}

template <typename Fn> void for_each_point(const GridField &f, Fn &&fn) {
  const auto &grid = f.disc->radial();
  const auto &quad = f.disc->sphere();
  for (int i = 0; i < grid.size(); ++i) {
    const double rw = grid.h() * grid.r(i) * grid.r(i);
    for (int q = 0; q < quad.size(); ++q)
      fn(rw * quad.weight(q), f.at(i, q));
  }
}

} // namespace

//******************************************************************************
Conserved conserved_quantities(const GridField &f) {
  const auto &gamma = spinor::dirac_constants().gamma;
  Conserved c;
  for_each_point(f, [&](double w, const Spinor &u) {
    c.mass += w * u.squaredNorm();
    c.gamma_charge += w * spinor::bilinear(gamma * u, u);
  });
  return c;
}

LMMonitor lm_monitor(const GridField &f) {
  LMMonitor m;
  double defect2 = 0.0, chiral2 = 0.0, mass = 0.0;
  cplx charge = 0.0;
  const auto &gamma = spinor::dirac_constants().gamma;
  for_each_point(f, [&](double w, const Spinor &u) {
    const Spinor gu = gamma * u;
    defect2 += w * (gu - u.conjugate()).squaredNorm();
    const double c = beta_density(u);
    chiral2 += w * c * c;
    m.chiral_sup = std::max(m.chiral_sup, std::abs(c));
    mass += w * u.squaredNorm();
    charge += w * spinor::bilinear(gu, u);
  });
  const double identity = 2.0 * mass - 2.0 * charge.real();
  if (std::abs(defect2 - identity) > 1e-10 * mass + 1e-300)
    throw std::logic_error("lm_monitor: defect identity violated (" +
                           std::to_string(defect2) + " vs " +
                           std::to_string(identity) + ")");
  m.defect = std::sqrt(defect2);
  m.chiral_l2 = std::sqrt(chiral2);
  return m;
}

double lm_chain_residual(const Spinor &u) {
  const auto &d = spinor::dirac_constants();
  const Spinor ub = u.conjugate();
  const cplx t0 = spinor::inner(d.beta * u, u);
  const cplx t1 = spinor::inner(d.beta * d.gamma * ub, u);
  const cplx t2 = -spinor::inner(d.gamma * d.beta * ub, u);
  const cplx t3 = -spinor::inner(d.beta * ub, d.gamma * u);
  const cplx t4 = -std::conj(t0);
  return std::max({std::abs(t0 - t1), std::abs(t1 - t2), std::abs(t2 - t3),
                   std::abs(t3 - t4)});
}

//******************************************************************************
std::vector<std::string> DiagnosticsSeries::column_names() const {
  std::vector<std::string> n = {"t",         "mass",         "gamma_re",
                                "gamma_im",  "chiral_sup",   "chiral_l2",
                                "lm_defect", "linf_l2",      "h1",
                                "x_l2t",     "x_sup",        "truncation_loss",
                                "top_shell_fraction"};
  n.insert(n.end(), tracked_names.begin(), tracked_names.end());
  return n;
}

std::vector<double> DiagnosticsSeries::values(std::size_t row) const {
  const DiagnosticsRow &r = rows.at(row);
  std::vector<double> v = {r.t,         r.mass,     r.gamma_re,
                           r.gamma_im,  r.chiral_sup, r.chiral_l2,
                           r.lm_defect, r.linf_l2,  r.h1,
                           r.x_l2t,     r.x_sup,    r.truncation_loss,
                           r.top_shell_fraction};
  v.insert(v.end(), r.tracked.begin(), r.tracked.end());
  return v;
}

DiagnosticsRow DiagnosticsSeries::make_row(const std::vector<double> &v) const {
  if (v.size() != column_names().size())
    throw std::invalid_argument("DiagnosticsSeries: row has the wrong number of columns");
  DiagnosticsRow r;
  double *fields[] = {&r.t,         &r.mass,    &r.gamma_re,        &r.gamma_im,
                      &r.chiral_sup, &r.chiral_l2, &r.lm_defect,    &r.linf_l2,
                      &r.h1,        &r.x_l2t,   &r.x_sup,           &r.truncation_loss,
                      &r.top_shell_fraction};
  std::size_t i = 0;
  for (double *f : fields)
    *f = v[i++];
  r.tracked.assign(v.begin() + static_cast<long>(i), v.end());
  return r;
}

std::vector<double> DiagnosticsSeries::column(const std::string &name) const {
  const auto names = column_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw std::out_of_range("unknown diagnostics column '" + name + "'");
  const std::size_t c = static_cast<std::size_t>(it - names.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.push_back(values(r)[c]);
  return out;
}

DiagnosticsRecorder::DiagnosticsRecorder(double s,
                                         std::vector<norms::MixedNormSpec> tracked,
                                         std::vector<std::string> extra_names)
    : m_s(s), m_tracked(std::move(tracked)), m_extra(extra_names.size()), m_x(s) {
  for (const auto &t : m_tracked) {
    t.validate();
    m_series.tracked_names.push_back(t.name());
  }
  m_series.tracked_names.insert(m_series.tracked_names.end(), extra_names.begin(),
                                extra_names.end());
}

const DiagnosticsRow &DiagnosticsRecorder::record(const evolution::EvolutionState &state,
                                                  const std::vector<double> &extra) {
  if (extra.size() != m_extra)
    throw std::invalid_argument("DiagnosticsRecorder: expected " +
                                std::to_string(m_extra) + " extra values");
  DiagnosticsRow row;
  row.t = state.t;
  const GridField &f = state.field();
  const Conserved c = conserved_quantities(f);
  row.mass = c.mass;
  row.gamma_re = c.gamma_charge.real();
  row.gamma_im = c.gamma_charge.imag();
  const LMMonitor lm = lm_monitor(f);
  row.chiral_sup = lm.chiral_sup;
  row.chiral_l2 = lm.chiral_l2;
  row.lm_defect = lm.defect;
  m_x.add(state.channels, state.t);
  row.linf_l2 = m_x.last_linf_l2();
  row.h1 = m_x.last_h1();
  row.x_l2t = m_x.l2_part();
  row.x_sup = m_x.sup_part();
  row.truncation_loss = state.truncation_loss;
  row.top_shell_fraction = state.top_shell_fraction;
  for (const auto &t : m_tracked)
    row.tracked.push_back(norms::mixed_norm(state.channels, t));
  row.tracked.insert(row.tracked.end(), extra.begin(), extra.end());
  m_series.rows.push_back(std::move(row));
  return m_series.rows.back();
}

void DiagnosticsRecorder::restore(const DiagnosticsSeries &series) {
  if (series.tracked_names != m_series.tracked_names)
    throw std::invalid_argument("DiagnosticsRecorder: tracked norms differ");
  m_x = norms::XNormTracker(m_s);
  for (const auto &r : series.rows)
    m_x.add_values(r.linf_l2, r.h1, r.t);
  m_series = series;
}

//******************************************************************************
std::vector<DuhamelWindow> dyadic_windows(double first, double T) {
  if (!(first > 0.0))
    throw std::invalid_argument("dyadic_windows: first window start must be > 0");
  std::vector<DuhamelWindow> w;
  for (double t1 = first; 2.0 * t1 <= T * (1.0 + 1e-12); t1 *= 2.0)
    w.push_back({t1, 2.0 * t1});
  return w;
}

namespace {

long sample_index(double t, double dt, const char *what) {
  const double x = t / dt;
  const long k = std::lround(x);
  if (std::abs(x - k) > 1e-7 * std::max(1.0, x))
    throw std::invalid_argument(std::string("ScatteringAccumulator: ") + what +
                                " is not a multiple of the sample step");
  return k;
}

} // namespace

ScatteringAccumulator::ScatteringAccumulator(
    std::shared_ptr<const evolution::LinearFlow> flow, ChannelState u0,
    std::vector<DuhamelWindow> windows, double sample_dt, double s,
    double shrink_factor)
    : m_flow(std::move(flow)), m_u0(std::move(u0)), m_windows(std::move(windows)),
      m_dt(sample_dt), m_s(s), m_shrink(shrink_factor), m_full{ChannelState(m_u0.disc)} {
  if (!m_flow)
    throw std::invalid_argument("ScatteringAccumulator: no linear flow");
  if (m_flow->discretization() != m_u0.disc)
    throw std::invalid_argument("ScatteringAccumulator: u0 on another discretization");
  if (!(sample_dt > 0.0))
    throw std::invalid_argument("ScatteringAccumulator: sample_dt must be positive");
  if (!(shrink_factor > 0.0))
    throw std::invalid_argument("ScatteringAccumulator: shrink factor must be positive");
  for (const auto &w : m_windows) {
    if (!(w.t1 >= 0.0 && w.t2 > w.t1))
      throw std::invalid_argument("ScatteringAccumulator: need 0 <= t1 < t2");
    const long k1 = sample_index(w.t1, m_dt, "window start");
    const long k2 = sample_index(w.t2, m_dt, "window end");
    if ((k2 - k1) % 2 != 0)
      throw std::invalid_argument(
          "ScatteringAccumulator: each window needs an even number of sample steps");
    m_slots.push_back(Slot{ChannelState(m_u0.disc), 0, false});
  }
}

ChannelState ScatteringAccumulator::source(const GridField &u) const {
  GridField F(u.disc);
  const auto &beta = spinor::dirac_constants().beta;
  const int N = u.disc->radial().size();
  const int Q = u.disc->sphere().size();
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < Q; ++q) {
      const Spinor v = u.at(i, q);
      F.set(i, q, beta_density(v) * (beta * v));
    }
  return angular::analyze(F);
}

void ScatteringAccumulator::observe(const evolution::EvolutionState &state) {
  observe(state.t, state.field());
}

void ScatteringAccumulator::observe(double t, const GridField &u) {
  const double x = t / m_dt;
  const long k = std::lround(x);
  if (std::abs(x - k) > 1e-7 * std::max(1.0, x) || k <= m_last)
    return;
  if (k != m_last + 1)
    throw std::logic_error("ScatteringAccumulator: missing sample at t = " +
                           std::to_string((m_last + 1) * m_dt));
  if (u.disc != m_u0.disc)
    throw std::invalid_argument("ScatteringAccumulator: field on another discretization");
  const ChannelState F = source(u);
  const double third = m_dt / 3.0;

  // [0, t]
  if (m_full.count > 0)
    m_flow->propagate(m_full.acc, m_dt);
  const double wf = m_full.count == 0 ? 1.0 : (m_full.count % 2 == 1 ? 4.0 : 2.0);
  ChannelState term = F;
  term *= third * wf;
  m_full.acc += term;
  ++m_full.count;
  if ((m_full.count - 1) % 2 == 0) {
    ChannelState closed = m_full.acc;
    if (m_full.count > 1) {
      ChannelState extra = F;
      extra *= third;
      closed -= extra;
    } else {
      closed *= 0.0;
    }
    m_full_even = std::move(closed);
    m_full_even_t = k * m_dt;
  }

  for (std::size_t j = 0; j < m_windows.size(); ++j) {
    Slot &s = m_slots[j];
    const long k1 = std::lround(m_windows[j].t1 / m_dt);
    const long k2 = std::lround(m_windows[j].t2 / m_dt);
    if (s.done || k < k1 || k > k2)
      continue;
    const long m = k - k1;
    if (m > 0)
      m_flow->propagate(s.acc, m_dt);
    const double w = (m == 0 || k == k2) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
    ChannelState tw = F;
    tw *= third * w;
    s.acc += tw;
    ++s.count;
    if (k == k2)
      s.done = true;
  }
  m_last = k;
}

int ScatteringAccumulator::completed_windows() const {
  return static_cast<int>(
      std::count_if(m_slots.begin(), m_slots.end(), [](const Slot &s) { return s.done; }));
}

ScatteringResult ScatteringAccumulator::result() const {
  const int done = completed_windows();
  if (done < 3)
    throw std::runtime_error("insufficient snapshots: " + std::to_string(done) +
                             " completed Duhamel windows, need 3");
  ScatteringResult r{m_u0, 0.0, {}, m_shrink, false, {}};
  for (std::size_t j = 0; j < m_windows.size(); ++j) {
    const Slot &s = m_slots[j];
    if (!s.done)
      continue;
    // measured at the window end: the pulled-back integral would send part of
    // the source out to radius ~2 t2 and through the outer boundary
    const ChannelState &D = s.acc;
    WindowTail tail;
    tail.t1 = m_windows[j].t1;
    tail.t2 = m_windows[j].t2;
    tail.h1 = norms::h1_norm(D);
    tail.lambda_h1 = norms::h1_norm(angular::apply_abs_K_pow(D, m_s));
    tail.samples = s.count;
    r.tails.push_back(tail);
  }

  if (m_full_even) {
    ChannelState D = *m_full_even;
    m_flow->propagate(D, -m_full_even_t);
    D *= -I;
    r.u_plus += D;
    r.t_end = m_full_even_t;
  }

  bool all_zero = true, decreasing = true;
  for (std::size_t j = 0; j < r.tails.size(); ++j) {
    if (r.tails[j].lambda_h1 != 0.0)
      all_zero = false;
    if (j > 0 && !(r.tails[j].lambda_h1 < m_shrink * r.tails[j - 1].lambda_h1))
      decreasing = false;
  }
  if (all_zero) {
    r.cauchy_decreasing = true;
    r.verdict = "vanishing source";
  } else {
    r.cauchy_decreasing = decreasing;
    r.verdict = decreasing ? "Cauchy-decreasing" : "not decreasing";
  }
  return r;
}

void ScatteringAccumulator::restore(long last_sample, std::vector<Slot> slots,
                                    Slot full, std::optional<ChannelState> full_even,
                                    double full_even_t) {
  if (slots.size() != m_windows.size())
    throw std::invalid_argument("ScatteringAccumulator: window count differs");
  m_last = last_sample;
  m_slots = std::move(slots);
  m_full = std::move(full);
  m_full_even = std::move(full_even);
  m_full_even_t = full_even_t;
}

ScatteringResult scattering_profile(const std::vector<GridField> &trajectory,
                                    double sample_dt,
                                    std::shared_ptr<const evolution::LinearFlow> flow,
                                    const std::vector<DuhamelWindow> &windows,
                                    double s, double shrink_factor) {
  if (trajectory.empty())
    throw std::invalid_argument("scattering_profile: empty trajectory");
  ScatteringAccumulator acc(std::move(flow), angular::analyze(trajectory.front()),
                            windows, sample_dt, s, shrink_factor);
  for (std::size_t k = 0; k < trajectory.size(); ++k)
    acc.observe(static_cast<double>(k) * sample_dt, trajectory[k]);
  return acc.result();
}

//******************************************************************************
namespace {

// Flat n^3 box, index i + n (j + n k), axis 0 fastest.
struct Box {
  int n;
  double h;
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t stride(int axis) const {
    return axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(n)
                                      : static_cast<std::size_t>(n) * n);
  }
  int coord(std::size_t idx, int axis) const {
    return static_cast<int>((idx / stride(axis)) % n);
  }
  Vec3 point(std::size_t idx) const {
    const double c = 0.5 * (n - 1);
    return Vec3((coord(idx, 0) - c) * h, (coord(idx, 1) - c) * h, (coord(idx, 2) - c) * h);
  }
};

// 4th-order centred differences; zero within two nodes of the boundary.
template <typename T> std::vector<T> d1(const Box &b, const std::vector<T> &f, int axis) {
  std::vector<T> out(f.size(), T(0));
  const std::size_t s = b.stride(axis);
  const double c = 1.0 / (12.0 * b.h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int x = b.coord(i, axis);
    if (x < 2 || x > b.n - 3)
      continue;
    out[i] = c * (f[i - 2 * s] - 8.0 * f[i - s] + 8.0 * f[i + s] - f[i + 2 * s]);
  }
  return out;
}

template <typename T> std::vector<T> d2(const Box &b, const std::vector<T> &f, int axis) {
  std::vector<T> out(f.size(), T(0));
  const std::size_t s = b.stride(axis);
  const double c = 1.0 / (12.0 * b.h * b.h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int x = b.coord(i, axis);
    if (x < 2 || x > b.n - 3)
      continue;
    out[i] = c * (-f[i - 2 * s] + 16.0 * f[i - s] - 30.0 * f[i] + 16.0 * f[i + s] -
                  f[i + 2 * s]);
  }
  return out;
}

template <typename T> std::vector<T> laplacian(const Box &b, const std::vector<T> &f) {
  std::vector<T> out = d2(b, f, 0);
  for (int a = 1; a < 3; ++a) {
    const auto g = d2(b, f, a);
    for (std::size_t i = 0; i < f.size(); ++i)
      out[i] += g[i];
  }
  return out;
}

} // namespace

MorawetzResult morawetz_residual(const MorawetzSetup &st) {
  if (!st.w || !st.psi || !st.phi)
    throw std::invalid_argument("morawetz_residual: w, psi and phi are required");
  if (st.n < 2 * st.margin + 1 || st.margin < 4 || !(st.h > 0.0))
    throw std::invalid_argument("morawetz_residual: need margin >= 4 and n > 2 margin");
  const Box b{st.n, st.h};
  const std::size_t M = b.size();
  using CV = std::vector<cplx>;
  using RV = std::vector<double>;

  std::array<CV, 4> w;
  for (auto &c : w)
    c.assign(M, 0.0);
  RV psi(M), phi(M), r(M);
  double wmax = 0.0, wedge = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const Vec3 x = b.point(i);
    r[i] = x.norm();
    const Spinor v = st.w(x);
    for (int c = 0; c < 4; ++c)
      w[c][i] = v(c);
    psi[i] = st.psi(r[i]);
    phi[i] = st.phi(r[i]);
    const double a = v.norm();
    wmax = std::max(wmax, a);
    bool inner = true;
    for (int ax = 0; ax < 3; ++ax) {
      const int cx = b.coord(i, ax);
      inner = inner && cx >= st.margin && cx < st.n - st.margin;
    }
    if (!inner)
      wedge = std::max(wedge, a);
  }
  if (wedge > 1e-12 * std::max(wmax, 1e-300))
    throw std::invalid_argument("morawetz_residual: w does not vanish in the margin layer");

  std::array<RV, 3> dpsi, dphi, dlap_psi;
  std::array<std::array<RV, 3>, 3> hpsi;
  for (int j = 0; j < 3; ++j) {
    dpsi[j] = d1(b, psi, j);
    dphi[j] = d1(b, phi, j);
  }
  for (int j = 0; j < 3; ++j) {
    hpsi[j][j] = d2(b, psi, j);
    for (int k = j + 1; k < 3; ++k) {
      hpsi[j][k] = d1(b, dpsi[j], k);
      hpsi[k][j] = hpsi[j][k];
    }
  }
  RV lap_psi(M), lap_phi = laplacian(b, phi);
  for (std::size_t i = 0; i < M; ++i)
    lap_psi[i] = hpsi[0][0][i] + hpsi[1][1][i] + hpsi[2][2][i];
  for (int j = 0; j < 3; ++j)
    dlap_psi[j] = d1(b, lap_psi, j);
  const RV bilap_psi = laplacian(b, lap_psi);

  const cplx c = st.c;
  RV w2(M, 0.0), dw2(M, 0.0), rhs1(M, 0.0);
  CV rhs2(M, 0.0);
  std::array<CV, 3> Q, P;
  for (int j = 0; j < 3; ++j) {
    Q[j].assign(M, 0.0);
    P[j].assign(M, 0.0);
  }
  for (int a = 0; a < 4; ++a) {
    std::array<CV, 3> dw;
    for (int j = 0; j < 3; ++j)
      dw[j] = d1(b, w[a], j);
    const CV lw = laplacian(b, w[a]);
    for (std::size_t i = 0; i < M; ++i) {
      const cplx wi = w[a][i];
      // [Delta, psi] w
      cplx cw = lap_psi[i] * wi;
      for (int j = 0; j < 3; ++j)
        cw += 2.0 * dpsi[j][i] * dw[j][i];
      double grad2 = 0.0;
      cplx grad_psi_dw = 0.0, grad_phi_dw = 0.0;
      double hess = 0.0;
      for (int j = 0; j < 3; ++j) {
        grad2 += std::norm(dw[j][i]);
        grad_psi_dw += dpsi[j][i] * std::conj(dw[j][i]);
        grad_phi_dw += dw[j][i] * dphi[j][i];
        for (int k = 0; k < 3; ++k)
          hess += (dw[j][i] * hpsi[j][k][i] * std::conj(dw[k][i])).real();
        Q[j][i] += dw[j][i] * std::conj(cw);
        P[j][i] += dw[j][i] * std::conj(wi) * phi[i];
      }
      w2[i] += std::norm(wi);
      dw2[i] += grad2;
      rhs1[i] += ((lw[i] - c * wi) * std::conj(cw)).real() + 2.0 * hess -
                 2.0 * c.imag() * (wi * grad_psi_dw).imag();
      rhs2[i] += std::conj(wi) * lw[i] * phi[i] + grad2 * phi[i] +
                 I * (grad_phi_dw * std::conj(wi)).imag();
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    for (int j = 0; j < 3; ++j) {
      Q[j][i] -= 0.5 * dlap_psi[j][i] * w2[i] + dpsi[j][i] * (c * w2[i] + dw2[i]);
      P[j][i] -= 0.5 * dphi[j][i] * w2[i];
    }
    // Re(d_j psi conj(d_j c)) vanishes for constant c
    rhs1[i] -= 0.5 * bilap_psi[i] * w2[i];
    rhs2[i] -= 0.5 * lap_phi[i] * w2[i];
  }
  std::array<CV, 3> dQ, dP;
  for (int j = 0; j < 3; ++j) {
    dQ[j] = d1(b, Q[j], j);
    dP[j] = d1(b, P[j], j);
  }

  MorawetzResult res;
  for (std::size_t i = 0; i < M; ++i) {
    bool inner = true;
    for (int ax = 0; ax < 3; ++ax) {
      const int cx = b.coord(i, ax);
      inner = inner && cx >= st.margin && cx < st.n - st.margin;
    }
    if (!inner)
      continue;
    const double e1 = std::abs((dQ[0][i] + dQ[1][i] + dQ[2][i]).real() - rhs1[i]);
    const double e2 = std::abs(dP[0][i] + dP[1][i] + dP[2][i] - rhs2[i]);
    res.res1 = std::max(res.res1, e1);
    res.res2 = std::max(res.res2, e2);
    res.scale1 = std::max(res.scale1, std::abs(rhs1[i]));
    res.scale2 = std::max(res.scale2, std::abs(rhs2[i]));
    if (st.kink_radius) {
      const bool near = std::abs(r[i] - *st.kink_radius) <= st.kink_band;
      (near ? res.res1_near_kink : res.res1_away) =
          std::max(near ? res.res1_near_kink : res.res1_away, e1);
      (near ? res.res2_near_kink : res.res2_away) =
          std::max(near ? res.res2_near_kink : res.res2_away, e2);
    }
  }
  return res;
}

//******************************************************************************
namespace {

struct GslFn {
  const std::function<double(double)> *f;
  static double call(double x, void *p) { return (*static_cast<GslFn *>(p)->f)(x); }
};

double integrate_half_line(const std::function<double(double)> &f) {
  gsl_error_handler_t *old = gsl_set_error_handler_off();
  gsl_integration_workspace *ws = gsl_integration_workspace_alloc(2000);
  GslFn ctx{&f};
  gsl_function F{&GslFn::call, &ctx};
  double a = 0.0, b = 0.0, err = 0.0;
  const int s1 = gsl_integration_qags(&F, 0.0, 1.0, 0.0, 1e-11, 2000, ws, &a, &err);
  const int s2 = gsl_integration_qagiu(&F, 1.0, 0.0, 1e-11, 2000, ws, &b, &err);
  gsl_integration_workspace_free(ws);
  gsl_set_error_handler(old);
  // roundoff-limited status codes still return the best estimate
  const auto fatal = [](int s) {
    return s != GSL_SUCCESS && s != GSL_EROUND && s != GSL_ETOL;
  };
  if (fatal(s1) || fatal(s2) || !std::isfinite(a + b))
    throw std::runtime_error(std::string("hardy_check: quadrature failed: ") +
                             gsl_strerror(fatal(s1) ? s1 : s2));
  return a + b;
}

} // namespace

HardyResult hardy_check(const std::function<double(double)> &w,
                        const std::function<double(double)> &dw, double sigma) {
  if (!(sigma > -1.0))
    throw std::invalid_argument("hardy_check: sigma must exceed -1");
  HardyResult h;
  h.proof_constant = 2.0 / (sigma + 1.0);
  h.sharp_constant = 1.0 / (sigma + 1.0);
  // |x|^(2 sigma - 1) w^2 r^2 dr and |x|^(2 sigma + 1) w'^2 r^2 dr
  h.lhs = std::sqrt(4.0 * pi * integrate_half_line([&](double r) {
                      const double v = w(r);
                      return r == 0.0 ? 0.0 : std::pow(r, 2.0 * sigma + 1.0) * v * v;
                    }));
  h.rhs = std::sqrt(4.0 * pi * integrate_half_line([&](double r) {
                      const double v = dw(r);
                      return r == 0.0 ? 0.0 : std::pow(r, 2.0 * sigma + 3.0) * v * v;
                    }));
  if (!(h.rhs > 0.0))
    throw std::invalid_argument("hardy_check: w' vanishes identically");
  h.ratio = h.lhs / h.rhs;
  return h;
}

HardyResult hardy_check(const std::function<double(double)> &w, double sigma) {
  const auto dw = [&w](double r) {
    const double e = std::min(1e-3 * std::max(1.0, r), 0.25 * r);
    return (w(r - 2 * e) - 8.0 * w(r - e) + 8.0 * w(r + e) - w(r + 2 * e)) / (12.0 * e);
  };
  return hardy_check(w, dw, sigma);
}

//******************************************************************************
ProbeResult spectrum_probe(const potentials::PotentialSpec &spec,
                           const RadialGrid &grid, int two_j_max, double tol) {
  if (!(tol >= 0.0))
    throw std::invalid_argument("spectrum_probe: tol must be >= 0");
  const evolution::GeneratorSplit split = evolution::split_for_generator(spec);
  ProbeResult out;
  // radial multiples of the identity are channel-diagonal as well
  std::vector<potentials::MatrixTerm> scalar_terms;
  bool coupled = static_cast<bool>(split.pointwise.V0_field);
  for (const auto &t : split.pointwise.V0_terms) {
    const cplx a = t.matrix(0, 0);
    if (std::abs(a.imag()) == 0.0 &&
        spinor::max_entry(t.matrix - a.real() * SpinorMatrix::Identity()) == 0.0)
      scalar_terms.push_back(t);
    else
      coupled = true;
  }
  if (coupled)
    out.notes.push_back(
        "V0 has parts that couple channels; they are not in the probed operator");
  out.min_abs_eigenvalue = std::numeric_limits<double>::infinity();
  std::set<int> seen;
  for (const auto &c : angular::channels_up_to(two_j_max)) {
    if (!seen.insert(c.k).second)
      continue;
    Eigen::MatrixXd H = radial::ChannelGenerator::assemble(c.k, split.A0, grid).matrix();
    const int N = grid.size();
    for (const auto &t : scalar_terms)
      for (int i = 0; i < N; ++i) {
        const double v = t.matrix(0, 0).real() * t.profile(grid.r(i));
        H(i, i) += v;
        H(N + i, N + i) += v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("spectrum_probe: eigensolver did not converge");
    ProbeHit hit{c.k, c.two_j, {}};
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double l = es.eigenvalues()(i);
      out.min_abs_eigenvalue = std::min(out.min_abs_eigenvalue, std::abs(l));
      if (std::abs(l) < tol)
        hit.eigenvalues.push_back(l);
    }
    if (!hit.eigenvalues.empty())
      out.hits.push_back(std::move(hit));
  }
  return out;
}

} // namespace diraclab::diagnostics
