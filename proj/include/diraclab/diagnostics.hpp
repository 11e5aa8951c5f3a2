#pragma once

#include "diraclab/evolution.hpp"
#include "diraclab/norms.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace diraclab::diagnostics {

using angular::ChannelState;
using angular::GridField;

//******************************************************************************
struct Conserved {
  double mass = 0.0;      // integral |u|^2
  cplx gamma_charge = 0.0; // integral sum_i (gamma u)_i u_i
};

Conserved conserved_quantities(const GridField &f);

struct LMMonitor {
  double defect = 0.0;     // || gamma u - conj(u) ||_{L^2}
  double chiral_sup = 0.0; // grid max of |<beta u, u>|
  double chiral_l2 = 0.0;  // || <beta u, u> ||_{L^2}
};

// Also checks |gamma u - conj(u)|^2 = 2|u|^2 - 2 Re (gamma u, conj(u))
// integrated over the grid, to 1e-10 relative to the mass; throws
// std::logic_error if it fails.
LMMonitor lm_monitor(const GridField &f);

// The chain behind the vanishing of <beta u, u> for gamma u = conj(u):
//   <beta u,u> = (beta gamma ubar, u) = -(gamma beta ubar, u)
//              = -(beta ubar, gamma u) = -conj(<beta u,u>)
// Returns the largest difference between consecutive links; the first and
// last links use u in E, the middle ones only the algebra.
double lm_chain_residual(const Spinor &u);

//******************************************************************************
struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double gamma_re = 0.0;
  double gamma_im = 0.0;
  double chiral_sup = 0.0;
  double chiral_l2 = 0.0;
  double lm_defect = 0.0;
  double linf_l2 = 0.0;  // || Lambda^s u(t) ||_{L^inf_|x| L^2_omega}
  double h1 = 0.0;       // || Lambda^s u(t) ||_{H^1}
  double x_l2t = 0.0;    // L^2_t part of the X norm on [0, t]
  double x_sup = 0.0;    // L^inf_t part of the X norm on [0, t]
  double truncation_loss = 0.0;
  double top_shell_fraction = 0.0;
  std::vector<double> tracked; // tracked MixedNormSpecs, then extra columns
};

struct DiagnosticsSeries {
  std::vector<std::string> tracked_names;
  std::vector<DiagnosticsRow> rows;

  std::vector<std::string> column_names() const;
  std::vector<double> values(std::size_t row) const;
  // Inverse of values().
  DiagnosticsRow make_row(const std::vector<double> &values) const;
  // Column by name; throws std::out_of_range on an unknown name.
  std::vector<double> column(const std::string &name) const;
};

class DiagnosticsRecorder {
public:
  // Extra columns hold values supplied by the caller at every record().
  explicit DiagnosticsRecorder(double s,
                               std::vector<norms::MixedNormSpec> tracked = {},
                               std::vector<std::string> extra_names = {});

  const DiagnosticsRow &record(const evolution::EvolutionState &state,
                               const std::vector<double> &extra = {});
  // Continue from rows written earlier (resume).
  void restore(const DiagnosticsSeries &series);

  const DiagnosticsSeries &series() const { return m_series; }
  double s() const { return m_s; }

private:
  double m_s;
  std::vector<norms::MixedNormSpec> m_tracked;
  std::size_t m_extra;
  norms::XNormTracker m_x;
  DiagnosticsSeries m_series;
};

//******************************************************************************
// Duhamel windows of
//   u+ = u0 - i int_0^inf exp(-i t (D+V)) F(u(t)) dt,  F(u) = <beta u,u> beta u
// accumulated online with composite Simpson over samples t_k = k dt_sample:
//   S(t_k) = exp(i dt_sample (D+V)) S(t_(k-1)) + w_k F(t_k),
// so that a window [T1, T2] is exp(-i T2 (D+V)) S(T2).
struct DuhamelWindow {
  double t1 = 0.0;
  double t2 = 0.0;
};

struct WindowTail {
  double t1 = 0.0;
  double t2 = 0.0;
  // || int_T1^T2 exp(i (T2 - t') H) F(t') dt' ||_{H^1}, the window's share of
  // u(T2) - exp(i (T2 - T1) H) u(T1)
  double h1 = 0.0;
  double lambda_h1 = 0.0; // same with |K|^s applied; the verdict uses this one
  int samples = 0;
};

struct ScatteringResult {
  // u0 - i int_0^t_end exp(-i t' H) F dt'; pulling back to t = 0 needs
  // R >= 2 t_end plus the support radius to stay clear of the outer boundary
  ChannelState u_plus;
  double t_end = 0.0; // Duhamel integral taken over [0, t_end]
  std::vector<WindowTail> tails;
  double shrink_factor = 1.0;
  bool cauchy_decreasing = false;
  std::string verdict;
};

// Windows [T1, 2 T1] for T1 = first, 2 first, ... while 2 T1 <= T.
std::vector<DuhamelWindow> dyadic_windows(double first, double T);

class ScatteringAccumulator {
public:
  // Window ends must be multiples of 2 sample_dt.
  ScatteringAccumulator(std::shared_ptr<const evolution::LinearFlow> flow,
                        ChannelState u0, std::vector<DuhamelWindow> windows,
                        double sample_dt, double s, double shrink_factor = 1.0);

  double sample_dt() const { return m_dt; }
  // Call with states at t = k sample_dt, k = 0, 1, 2, ... in order. Other
  // times are ignored; a skipped sample throws std::logic_error.
  void observe(const evolution::EvolutionState &state);
  void observe(double t, const GridField &u);

  int completed_windows() const;
  // Throws std::runtime_error with fewer than 3 completed windows.
  ScatteringResult result() const;

  // Snapshot support: raw accumulator state.
  struct Slot {
    ChannelState acc;
    int count = 0;
    bool done = false;
  };
  long last_sample() const { return m_last; }
  const std::vector<Slot> &slots() const { return m_slots; }
  const Slot &full() const { return m_full; }
  const std::optional<ChannelState> &full_even() const { return m_full_even; }
  double full_even_time() const { return m_full_even_t; }
  void restore(long last_sample, std::vector<Slot> slots, Slot full,
               std::optional<ChannelState> full_even, double full_even_t);

private:
  ChannelState source(const GridField &u) const;

  std::shared_ptr<const evolution::LinearFlow> m_flow;
  ChannelState m_u0;
  std::vector<DuhamelWindow> m_windows;
  double m_dt;
  double m_s;
  double m_shrink;
  long m_last = -1;
  std::vector<Slot> m_slots; // one per window
  Slot m_full;               // [0, t]
  std::optional<ChannelState> m_full_even; // Simpson-closed copy at even count
  double m_full_even_t = 0.0;
};

// Post-processing of a stored trajectory given as fields at t_k = k dt.
ScatteringResult scattering_profile(const std::vector<GridField> &trajectory,
                                    double sample_dt,
                                    std::shared_ptr<const evolution::LinearFlow> flow,
                                    const std::vector<DuhamelWindow> &windows,
                                    double s, double shrink_factor = 1.0);

//******************************************************************************
// Morawetz identities with A = 0, B = 0 on a Cartesian box of n^3 points with
// spacing h centred at the origin, every derivative a 4th-order centred
// difference. For a spinor w (components summed), radial weights psi, phi and
// a constant c:
//   res1 = max | Re d_j Q_j - RHS1 |,  res2 = max | d_j P_j - RHS2 |
// over the points at least `margin` nodes from the boundary.
struct MorawetzSetup {
  std::function<Spinor(const Vec3 &)> w;
  std::function<double(double)> psi;
  std::function<double(double)> phi;
  cplx c = 0.0;
  int n = 64;
  double h = 1.0 / 16;
  int margin = 8;
  // Optional radius of a weight kink; residuals are then also split into the
  // band |r - kink| <= kink_band and the rest.
  std::optional<double> kink_radius;
  double kink_band = 0.25;
};

struct MorawetzResult {
  double res1 = 0.0;
  double res2 = 0.0;
  double res1_near_kink = 0.0, res1_away = 0.0;
  double res2_near_kink = 0.0, res2_away = 0.0;
  double scale1 = 0.0; // max |RHS1|
  double scale2 = 0.0; // max |RHS2|
};

// Throws std::invalid_argument when w is not negligible in the margin layer.
MorawetzResult morawetz_residual(const MorawetzSetup &setup);

//******************************************************************************
// ratio = || |x|^(sigma-1/2) w ||_{L^2} / || |x|^(sigma+1/2) dw/dr ||_{L^2}
// for radial w on R^3. The proof constant is 2/(sigma+1); the identity behind
// it gives 1/(sigma+1).
struct HardyResult {
  double ratio = 0.0;
  double proof_constant = 0.0;
  double sharp_constant = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool within(double tol = 1e-3) const { return ratio <= proof_constant + tol; }
};

// Throws std::invalid_argument for sigma <= -1.
HardyResult hardy_check(const std::function<double(double)> &w,
                        const std::function<double(double)> &dw, double sigma);
// Derivative by centred differences.
HardyResult hardy_check(const std::function<double(double)> &w, double sigma);

//******************************************************************************
struct ProbeHit {
  int k = 0;
  int two_j = 0;
  std::vector<double> eigenvalues; // |lambda| < tol
};

struct ProbeResult {
  std::vector<ProbeHit> hits;
  std::vector<std::string> notes;
  double min_abs_eigenvalue = 0.0; // over all blocks
};

// Near-zero eigenvalues of the assembled channel generators of D + A0 beta
// plus the radial multiples of beta and of the identity in V0. Other parts of
// V0 couple channels and are not included; a note says so.
ProbeResult spectrum_probe(const potentials::PotentialSpec &spec,
                           const RadialGrid &grid, int two_j_max, double tol);

} // namespace diraclab::diagnostics
