#pragma once

#include "diraclab/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace diraclab::potentials {

//******************************************************************************
// Scalar radial profile f(r). Built-in shapes:
//   constant     amp
//   gaussian     amp exp(-(r/scale)^2)
//   exponential  amp exp(-r/scale)
//   power        amp (1 + (r/scale)^2)^(-p)
//   tabulated    natural cubic spline through (r_k, f_k), zero past the last
//                node and constant below the first
class RadialProfile {
public:
  enum class Kind { zero, constant, gaussian, exponential, power, tabulated, custom };

  RadialProfile() = default;

  static RadialProfile zero() { return {}; }
  static RadialProfile constant(double amp);
  static RadialProfile gaussian(double amp, double scale);
  static RadialProfile exponential(double amp, double scale);
  static RadialProfile power(double amp, double p, double scale = 1.0);
  static RadialProfile tabulated(std::vector<double> r, std::vector<double> f);
  static RadialProfile custom(std::function<double(double)> f);

  double operator()(double r) const;

  Kind kind() const { return m_kind; }
  double amplitude() const { return m_amp; }
  double scale() const { return m_scale; }
  double exponent() const { return m_p; }
  const std::vector<double> &table_r() const { return m_tr; }
  const std::vector<double> &table_f() const { return m_tf; }
  bool is_zero() const;

  RadialProfile scaled(double c) const;

private:
  Kind m_kind = Kind::zero;
  double m_amp = 0.0;
  double m_scale = 1.0;
  double m_p = 0.0;
  double m_factor = 1.0;
  std::vector<double> m_tr, m_tf;
  std::shared_ptr<void> m_spline; // immutable gsl_spline
  std::function<double(double)> m_fn;
};

// f(|x|) M with a constant 4x4 matrix M.
struct MatrixTerm {
  RadialProfile profile;
  SpinorMatrix matrix;
};

//******************************************************************************
// V = A0(|x|) beta + V0(x) with A = 0. V0 is a sum of radial-times-constant
// terms plus an optional arbitrary field.
struct PotentialSpec {
  RadialProfile A0;
  std::vector<MatrixTerm> V0_terms;
  std::function<SpinorMatrix(const Vec3 &)> V0_field;
  // Declared by whoever supplies V0_field; checked at samples.
  bool V0_field_in_class_V = false;
  // Smallness parameter used as the threshold of the first-order checks.
  double sigma = 1.0;

  bool is_zero() const;
  bool is_V0_zero() const;
  bool is_V0_radial() const;
  bool is_V0_in_class_V() const;

  PotentialSpec scaled(double c) const;
};

// A0(|x|) beta + V0(x). Throws std::domain_error at x = 0.
SpinorMatrix evaluate(const PotentialSpec &spec, const Vec3 &x);
// V0(x) alone.
SpinorMatrix evaluate_V0(const PotentialSpec &spec, const Vec3 &x);
// -i sum_j alpha_j d_j M by 4th-order centred differences of each entry.
SpinorMatrix dirac_of(const std::function<SpinorMatrix(const Vec3 &)> &M,
                      const Vec3 &x);

// Operator 2-norm.
double matrix_norm(const SpinorMatrix &M);

//******************************************************************************
// Radial weights rho of the smoothing estimates.
//   constant      rho = c
//   power_split   rho = |x|^eps for |x| <= 1, |x|^-eps for |x| >= 1
//   log           rho = <log |x|>^-nu with <y> = (1 + y^2)^(1/2)
struct WeightSpec {
  enum class Kind { constant, power_split, log };
  Kind kind = Kind::constant;
  double param = 1.0; // c, eps or nu

  static WeightSpec constant(double c = 1.0) { return {Kind::constant, c}; }
  static WeightSpec power_split(double eps) { return {Kind::power_split, eps}; }
  static WeightSpec log(double nu) { return {Kind::log, nu}; }

  double rho(double r) const;
  // rho^-2 |x|, the weight that must lie in A2
  double a2_weight(double r) const { return r / (rho(r) * rho(r)); }
  std::string name() const;
};

//******************************************************************************
struct Quantity {
  std::string name;
  double value = 0.0;
  std::optional<double> threshold; // pass iff value < threshold
  bool pass() const;
};

struct AssumptionReport {
  std::vector<Quantity> quantities;
  std::vector<std::string> notes;
  int shell_min = 0;
  int shell_max = 0;
  int radii_per_shell = 0;
  int angular_degree = 0;
  double delta = 0.0;

  const Quantity &get(const std::string &name) const;
  double value(const std::string &name) const { return get(name).value; }
  bool all_pass() const;
};

struct ShellOptions {
  int shell_min = -4; // shells 2^j <= |x| < 2^(j+1), j = shell_min..shell_max
  int shell_max = 4;
  int radii_per_shell = 32;
  int angular_degree = 10;
  double delta = 0.5;
};

// Dyadic-shell suprema of the Condition (V) quantities. Names:
//   "|x|V0 l1Linf"                    sum_j sup |x| |V0|        (< sigma)
//   "sup |x|^(2+delta)(|V|^2+|DV|)"   and its two parts "... |V|^2", "... |DV|"
//   "|x|^2(|V|^2+|DV|+|DV0|) l1Linf"  and its parts "|x|^2|V|^2 l1Linf",
//                                     "|x|^2|DV| l1Linf", "|x|^2|DV0| l1Linf"
//   "|x||B| l1Linf"                   identically 0 (A = 0)
// Throws std::runtime_error on non-finite samples.
AssumptionReport check_condition_V(const PotentialSpec &spec,
                                   const ShellOptions &opt = {});

// The angular regularity assumptions for 1 < s <= 2 and weight rho:
//   "sup rho^-2|x| |Lambda^s V0|_L2w"      (< sigma)
//   "sup rho^-2|x| |Lambda^s dV|_L2w"
//   "sup rho^-2|x| |x^dA0|_Linfw + rho^-2<x> |Delta_S A0|_Linfw"
// Lambda^s acts through scalar harmonics l <= angular_degree on each entry.
AssumptionReport check_angular_assumptions(const PotentialSpec &spec, double s,
                                           const WeightSpec &w,
                                           const ShellOptions &opt = {});

//******************************************************************************
struct A2Family {
  int center_min = -6; // centers 0 and 2^a e_z, a in [center_min, center_max]
  int center_max = 6;
  int radius_min = -6; // radii 2^b, b in [radius_min, radius_max]
  int radius_max = 6;
  int nodes = 64; // Gauss-Legendre nodes per ball coordinate
};

struct A2Result {
  double ratio = 0.0; // sup over the family of avg(w) avg(1/w)
  double worst_center = 0.0;
  double worst_radius = 0.0;
  int balls = 0;
};

A2Result check_A2(const std::function<double(double)> &w, const A2Family &fam = {});
A2Result check_A2(const WeightSpec &w, const A2Family &fam = {});

struct L2LinfResult {
  double in_range = 0.0;   // (sum over sampled shells of sup rho^2)^(1/2)
  double tail_bound = 0.0; // integral bound on the shells outside the range
  double total_bound = 0.0;
  int shell_min = 0;
  int shell_max = 0;
};

L2LinfResult rho_l2_linf(const WeightSpec &w, int shell_min = -20,
                         int shell_max = 20);

} // namespace diraclab::potentials
