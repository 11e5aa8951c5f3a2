#pragma once

#include "diraclab/grids.hpp"
#include "diraclab/types.hpp"

#include <array>
#include <compare>
#include <memory>
#include <string>
#include <vector>

namespace diraclab::angular {

// Y_l^m with the Condon-Shortley phase, orthonormal on S^2.
cplx sph_harm(int l, int m, double theta, double phi);
cplx sph_harm(int l, int m, const Vec3 &omega);

//******************************************************************************
// Partial-wave label (j, m_j, k_j). Half-integers are stored doubled so that
// keys stay integral: two_j = 2j, two_m = 2 m_j, and k = +-(j + 1/2).
struct ChannelIndex {
  int two_j = 1;
  int two_m = 1;
  int k = -1;

  // Throws std::invalid_argument unless j is a positive half-integer,
  // |m_j| <= j with m_j - 1/2 integral, and |k| = j + 1/2.
  static ChannelIndex make(int two_j, int two_m, int k);

  double j() const { return 0.5 * two_j; }
  double m() const { return 0.5 * two_m; }
  // Harmonic degree carried by Phi+ (upper components) and Phi- (lower).
  int l_plus() const { return k > 0 ? k : -k - 1; }
  int l_minus() const { return k > 0 ? k - 1 : -k; }

  std::string str() const;

  auto operator<=>(const ChannelIndex &) const = default;
};

// All channels with j <= two_j_max/2, ordered by j, then k (negative first),
// then m_j, so that channels sharing a radial generator are contiguous.
std::vector<ChannelIndex> channels_up_to(int two_j_max);

enum class Sign { plus, minus };

// Phi^+-_{m_j,k_j}(omega); Phi+ lives in the upper two components, Phi- in
// the lower two.
Spinor phi_basis(const ChannelIndex &c, Sign sign, const Vec3 &omega);

//******************************************************************************
// Scalar spherical-harmonic transform on a quadrature, band l <= L.
// Coefficients are indexed l*l + l + m.
class SphereHarmonics {
public:
  SphereHarmonics(const AngularQuadrature &quad, int band);

  int band() const { return m_band; }
  int n_coeffs() const { return (m_band + 1) * (m_band + 1); }
  static int index(int l, int m) { return l * l + l + m; }
  static int degree_of(int idx);

  // rows are independent functions: (n x Q) -> (n x n_coeffs)
  Eigen::MatrixXcd analyze(const Eigen::MatrixXcd &values) const;
  Eigen::MatrixXcd synthesize(const Eigen::MatrixXcd &coeffs) const;

  // Coefficient-space matrix of L_j = -i (x ^ grad)_j, j = 0,1,2.
  const Eigen::MatrixXcd &angular_momentum(int j) const { return m_L[j]; }

  const Eigen::MatrixXcd &synthesis_matrix() const { return m_synth; }
  const Eigen::MatrixXcd &analysis_matrix() const { return m_analysis; }

private:
  int m_band;
  Eigen::MatrixXcd m_synth;    // n_coeffs x Q
  Eigen::MatrixXcd m_analysis; // Q x n_coeffs
  std::array<Eigen::MatrixXcd, 3> m_L;
};

//******************************************************************************
// Radial grid, angular quadrature and channel truncation shared by every
// field and channel state. Immutable once built; pass around by shared_ptr.
class Discretization {
public:
  // angular_degree < 0 picks 2 * (j_max + 1/2).
  Discretization(RadialGrid radial, int two_j_max, int angular_degree = -1);

  const RadialGrid &radial() const { return m_radial; }
  const AngularQuadrature &sphere() const { return m_quad; }
  const SphereHarmonics &harmonics() const { return m_harm; }
  int two_j_max() const { return m_two_j_max; }

  const std::vector<ChannelIndex> &channels() const { return m_channels; }
  int n_channels() const { return static_cast<int>(m_channels.size()); }
  // -1 if the channel is outside the truncation
  int position(const ChannelIndex &c) const;

  struct KBlock {
    int k;
    int two_j;
    int first;
    int count;
  };
  const std::vector<KBlock> &k_blocks() const { return m_blocks; }

  // Phi values per component: (n_channels x Q); comps 0,1 come from Phi+ and
  // comps 2,3 from Phi-.
  const Eigen::MatrixXcd &synthesis_table(int comp) const {
    return m_synth[comp];
  }
  // Q x n_channels, quadrature weights times conj(Phi)
  const Eigen::MatrixXcd &analysis_table(int comp) const {
    return m_analysis[comp];
  }

  Vec3 point(int i, int q) const {
    return m_radial.r(i) * m_quad.node(q);
  }

private:
  RadialGrid m_radial;
  int m_two_j_max;
  AngularQuadrature m_quad;
  SphereHarmonics m_harm;
  std::vector<ChannelIndex> m_channels;
  std::vector<KBlock> m_blocks;
  std::array<Eigen::MatrixXcd, 4> m_synth;
  std::array<Eigen::MatrixXcd, 4> m_analysis;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

DiscretizationPtr make_discretization(int n_radial, double outer_radius,
                                      int two_j_max, int angular_degree = -1);

//******************************************************************************
// u(r_i, omega_q) in C^4, one (N x Q) matrix per spinor component.
struct GridField {
  DiscretizationPtr disc;
  std::array<Eigen::MatrixXcd, 4> comp;

  explicit GridField(DiscretizationPtr d);

  Spinor at(int i, int q) const {
    return Spinor{comp[0](i, q), comp[1](i, q), comp[2](i, q), comp[3](i, q)};
  }
  void set(int i, int q, const Spinor &u) {
    for (int c = 0; c < 4; ++c)
      comp[c](i, q) = u(c);
  }

  // weights r_i^2 h w_q
  double l2_norm_squared() const;
  double l2_norm() const;
  double max_abs() const;

  GridField &operator+=(const GridField &o);
  GridField &operator-=(const GridField &o);
  GridField &operator*=(cplx a);
};

GridField operator+(GridField a, const GridField &b);
GridField operator-(GridField a, const GridField &b);
GridField operator*(cplx a, GridField f);

// Samples u(x) at every grid point.
template <typename Fn> GridField sample(DiscretizationPtr d, Fn &&u) {
  GridField f(d);
  const int N = d->radial().size();
  const int Q = d->sphere().size();
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < Q; ++q)
      f.set(i, q, u(d->point(i, q)));
  return f;
}

//******************************************************************************
// Partial-wave coefficients psi+-(r_i) per channel; column n belongs to
// disc->channels()[n]. The field is sum (1/r) psi+ Phi+ + (1/r) psi- Phi-.
struct ChannelState {
  DiscretizationPtr disc;
  Eigen::MatrixXcd plus;
  Eigen::MatrixXcd minus;

  explicit ChannelState(DiscretizationPtr d);

  // (h sum |psi+|^2 + |psi-|^2)^(1/2)
  double l2_norm_squared() const;
  double l2_norm() const;

  // Norm carried by channels with j >= two_j_min/2.
  double l2_norm_squared_from(int two_j_min) const;

  // Field value at an arbitrary point, by 4-point Lagrange interpolation of
  // psi in r (parity extension through the origin, zero beyond R).
  Spinor evaluate(const Vec3 &x) const;

  ChannelState &operator+=(const ChannelState &o);
  ChannelState &operator-=(const ChannelState &o);
  ChannelState &operator*=(cplx a);
};

ChannelState operator+(ChannelState a, const ChannelState &b);
ChannelState operator-(ChannelState a, const ChannelState &b);
ChannelState operator*(cplx a, ChannelState s);

// psi+-(r) = r <f(r .), Phi+->_{L^2(S^2)} by quadrature. Content beyond the
// channel truncation is dropped (orthogonal projection in the grid norm).
ChannelState analyze(const GridField &f);
GridField synthesize(const ChannelState &s);

// Channel-diagonal multipliers: K -> -k_j, |K|^s -> |k_j|^s.
ChannelState apply_K(const ChannelState &s);
ChannelState apply_abs_K_pow(const ChannelState &s, double sigma);

// Dirac operator in the partial-wave representation:
//   Phi+ slot: -d psi-/dr + (k/r) psi-
//   Phi- slot:  d psi+/dr + (k/r) psi+
// with 4th-order centred differences and one-sided closures at both ends.
ChannelState apply_dirac_channel(const ChannelState &s);

// 4th-order first derivative of each column on the radial grid.
Eigen::MatrixXcd radial_derivative(const RadialGrid &g,
                                   const Eigen::MatrixXcd &psi);

// Lambda^s = (1 - Delta_S2)^(s/2) applied componentwise through scalar
// harmonics l <= L.
GridField lambda_s_scalar(const GridField &f, double s);

// Spin-orbit operator K = beta (2 S.L + 1) applied as a differential operator
// on the sphere (spectral L). Independent of the Phi basis.
GridField spin_orbit_K(const GridField &f);

// Sphere-level versions: values are (Q x 4), one column per spinor component.
Eigen::MatrixXcd spin_orbit_K_sphere(const SphereHarmonics &sh,
                                     const Eigen::MatrixXcd &values);
Eigen::MatrixXcd lambda_s_sphere(const SphereHarmonics &sh,
                                 const Eigen::MatrixXcd &values, double s);
// L^2(S^2) norm of (Q x n) values, summed over columns.
double sphere_l2(const AngularQuadrature &quad, const Eigen::MatrixXcd &values);

} // namespace diraclab::angular
