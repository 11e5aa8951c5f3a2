#pragma once

#include "diraclab/types.hpp"

#include <vector>

namespace diraclab {

//******************************************************************************
// Cell-centred radial grid r_i = (i + 1/2) h, i = 0..N-1, covering (0, R]
// with R = N h. The origin is never a grid point.
class RadialGrid {
public:
  RadialGrid(int n_points, double outer_radius);

  int size() const { return m_n; }
  double h() const { return m_h; }
  double R() const { return m_n * m_h; }
  double r(int i) const { return (i + 0.5) * m_h; }
  const std::vector<double> &r() const { return m_r; }

  bool operator==(const RadialGrid &other) const = default;

private:
  int m_n;
  double m_h;
  std::vector<double> m_r;
};

// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};
GaussLegendre gauss_legendre(int n, double a = -1.0, double b = 1.0);

//******************************************************************************
// Product quadrature on S^2: Gauss-Legendre in cos(theta) with L+1 nodes times
// 2L+2 uniform azimuths. Exact for polynomials of degree <= 2L+1, so the
// products Y_l^m conj(Y_l'^m') with l, l' <= L integrate exactly.
class AngularQuadrature {
public:
  explicit AngularQuadrature(int max_degree);

  int degree() const { return m_L; }
  int size() const { return static_cast<int>(m_w.size()); }
  int n_theta() const { return m_L + 1; }
  int n_phi() const { return 2 * m_L + 2; }

  const Vec3 &node(int q) const { return m_nodes[q]; }
  double theta(int q) const { return m_theta[q]; }
  double phi(int q) const { return m_phi[q]; }
  double weight(int q) const { return m_w[q]; }
  const std::vector<double> &weights() const { return m_w; }

private:
  int m_L;
  std::vector<Vec3> m_nodes;
  std::vector<double> m_theta;
  std::vector<double> m_phi;
  std::vector<double> m_w;
};

} // namespace diraclab
