#include "diraclab/grids.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace diraclab {

RadialGrid::RadialGrid(int n_points, double outer_radius)
    : m_n(n_points), m_h(outer_radius / n_points) {
  if (n_points < 2)
    throw std::invalid_argument("RadialGrid: need at least 2 points");
  if (!(outer_radius > 0.0) || !std::isfinite(outer_radius))
    throw std::invalid_argument("RadialGrid: outer radius must be positive");
  m_r.resize(m_n);
  for (int i = 0; i < m_n; ++i)
    m_r[i] = r(i);
}

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be positive");
  std::unique_ptr<gsl_integration_glfixed_table,
                  decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(n),
            &gsl_integration_glfixed_table_free);
  if (!table)
    throw std::runtime_error("gauss_legendre: table allocation failed");
  GaussLegendre out;
  out.x.resize(n);
  out.w.resize(n);
  for (int i = 0; i < n; ++i)
    gsl_integration_glfixed_point(a, b, i, &out.x[i], &out.w[i], table.get());
  return out;
}

AngularQuadrature::AngularQuadrature(int max_degree) : m_L(max_degree) {
  if (max_degree < 0)
    throw std::invalid_argument("AngularQuadrature: negative degree");
  const auto gl = gauss_legendre(n_theta());
  const int nphi = n_phi();
  const double dphi = 2.0 * pi / nphi;
  m_nodes.reserve(n_theta() * nphi);
  for (int it = 0; it < n_theta(); ++it) {
    const double ct = gl.x[it];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double th = std::acos(ct);
    for (int ip = 0; ip < nphi; ++ip) {
      const double ph = ip * dphi;
      m_nodes.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
      m_theta.push_back(th);
      m_phi.push_back(ph);
      m_w.push_back(gl.w[it] * dphi);
    }
  }
}

} // namespace diraclab
