#include "diraclab/radial_evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace diraclab::radial {

ChannelGenerator ChannelGenerator::assemble(int k,
                                            const potentials::RadialProfile &A0,
                                            const RadialGrid &grid) {
  if (k == 0)
    throw std::invalid_argument("ChannelGenerator: k must be nonzero");
  const int N = grid.size();
  const double h = grid.h();
  const int l_plus = k > 0 ? k : -k - 1;
  const double parity = (l_plus + 1) % 2 == 0 ? 1.0 : -1.0;

  Eigen::MatrixXd Dp = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    if (i + 1 < N)
      Dp(i, i + 1) = 0.5 / h;
    if (i > 0)
      Dp(i, i - 1) = -0.5 / h;
  }
  Dp(0, 0) = -parity * 0.5 / h;

  ChannelGenerator g;
  g.m_k = k;
  g.m_grid = grid;
  g.m_H = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  Eigen::MatrixXd B = Dp;
  for (int i = 0; i < N; ++i) {
    const double a = A0(grid.r(i));
    if (!std::isfinite(a))
      throw std::invalid_argument("ChannelGenerator: non-finite A0 sample");
    g.m_H(i, i) = a;
    g.m_H(N + i, N + i) = -a;
    B(i, i) += k / grid.r(i);
  }
  g.m_H.bottomLeftCorner(N, N) = B;
  g.m_H.topRightCorner(N, N) = B.transpose();
  return g;
}

void ChannelGenerator::diagonalize() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ChannelGenerator: eigensolver did not converge");
  m_lambda = es.eigenvalues();
  m_Q = es.eigenvectors();
}

void ChannelGenerator::propagate(Eigen::Ref<Eigen::MatrixXcd> plus,
                                 Eigen::Ref<Eigen::MatrixXcd> minus,
                                 double dt) const {
  if (!diagonalized())
    throw std::logic_error("ChannelGenerator::propagate before diagonalize");
  const int N = m_grid.size();
  const int m = static_cast<int>(plus.cols());
  if (plus.rows() != N || minus.rows() != N || minus.cols() != m)
    throw std::invalid_argument("ChannelGenerator::propagate: shape mismatch");
  if (m == 0 || dt == 0.0)
    return;

  // real and imaginary parts side by side so that Q acts through real gemms
  Eigen::MatrixXd X(2 * N, 2 * m);
  X.topLeftCorner(N, m) = plus.real();
  X.bottomLeftCorner(N, m) = minus.real();
  X.topRightCorner(N, m) = plus.imag();
  X.bottomRightCorner(N, m) = minus.imag();

  Eigen::MatrixXd C(2 * N, 2 * m);
  C.noalias() = m_Q.transpose() * X;
  const Eigen::ArrayXd c = (m_lambda * dt).array().cos();
  const Eigen::ArrayXd s = (m_lambda * dt).array().sin();
  for (int j = 0; j < m; ++j) {
    const Eigen::ArrayXd re = C.col(j).array();
    const Eigen::ArrayXd im = C.col(m + j).array();
    C.col(j) = (c * re - s * im).matrix();
    C.col(m + j) = (s * re + c * im).matrix();
  }
  X.noalias() = m_Q * C;

  plus.real() = X.topLeftCorner(N, m);
  minus.real() = X.bottomLeftCorner(N, m);
  plus.imag() = X.topRightCorner(N, m);
  minus.imag() = X.bottomRightCorner(N, m);
}

//******************************************************************************
GeneratorSet::GeneratorSet(angular::DiscretizationPtr disc,
                           const potentials::RadialProfile &A0)
    : m_disc(std::move(disc)) {
  for (const auto &b : m_disc->k_blocks()) {
    auto g = ChannelGenerator::assemble(b.k, A0, m_disc->radial());
    g.diagonalize();
    m_gens.emplace(b.k, std::move(g));
  }
}

const ChannelGenerator &GeneratorSet::generator(int k) const {
  const auto it = m_gens.find(k);
  if (it == m_gens.end())
    throw std::out_of_range("GeneratorSet: no generator for k = " +
                            std::to_string(k));
  return it->second;
}

void GeneratorSet::propagate(angular::ChannelState &s, double dt) const {
  if (s.disc != m_disc)
    throw std::invalid_argument("GeneratorSet: state on another discretization");
  for (const auto &b : m_disc->k_blocks())
    generator(b.k).propagate(s.plus.middleCols(b.first, b.count),
                             s.minus.middleCols(b.first, b.count), dt);
}

} // namespace diraclab::radial
