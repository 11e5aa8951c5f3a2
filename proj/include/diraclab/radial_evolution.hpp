#pragma once

#include "diraclab/angular.hpp"
#include "diraclab/grids.hpp"
#include "diraclab/potentials.hpp"

#include <map>
#include <memory>

namespace diraclab::radial {

//******************************************************************************
// Linear generator of one partial-wave channel acting on (psi+, psi-) stacked:
//
//   H = [ A0          -Dm + k/r ]
//       [ Dp + k/r    -A0       ]
//
// Dp is the centred first difference with ghost values psi_{-1} = p psi_0,
// p = (-1)^(l+ + 1) (the parity of psi+ through the origin), and psi_N = 0.
// Dm = -Dp^T, which is the same stencil with the opposite ghost parity, so H is
// real symmetric. H depends on the channel only through k.
class ChannelGenerator {
public:
  static ChannelGenerator assemble(int k, const potentials::RadialProfile &A0,
                                   const RadialGrid &grid);
  static ChannelGenerator assemble(const angular::ChannelIndex &c,
                                   const potentials::RadialProfile &A0,
                                   const RadialGrid &grid) {
    return assemble(c.k, A0, grid);
  }

  int k() const { return m_k; }
  const RadialGrid &grid() const { return m_grid; }
  const Eigen::MatrixXd &matrix() const { return m_H; }

  // Dense symmetric eigendecomposition H = Q diag(lambda) Q^T.
  void diagonalize();
  bool diagonalized() const { return m_lambda.size() > 0; }
  const Eigen::VectorXd &eigenvalues() const { return m_lambda; }
  const Eigen::MatrixXd &eigenvectors() const { return m_Q; }

  // psi <- exp(i H dt) psi for every column of (plus; minus), N x m each.
  // Throws std::logic_error unless diagonalized.
  void propagate(Eigen::Ref<Eigen::MatrixXcd> plus,
                 Eigen::Ref<Eigen::MatrixXcd> minus, double dt) const;

private:
  int m_k = 0;
  RadialGrid m_grid{2, 1.0};
  Eigen::MatrixXd m_H;
  Eigen::VectorXd m_lambda;
  Eigen::MatrixXd m_Q;
};

// Eigen-decomposed generators for every k present in a discretization.
class GeneratorSet {
public:
  GeneratorSet(angular::DiscretizationPtr disc,
               const potentials::RadialProfile &A0);

  const angular::DiscretizationPtr &discretization() const { return m_disc; }
  const ChannelGenerator &generator(int k) const;
  const std::map<int, ChannelGenerator> &generators() const { return m_gens; }

  // exp(i (D + A0 beta) dt) applied channelwise.
  void propagate(angular::ChannelState &s, double dt) const;

private:
  angular::DiscretizationPtr m_disc;
  std::map<int, ChannelGenerator> m_gens;
};

using GeneratorSetPtr = std::shared_ptr<const GeneratorSet>;

} // namespace diraclab::radial
