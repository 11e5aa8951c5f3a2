#include "doctest.h"

#include "diraclab/radial_evolution.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <random>

using namespace diraclab;
using namespace diraclab::radial;
using potentials::RadialProfile;

namespace {

Eigen::VectorXd sorted_eigs(const Eigen::MatrixXd &H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return es.eigenvalues();
}

Eigen::MatrixXcd random_block(int n, int m, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      a(i, j) = {nd(rng), nd(rng)};
  return a;
}

// 4-point Lagrange interpolation of grid data onto r (odd/even extension by p).
cplx interp(const RadialGrid &g, const Eigen::VectorXcd &v, double r, double p) {
  const double u = r / g.h() - 0.5;
  const int base = static_cast<int>(std::floor(u)) - 1;
  cplx s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a)
        w *= (u - (base + b)) / double(a - b);
    const int i = base + a;
    cplx val = i < 0 ? p * v(-1 - i) : (i >= g.size() ? cplx{0.0} : v(i));
    s += w * val;
  }
  return s;
}

} // namespace

TEST_CASE("toy grid matches a hand-assembled matrix") {
  // N = 2, R = 1: h = 1/2, r = (1/4, 3/4). k = -1: l+ = 0, ghost parity -1.
  const RadialGrid g(2, 1.0);
  const auto gen = ChannelGenerator::assemble(-1, RadialProfile::constant(0.5), g);
  // Dp = [[ +1, 1], [-1, 0]] (stencil 1/(2h) = 1; ghost -psi_0 on the left)
  // lower-left block B = Dp + diag(k/r) = [[1 - 4, 1], [-1, -4/3]]
  Eigen::MatrixXd expect(4, 4);
  expect << 0.5, 0.0, -3.0, -1.0,    //
      0.0, 0.5, 1.0, -4.0 / 3.0,     //
      -3.0, 1.0, -0.5, 0.0,          //
      -1.0, -4.0 / 3.0, 0.0, -0.5;
  CHECK((gen.matrix() - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("generator structure and spectrum") {
  const RadialGrid g(128, 16.0);
  for (int k : {-3, -1, 1, 2}) {
    const auto h0 = ChannelGenerator::assemble(k, RadialProfile::zero(), g);
    CHECK(h0.matrix() == h0.matrix().transpose());
    const Eigen::VectorXd e0 = sorted_eigs(h0.matrix());
    // chiral symmetry of the off-diagonal block form
    CHECK((e0 + e0.reverse()).cwiseAbs().maxCoeff() < 1e-10);

    const double c = 0.3;
    const auto hc = ChannelGenerator::assemble(k, RadialProfile::constant(c), g);
    const Eigen::VectorXd ec = sorted_eigs(hc.matrix());
    CHECK((ec - e0).cwiseAbs().maxCoeff() <= c + 1e-12);
  }
  CHECK_THROWS(ChannelGenerator::assemble(0, RadialProfile::zero(), g));
  CHECK_THROWS(ChannelGenerator::assemble(
      1, RadialProfile::custom([](double) { return NAN; }), g));
}

TEST_CASE("eigendecomposition and unitary propagation") {
  const RadialGrid g(96, 12.0);
  auto gen = ChannelGenerator::assemble(2, RadialProfile::gaussian(-1.5, 2.0), g);
  Eigen::MatrixXcd p(96, 3), m(96, 3);
  CHECK_THROWS_AS(gen.propagate(p, m, 0.1), std::logic_error);
  gen.diagonalize();
  const auto &Q = gen.eigenvectors();
  const auto &L = gen.eigenvalues();
  CHECK((Q * L.asDiagonal() * Q.transpose() - gen.matrix()).norm() /
            gen.matrix().norm() <
        1e-12);

  std::mt19937_64 rng(3);
  p = random_block(96, 3, rng);
  m = random_block(96, 3, rng);
  const double n0 = p.squaredNorm() + m.squaredNorm();

  Eigen::MatrixXcd p1 = p, m1 = m;
  gen.propagate(p1, m1, 0.0);
  CHECK((p1 - p).norm() == 0.0);

  gen.propagate(p1, m1, 0.37);
  CHECK(std::abs(p1.squaredNorm() + m1.squaredNorm() - n0) / n0 < 1e-12);
  gen.propagate(p1, m1, 0.25);

  Eigen::MatrixXcd p2 = p, m2 = m;
  gen.propagate(p2, m2, 0.62);
  CHECK(std::sqrt((p1 - p2).squaredNorm() + (m1 - m2).squaredNorm()) /
            std::sqrt(n0) <
        1e-12);

  // eigenvector picks up exp(i lambda dt)
  const int n = 17;
  Eigen::MatrixXcd ep = Q.col(n).head(96).cast<cplx>();
  Eigen::MatrixXcd em = Q.col(n).tail(96).cast<cplx>();
  gen.propagate(ep, em, 1.3);
  const cplx ph = std::polar(1.0, L(n) * 1.3);
  CHECK((ep - ph * Q.col(n).head(96)).norm() < 1e-12);
  CHECK((em - ph * Q.col(n).tail(96)).norm() < 1e-12);

  // against a direct matrix exponential of the real symmetric generator
  Eigen::VectorXcd x(192);
  x << p.col(0), m.col(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.matrix());
  const Eigen::VectorXcd y =
      es.eigenvectors().cast<cplx>() *
      (I * 0.62 * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
      es.eigenvectors().transpose().cast<cplx>() * x;
  Eigen::VectorXcd y2(192);
  y2 << p2.col(0), m2.col(0);
  CHECK((y - y2).norm() / y.norm() < 1e-11);
}

TEST_CASE("generator set propagates block by block") {
  auto d = angular::make_discretization(64, 8.0, 5);
  const GeneratorSet gs(d, RadialProfile::exponential(0.2, 1.0));
  CHECK(gs.generators().size() == 6);
  std::mt19937_64 rng(4);
  angular::ChannelState s(d);
  s.plus = random_block(64, d->n_channels(), rng);
  s.minus = random_block(64, d->n_channels(), rng);
  angular::ChannelState t = s;
  gs.propagate(t, 0.8);
  CHECK(std::abs(t.l2_norm() - s.l2_norm()) / s.l2_norm() < 1e-12);
  // a single column propagated alone gives the same result
  const int n = 7;
  Eigen::MatrixXcd p = s.plus.col(n), m = s.minus.col(n);
  gs.generator(d->channels()[n].k).propagate(p, m, 0.8);
  CHECK((p - t.plus.col(n)).norm() < 1e-12);
  CHECK((m - t.minus.col(n)).norm() < 1e-12);
}

TEST_CASE("self-convergence of the discrete flow") {
  // smooth packet psi+ = r e^{-(r-4)^2}, psi- = 0 in the k = 1 channel
  const double R = 16.0, T = 2.0;
  std::vector<Eigen::VectorXcd> sol;
  std::vector<RadialGrid> grids;
  for (int N : {128, 256, 512, 1024}) {
    const RadialGrid g(N, R);
    auto gen = ChannelGenerator::assemble(1, RadialProfile::exponential(0.5, 1.0), g);
    gen.diagonalize();
    Eigen::MatrixXcd p(N, 1), m = Eigen::MatrixXcd::Zero(N, 1);
    for (int i = 0; i < N; ++i) {
      const double r = g.r(i);
      p(i, 0) = r * std::exp(-(r - 4.0) * (r - 4.0));
    }
    gen.propagate(p, m, T);
    Eigen::VectorXcd both(2 * N);
    both << p.col(0), m.col(0);
    sol.push_back(both);
    grids.push_back(g);
  }
  std::vector<double> err;
  for (std::size_t a = 0; a + 1 < sol.size(); ++a) {
    const auto &gc = grids[a];
    const auto &gf = grids[a + 1];
    const int N = gc.size(), Nf = gf.size();
    double e = 0.0;
    for (int i = 0; i < N; ++i) {
      const double r = gc.r(i);
      // psi+ for k = 1 has l = 1 (even through 0), psi- has l = 0 (odd)
      e += std::norm(sol[a](i) - interp(gf, sol[a + 1].head(Nf), r, 1.0));
      e += std::norm(sol[a](N + i) - interp(gf, sol[a + 1].tail(Nf), r, -1.0));
    }
    err.push_back(std::sqrt(e * gc.h()));
  }
  for (std::size_t a = 0; a + 1 < err.size(); ++a) {
    const double order = std::log2(err[a] / err[a + 1]);
    MESSAGE("self-convergence order " << order);
    CHECK(order >= 1.9);
  }
}

TEST_CASE("single channel flow against a 3D periodic Crank-Nicolson oracle") {
  // CN for i u_t + D u = 0 on a periodic box, diagonal per Fourier mode with
  // the centred-difference symbol sin(kappa h)/h; separable naive DFTs.
  const auto &dc = spinor::dirac_constants();
  const double box = 8.0, T = 0.5;
  const int squarings = 8; // 256 CN steps
  auto d = angular::make_discretization(512, 8.0, 3);
  const auto c = angular::ChannelIndex::make(1, 1, -1);
  const int n = d->position(c);
  angular::ChannelState s0(d);
  for (int i = 0; i < 512; ++i) {
    const double r = d->radial().r(i);
    s0.plus(i, n) = r * std::exp(-r * r); // l+ = 0: u ~ e^{-r^2} Phi+
    s0.minus(i, n) = 0.5 * r * r * std::exp(-r * r);
  }
  const GeneratorSet gs(d, RadialProfile::zero());
  angular::ChannelState sT = s0;
  gs.propagate(sT, T);

  auto oracle = [&](int M, std::vector<Vec3> &pts) {
    const double h = box / M;
    const int tot = M * M * M;
    std::vector<Spinor> u(tot);
    pts.resize(tot);
    auto id = [M](int a, int b, int cc) { return (a * M + b) * M + cc; };
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        for (int cc = 0; cc < M; ++cc) {
          const Vec3 x(-box / 2 + (a + 0.5) * h, -box / 2 + (b + 0.5) * h,
                       -box / 2 + (cc + 0.5) * h);
          pts[id(a, b, cc)] = x;
          u[id(a, b, cc)] = s0.evaluate(x);
        }
    Eigen::MatrixXcd F(M, M);
    for (int p = 0; p < M; ++p)
      for (int q = 0; q < M; ++q)
        F(p, q) = std::polar(1.0, -2.0 * pi * p * q / M);
    auto dft = [&](bool inverse) {
      const Eigen::MatrixXcd G = inverse ? Eigen::MatrixXcd(F.adjoint() / double(M)) : F;
      for (int axis = 0; axis < 3; ++axis)
        for (int a = 0; a < M; ++a)
          for (int b = 0; b < M; ++b) {
            Eigen::MatrixXcd line(M, 4);
            auto idx = [&](int t) {
              return axis == 0 ? id(t, a, b) : axis == 1 ? id(a, t, b) : id(a, b, t);
            };
            for (int t = 0; t < M; ++t)
              line.row(t) = u[idx(t)].transpose();
            line = G * line;
            for (int t = 0; t < M; ++t)
              u[idx(t)] = line.row(t).transpose();
          }
    };
    dft(false);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        for (int cc = 0; cc < M; ++cc) {
          const int ks[3] = {a, b, cc};
          SpinorMatrix H = SpinorMatrix::Zero();
          for (int j = 0; j < 3; ++j) {
            const double kap = 2.0 * pi * ks[j] / box;
            H += (std::sin(kap * h) / h) * dc.alpha[j];
          }
          const double dt = std::ldexp(T, -squarings);
          const SpinorMatrix A = dc.identity - 0.5 * I * dt * H;
          const SpinorMatrix B = dc.identity + 0.5 * I * dt * H;
          const SpinorMatrix step = A.partialPivLu().solve(B);
          SpinorMatrix P = step;
          for (int t = 0; t < squarings; ++t)
            P = P * P;
          u[id(a, b, cc)] = P * u[id(a, b, cc)];
        }
    dft(true);
    return u;
  };

  // 96 = 3 x 32 keeps every coarse cell centre on the fine grid
  std::vector<Vec3> p32, p96;
  const auto o32 = oracle(32, p32);
  const auto o96 = oracle(96, p96);
  double err = 0.0, oracle_diff = 0.0;
  const int M = 32;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int cc = 0; cc < M; ++cc) {
        const int i = (a * M + b) * M + cc;
        const int f = ((3 * a + 1) * 96 + 3 * b + 1) * 96 + 3 * cc + 1;
        REQUIRE((p96[f] - p32[i]).norm() < 1e-12);
        const Spinor exact = sT.evaluate(p32[i]);
        err = std::max(err, (o32[i] - exact).norm());
        oracle_diff = std::max(oracle_diff, (o32[i] - o96[f]).norm());
      }
  MESSAGE("channel vs 32^3 oracle " << err << ", oracle 32 vs 96 " << oracle_diff);
  // second order: err(32) ~ (9/8) |o32 - o96|; allow a factor 2
  CHECK(err <= (9.0 / 4.0) * oracle_diff);
  CHECK(err > 0.1 * oracle_diff); // the oracle's own error dominates
}
