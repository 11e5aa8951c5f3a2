#include "diraclab/angular.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diraclab::angular {

cplx sph_harm(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l)
    throw std::invalid_argument("sph_harm: require 0 <= |m| <= l");
  const int am = std::abs(m);
  // std::sph_legendre already carries the Condon-Shortley phase
  const double plm = std::sph_legendre(static_cast<unsigned>(l),
                                       static_cast<unsigned>(am), theta);
  const cplx y = plm * std::polar(1.0, am * phi);
  if (m >= 0)
    return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

cplx sph_harm(int l, int m, const Vec3 &omega) {
  const double n = omega.norm();
  const double ct = std::clamp(omega.z() / n, -1.0, 1.0);
  return sph_harm(l, m, std::acos(ct), std::atan2(omega.y(), omega.x()));
}

//******************************************************************************
ChannelIndex ChannelIndex::make(int two_j, int two_m, int k) {
  if (two_j < 1 || two_j % 2 == 0)
    throw std::invalid_argument("ChannelIndex: j must be a positive half-integer");
  if (std::abs(two_m) > two_j || (two_m - two_j) % 2 != 0)
    throw std::invalid_argument("ChannelIndex: need |m_j| <= j, m_j - j integral");
  if (std::abs(k) != (two_j + 1) / 2)
    throw std::invalid_argument("ChannelIndex: need |k_j| = j + 1/2");
  return ChannelIndex{two_j, two_m, k};
}

std::string ChannelIndex::str() const {
  return "(j=" + std::to_string(two_j) + "/2, m=" + std::to_string(two_m) +
         "/2, k=" + std::to_string(k) + ")";
}

std::vector<ChannelIndex> channels_up_to(int two_j_max) {
  if (two_j_max < 1 || two_j_max % 2 == 0)
    throw std::invalid_argument("channels_up_to: j_max must be a half-integer");
  std::vector<ChannelIndex> out;
  for (int tj = 1; tj <= two_j_max; tj += 2) {
    const int kk = (tj + 1) / 2;
    for (int k : {-kk, kk})
      for (int tm = -tj; tm <= tj; tm += 2)
        out.push_back(ChannelIndex{tj, tm, k});
  }
  return out;
}

Spinor phi_basis(const ChannelIndex &c, Sign sign, const Vec3 &omega) {
  const double j = c.j();
  const double m = c.m();
  const int m_lo = (c.two_m - 1) / 2; // m_j - 1/2
  const int m_hi = (c.two_m + 1) / 2; // m_j + 1/2
  auto Y = [&](int l, int mm) -> cplx {
    return std::abs(mm) > l ? cplx{0.0} : sph_harm(l, mm, omega);
  };
  Spinor out = Spinor::Zero();
  if (c.k > 0) {
    if (sign == Sign::plus) {
      const int l = c.k;
      const cplx pref = I / std::sqrt(2.0 * j + 2.0);
      out(0) = pref * std::sqrt(j + 1.0 - m) * Y(l, m_lo);
      out(1) = -pref * std::sqrt(j + 1.0 + m) * Y(l, m_hi);
    } else {
      const int l = c.k - 1;
      const double pref = 1.0 / std::sqrt(2.0 * j);
      out(2) = pref * std::sqrt(j + m) * Y(l, m_lo);
      out(3) = pref * std::sqrt(j - m) * Y(l, m_hi);
    }
  } else {
    if (sign == Sign::plus) {
      const int l = -c.k - 1;
      const cplx pref = I / std::sqrt(2.0 * j);
      out(0) = pref * std::sqrt(j + m) * Y(l, m_lo);
      out(1) = pref * std::sqrt(j - m) * Y(l, m_hi);
    } else {
      const int l = -c.k;
      const double pref = 1.0 / std::sqrt(2.0 * j + 2.0);
      out(2) = pref * std::sqrt(j + 1.0 - m) * Y(l, m_lo);
      out(3) = -pref * std::sqrt(j + 1.0 + m) * Y(l, m_hi);
    }
  }
  return out;
}

//******************************************************************************
SphereHarmonics::SphereHarmonics(const AngularQuadrature &quad, int band)
    : m_band(band) {
  if (band < 0 || band > quad.degree())
    throw std::invalid_argument(
        "SphereHarmonics: band exceeds the quadrature degree");
  const int nc = n_coeffs();
  const int Q = quad.size();
  m_synth.resize(nc, Q);
  m_analysis.resize(Q, nc);
  for (int l = 0; l <= band; ++l)
    for (int m = -l; m <= l; ++m) {
      const int idx = index(l, m);
      for (int q = 0; q < Q; ++q) {
        const cplx y = sph_harm(l, m, quad.theta(q), quad.phi(q));
        m_synth(idx, q) = y;
        m_analysis(q, idx) = quad.weight(q) * std::conj(y);
      }
    }

  // L+ Y_l^m = sqrt((l-m)(l+m+1)) Y_l^{m+1}, L- Y_l^m = sqrt((l+m)(l-m+1)) Y_l^{m-1}
  Eigen::MatrixXcd Lp = Eigen::MatrixXcd::Zero(nc, nc);
  Eigen::MatrixXcd Lm = Eigen::MatrixXcd::Zero(nc, nc);
  Eigen::MatrixXcd Lz = Eigen::MatrixXcd::Zero(nc, nc);
  for (int l = 0; l <= band; ++l)
    for (int m = -l; m <= l; ++m) {
      const int idx = index(l, m);
      Lz(idx, idx) = m;
      if (m < l)
        Lp(index(l, m + 1), idx) = std::sqrt(double((l - m) * (l + m + 1)));
      if (m > -l)
        Lm(index(l, m - 1), idx) = std::sqrt(double((l + m) * (l - m + 1)));
    }
  m_L[0] = 0.5 * (Lp + Lm);
  m_L[1] = (Lp - Lm) / (2.0 * I);
  m_L[2] = Lz;
}

int SphereHarmonics::degree_of(int idx) {
  return static_cast<int>(std::floor(std::sqrt(double(idx)) + 1e-12));
}

Eigen::MatrixXcd SphereHarmonics::analyze(const Eigen::MatrixXcd &values) const {
  return values * m_analysis;
}

Eigen::MatrixXcd
SphereHarmonics::synthesize(const Eigen::MatrixXcd &coeffs) const {
  return coeffs * m_synth;
}

//******************************************************************************
Discretization::Discretization(RadialGrid radial, int two_j_max,
                               int angular_degree)
    : m_radial(std::move(radial)), m_two_j_max(two_j_max),
      m_quad(angular_degree < 0 ? two_j_max + 1 : angular_degree),
      m_harm(m_quad, m_quad.degree()), m_channels(channels_up_to(two_j_max)) {
  const int l_max = (two_j_max + 1) / 2;
  if (m_quad.degree() < l_max)
    throw std::invalid_argument(
        "Discretization: angular degree below j_max + 1/2 (resolution mismatch)");

  for (int n = 0; n < n_channels(); ++n) {
    const auto &c = m_channels[n];
    if (m_blocks.empty() || m_blocks.back().k != c.k)
      m_blocks.push_back(KBlock{c.k, c.two_j, n, 0});
    ++m_blocks.back().count;
  }

  const int Q = m_quad.size();
  const int nch = n_channels();
  for (int c = 0; c < 4; ++c) {
    m_synth[c] = Eigen::MatrixXcd::Zero(nch, Q);
    m_analysis[c] = Eigen::MatrixXcd::Zero(Q, nch);
  }
  for (int n = 0; n < nch; ++n)
    for (int q = 0; q < Q; ++q) {
      const Spinor p = phi_basis(m_channels[n], Sign::plus, m_quad.node(q));
      const Spinor mn = phi_basis(m_channels[n], Sign::minus, m_quad.node(q));
      for (int c = 0; c < 2; ++c) {
        m_synth[c](n, q) = p(c);
        m_analysis[c](q, n) = m_quad.weight(q) * std::conj(p(c));
      }
      for (int c = 2; c < 4; ++c) {
        m_synth[c](n, q) = mn(c);
        m_analysis[c](q, n) = m_quad.weight(q) * std::conj(mn(c));
      }
    }
}

int Discretization::position(const ChannelIndex &c) const {
  const auto it = std::lower_bound(
      m_channels.begin(), m_channels.end(), c,
      [](const ChannelIndex &a, const ChannelIndex &b) {
        if (a.two_j != b.two_j)
          return a.two_j < b.two_j;
        if (a.k != b.k)
          return a.k < b.k;
        return a.two_m < b.two_m;
      });
  if (it == m_channels.end() || *it != c)
    return -1;
  return static_cast<int>(it - m_channels.begin());
}

DiscretizationPtr make_discretization(int n_radial, double outer_radius,
                                      int two_j_max, int angular_degree) {
  return std::make_shared<const Discretization>(
      RadialGrid(n_radial, outer_radius), two_j_max, angular_degree);
}

//******************************************************************************
namespace {

void require_same(const DiscretizationPtr &a, const DiscretizationPtr &b) {
  if (a != b)
    throw std::invalid_argument("fields live on different discretizations");
}

Eigen::ArrayXd radii(const RadialGrid &g) {
  return Eigen::Map<const Eigen::ArrayXd>(g.r().data(), g.size());
}

} // namespace

GridField::GridField(DiscretizationPtr d) : disc(std::move(d)) {
  const int N = disc->radial().size();
  const int Q = disc->sphere().size();
  for (auto &c : comp)
    c = Eigen::MatrixXcd::Zero(N, Q);
}

double GridField::l2_norm_squared() const {
  const auto &g = disc->radial();
  const Eigen::Map<const Eigen::VectorXd> w(disc->sphere().weights().data(),
                                            disc->sphere().size());
  Eigen::VectorXd per_r = Eigen::VectorXd::Zero(g.size());
  for (const auto &c : comp)
    per_r += c.cwiseAbs2() * w;
  const Eigen::ArrayXd r = radii(g);
  return g.h() * (per_r.array() * r * r).sum();
}

double GridField::l2_norm() const { return std::sqrt(l2_norm_squared()); }

double GridField::max_abs() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(comp[0].rows(), comp[0].cols());
  for (const auto &c : comp)
    s += c.cwiseAbs2();
  return std::sqrt(s.maxCoeff());
}

GridField &GridField::operator+=(const GridField &o) {
  require_same(disc, o.disc);
  for (int c = 0; c < 4; ++c)
    comp[c] += o.comp[c];
  return *this;
}
GridField &GridField::operator-=(const GridField &o) {
  require_same(disc, o.disc);
  for (int c = 0; c < 4; ++c)
    comp[c] -= o.comp[c];
  return *this;
}
GridField &GridField::operator*=(cplx a) {
  for (auto &c : comp)
    c *= a;
  return *this;
}
GridField operator+(GridField a, const GridField &b) { return a += b; }
GridField operator-(GridField a, const GridField &b) { return a -= b; }
GridField operator*(cplx a, GridField f) { return f *= a; }

//******************************************************************************
ChannelState::ChannelState(DiscretizationPtr d) : disc(std::move(d)) {
  plus = Eigen::MatrixXcd::Zero(disc->radial().size(), disc->n_channels());
  minus = Eigen::MatrixXcd::Zero(disc->radial().size(), disc->n_channels());
}

double ChannelState::l2_norm_squared() const {
  return disc->radial().h() * (plus.squaredNorm() + minus.squaredNorm());
}

double ChannelState::l2_norm() const { return std::sqrt(l2_norm_squared()); }

double ChannelState::l2_norm_squared_from(int two_j_min) const {
  double s = 0.0;
  const auto &chs = disc->channels();
  for (int n = 0; n < disc->n_channels(); ++n)
    if (chs[n].two_j >= two_j_min)
      s += plus.col(n).squaredNorm() + minus.col(n).squaredNorm();
  return disc->radial().h() * s;
}

Spinor ChannelState::evaluate(const Vec3 &x) const {
  const auto &g = disc->radial();
  const double r = x.norm();
  if (r == 0.0)
    throw std::invalid_argument("ChannelState::evaluate: origin excluded");
  const int N = g.size();
  const double u = r / g.h() - 0.5;
  const int base = static_cast<int>(std::floor(u)) - 1;
  if (base > N)
    return Spinor::Zero();

  // Lagrange weights on the 4 nodes base..base+3 in index coordinates
  std::array<double, 4> lw{};
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a)
        p *= (u - (base + b)) / double(a - b);
    lw[a] = p;
  }
  const auto &chs = disc->channels();
  auto value = [&](const Eigen::MatrixXcd &psi, int n, int l) -> cplx {
    const double parity = (l + 1) % 2 == 0 ? 1.0 : -1.0;
    cplx s = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int i = base + a;
      cplx v;
      if (i < 0)
        v = parity * psi(-1 - i, n); // r_{-1-i} = -r_i
      else if (i >= N)
        v = 0.0;
      else
        v = psi(i, n);
      s += lw[a] * v;
    }
    return s;
  };

  Spinor out = Spinor::Zero();
  for (int n = 0; n < disc->n_channels(); ++n) {
    const cplx pp = value(plus, n, chs[n].l_plus());
    const cplx pm = value(minus, n, chs[n].l_minus());
    if (pp != 0.0)
      out += (pp / r) * phi_basis(chs[n], Sign::plus, x);
    if (pm != 0.0)
      out += (pm / r) * phi_basis(chs[n], Sign::minus, x);
  }
  return out;
}

ChannelState &ChannelState::operator+=(const ChannelState &o) {
  require_same(disc, o.disc);
  plus += o.plus;
  minus += o.minus;
  return *this;
}
ChannelState &ChannelState::operator-=(const ChannelState &o) {
  require_same(disc, o.disc);
  plus -= o.plus;
  minus -= o.minus;
  return *this;
}
ChannelState &ChannelState::operator*=(cplx a) {
  plus *= a;
  minus *= a;
  return *this;
}
ChannelState operator+(ChannelState a, const ChannelState &b) { return a += b; }
ChannelState operator-(ChannelState a, const ChannelState &b) { return a -= b; }
ChannelState operator*(cplx a, ChannelState s) { return s *= a; }

//******************************************************************************
ChannelState analyze(const GridField &f) {
  const auto &d = *f.disc;
  ChannelState s(f.disc);
  s.plus.noalias() = f.comp[0] * d.analysis_table(0);
  s.plus.noalias() += f.comp[1] * d.analysis_table(1);
  s.minus.noalias() = f.comp[2] * d.analysis_table(2);
  s.minus.noalias() += f.comp[3] * d.analysis_table(3);
  const Eigen::VectorXd r = radii(d.radial()).matrix();
  s.plus = r.asDiagonal() * s.plus;
  s.minus = r.asDiagonal() * s.minus;
  return s;
}

GridField synthesize(const ChannelState &s) {
  const auto &d = *s.disc;
  GridField f(s.disc);
  const Eigen::VectorXd inv_r = radii(d.radial()).inverse().matrix();
  const Eigen::MatrixXcd p = inv_r.asDiagonal() * s.plus;
  const Eigen::MatrixXcd m = inv_r.asDiagonal() * s.minus;
  f.comp[0].noalias() = p * d.synthesis_table(0);
  f.comp[1].noalias() = p * d.synthesis_table(1);
  f.comp[2].noalias() = m * d.synthesis_table(2);
  f.comp[3].noalias() = m * d.synthesis_table(3);
  return f;
}

ChannelState apply_K(const ChannelState &s) {
  ChannelState out = s;
  const auto &chs = s.disc->channels();
  for (int n = 0; n < s.disc->n_channels(); ++n) {
    const double mult = -chs[n].k;
    out.plus.col(n) *= mult;
    out.minus.col(n) *= mult;
  }
  return out;
}

ChannelState apply_abs_K_pow(const ChannelState &s, double sigma) {
  if (sigma < 0.0)
    throw std::invalid_argument("apply_abs_K_pow: sigma must be >= 0");
  ChannelState out = s;
  if (sigma == 0.0)
    return out;
  const auto &chs = s.disc->channels();
  for (int n = 0; n < s.disc->n_channels(); ++n) {
    const double mult = std::pow(std::abs(double(chs[n].k)), sigma);
    out.plus.col(n) *= mult;
    out.minus.col(n) *= mult;
  }
  return out;
}

Eigen::MatrixXcd radial_derivative(const RadialGrid &g,
                                   const Eigen::MatrixXcd &psi) {
  const int N = g.size();
  if (N < 5)
    throw std::invalid_argument("radial_derivative: need at least 5 points");
  const double c = 1.0 / (12.0 * g.h());
  Eigen::MatrixXcd d(N, psi.cols());
  for (int i = 2; i < N - 2; ++i)
    d.row(i) = c * (psi.row(i - 2) - 8.0 * psi.row(i - 1) + 8.0 * psi.row(i + 1) -
                    psi.row(i + 2));
  d.row(0) = c * (-25.0 * psi.row(0) + 48.0 * psi.row(1) - 36.0 * psi.row(2) +
                  16.0 * psi.row(3) - 3.0 * psi.row(4));
  d.row(1) = c * (-3.0 * psi.row(0) - 10.0 * psi.row(1) + 18.0 * psi.row(2) -
                  6.0 * psi.row(3) + psi.row(4));
  d.row(N - 1) = -c * (-25.0 * psi.row(N - 1) + 48.0 * psi.row(N - 2) -
                       36.0 * psi.row(N - 3) + 16.0 * psi.row(N - 4) -
                       3.0 * psi.row(N - 5));
  d.row(N - 2) = -c * (-3.0 * psi.row(N - 1) - 10.0 * psi.row(N - 2) +
                       18.0 * psi.row(N - 3) - 6.0 * psi.row(N - 4) +
                       psi.row(N - 5));
  return d;
}

ChannelState apply_dirac_channel(const ChannelState &s) {
  const auto &d = *s.disc;
  const auto &g = d.radial();
  ChannelState out(s.disc);
  const Eigen::MatrixXcd dplus = radial_derivative(g, s.plus);
  const Eigen::MatrixXcd dminus = radial_derivative(g, s.minus);
  const Eigen::VectorXd inv_r = radii(g).inverse().matrix();
  const auto &chs = d.channels();
  for (int n = 0; n < d.n_channels(); ++n) {
    const double k = chs[n].k;
    out.plus.col(n) = -dminus.col(n) + k * inv_r.cwiseProduct(s.minus.col(n));
    out.minus.col(n) = dplus.col(n) + k * inv_r.cwiseProduct(s.plus.col(n));
  }
  return out;
}

//******************************************************************************
namespace {

Eigen::VectorXd lambda_multipliers(const SphereHarmonics &sh, double s) {
  Eigen::VectorXd mult(sh.n_coeffs());
  for (int idx = 0; idx < sh.n_coeffs(); ++idx) {
    const int l = SphereHarmonics::degree_of(idx);
    mult(idx) = std::pow(1.0 + l * (l + 1.0), 0.5 * s);
  }
  return mult;
}

} // namespace

GridField lambda_s_scalar(const GridField &f, double s) {
  const auto &sh = f.disc->harmonics();
  const Eigen::VectorXd mult = lambda_multipliers(sh, s);
  GridField out(f.disc);
  for (int c = 0; c < 4; ++c) {
    Eigen::MatrixXcd coeffs = sh.analyze(f.comp[c]);
    coeffs = coeffs * mult.asDiagonal();
    out.comp[c] = sh.synthesize(coeffs);
  }
  return out;
}

Eigen::MatrixXcd lambda_s_sphere(const SphereHarmonics &sh,
                                 const Eigen::MatrixXcd &values, double s) {
  const Eigen::VectorXd mult = lambda_multipliers(sh, s);
  Eigen::MatrixXcd coeffs = sh.analyze(values.transpose());
  coeffs = coeffs * mult.asDiagonal();
  return sh.synthesize(coeffs).transpose();
}

namespace {

// rows of coeffs[a] are independent points/radii, columns are (l,m)
std::array<Eigen::MatrixXcd, 4>
spin_orbit_coeffs(const SphereHarmonics &sh,
                  const std::array<Eigen::MatrixXcd, 4> &coeffs) {
  const auto &dc = spinor::dirac_constants();
  std::array<std::array<Eigen::MatrixXcd, 4>, 3> Lc;
  for (int j = 0; j < 3; ++j) {
    const Eigen::MatrixXcd Lt = sh.angular_momentum(j).transpose();
    for (int b = 0; b < 4; ++b)
      Lc[j][b] = coeffs[b] * Lt;
  }
  std::array<Eigen::MatrixXcd, 4> out;
  for (int a = 0; a < 4; ++a) {
    out[a] = coeffs[a];
    for (int j = 0; j < 3; ++j)
      for (int b = 0; b < 4; ++b) {
        const cplx s = dc.S[j](a, b);
        if (s != 0.0)
          out[a] += 2.0 * s * Lc[j][b];
      }
    out[a] *= dc.beta(a, a);
  }
  return out;
}

} // namespace

GridField spin_orbit_K(const GridField &f) {
  const auto &sh = f.disc->harmonics();
  std::array<Eigen::MatrixXcd, 4> coeffs;
  for (int c = 0; c < 4; ++c)
    coeffs[c] = sh.analyze(f.comp[c]);
  const auto kc = spin_orbit_coeffs(sh, coeffs);
  GridField out(f.disc);
  for (int c = 0; c < 4; ++c)
    out.comp[c] = sh.synthesize(kc[c]);
  return out;
}

Eigen::MatrixXcd spin_orbit_K_sphere(const SphereHarmonics &sh,
                                     const Eigen::MatrixXcd &values) {
  std::array<Eigen::MatrixXcd, 4> coeffs;
  for (int c = 0; c < 4; ++c)
    coeffs[c] = sh.analyze(values.col(c).transpose());
  const auto kc = spin_orbit_coeffs(sh, coeffs);
  Eigen::MatrixXcd out(values.rows(), 4);
  for (int c = 0; c < 4; ++c)
    out.col(c) = sh.synthesize(kc[c]).transpose();
  return out;
}

double sphere_l2(const AngularQuadrature &quad, const Eigen::MatrixXcd &values) {
  double s = 0.0;
  for (int q = 0; q < quad.size(); ++q)
    s += quad.weight(q) * values.row(q).squaredNorm();
  return std::sqrt(s);
}

} // namespace diraclab::angular
