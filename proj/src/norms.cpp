#include "diraclab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace diraclab::norms {

namespace {

bool valid_exponent(double p) { return p == inf || (p >= 1.0 && std::isfinite(p)); }

// (sum x^p)^(1/p) accumulated incrementally, or max for p = inf
class PowerSum {
public:
  explicit PowerSum(double p) : m_p(p) {}
  void add(double x, double weight = 1.0) {
    if (m_p == inf)
      m_acc = std::max(m_acc, x);
    else if (x > 0.0)
      m_acc += weight * std::pow(x, m_p);
  }
  double value() const { return m_p == inf ? m_acc : std::pow(m_acc, 1.0 / m_p); }

private:
  double m_p;
  double m_acc = 0.0;
};

int shell_of(double r) { return static_cast<int>(std::floor(std::log2(r))); }

MixedNormReport report_on_field(const GridField &g, const MixedNormSpec &spec,
                                double analysis_loss) {
  const auto &d = *g.disc;
  const auto &grid = d.radial();
  const auto &quad = d.sphere();
  const int N = grid.size();
  const int Q = quad.size();

  MixedNormReport rep;
  rep.analysis_loss = analysis_loss;
  rep.sup_is_grid_max = spec.p == inf || spec.q == inf || spec.r == inf;

  const int grid_lo = shell_of(grid.r(0));
  const int grid_hi = shell_of(grid.r(N - 1));
  const int lo = spec.shell_min.value_or(grid_lo);
  const int hi = spec.shell_max.value_or(grid_hi);
  if (lo > hi)
    throw std::invalid_argument("mixed_norm: empty shell range");
  if (lo < grid_lo || hi > grid_hi)
    throw std::out_of_range("mixed_norm: requested shells [" + std::to_string(lo) +
                            ", " + std::to_string(hi) +
                            "] outside the grid domain [" + std::to_string(grid_lo) +
                            ", " + std::to_string(grid_hi) + "]");

  std::vector<PowerSum> radial(hi - lo + 1, PowerSum(spec.q));
  std::vector<int> count(hi - lo + 1, 0);
  for (int i = 0; i < N; ++i) {
    const double r = grid.r(i);
    const int j = shell_of(r);
    if (j < lo || j > hi)
      continue;
    double factor = std::pow(r, spec.x_power);
    if (spec.weight)
      factor *= spec.weight->rho(r);
    PowerSum ang(spec.r);
    for (int q = 0; q < Q; ++q)
      ang.add(factor * g.at(i, q).norm(), quad.weight(q));
    radial[j - lo].add(ang.value(), grid.h() * r * r);
    ++count[j - lo];
  }

  PowerSum outer(spec.p);
  for (int j = lo; j <= hi; ++j) {
    ShellValue sv;
    sv.shell = j;
    sv.points = count[j - lo];
    if (sv.points == 0)
      throw std::out_of_range("mixed_norm: shell " + std::to_string(j) +
                              " holds no grid point");
    sv.value = radial[j - lo].value();
    const double a = std::ldexp(1.0, j), b = std::ldexp(1.0, j + 1);
    sv.coverage = std::clamp((std::min(b, grid.R()) - a) / (b - a), 0.0, 1.0);
    if (sv.coverage < 1.0)
      ++rep.clipped_shells;
    outer.add(sv.value);
    rep.shells.push_back(sv);
  }
  rep.value = outer.value();
  return rep;
}

} // namespace

//******************************************************************************
void MixedNormSpec::validate() const {
  if (!valid_exponent(p) || !valid_exponent(q) || !valid_exponent(r))
    throw std::invalid_argument("MixedNormSpec: exponents must lie in [1, inf]");
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("MixedNormSpec: s must be finite and >= 0");
  if (!std::isfinite(x_power))
    throw std::invalid_argument("MixedNormSpec: x_power must be finite");
}

std::string MixedNormSpec::name() const {
  const auto e = [](double x) {
    std::ostringstream os;
    if (x == inf)
      os << "inf";
    else
      os << x;
    return os.str();
  };
  std::ostringstream os;
  os << "l" << e(p) << "L" << e(q) << "L" << e(r);
  if (s != 0.0)
    os << " s=" << s;
  if (weight)
    os << " " << weight->name();
  if (x_power != 0.0)
    os << " |x|^" << x_power;
  return os.str();
}

MixedNormReport mixed_norm_report(const GridField &f, const MixedNormSpec &spec) {
  spec.validate();
  if (spec.s == 0.0)
    return report_on_field(f, spec, 0.0);
  const ChannelState c = angular::analyze(f);
  const double loss = f.l2_norm_squared() - c.l2_norm_squared();
  return report_on_field(angular::synthesize(angular::apply_abs_K_pow(c, spec.s)),
                         spec, loss);
}

MixedNormReport mixed_norm_report(const ChannelState &s, const MixedNormSpec &spec) {
  spec.validate();
  return report_on_field(angular::synthesize(angular::apply_abs_K_pow(s, spec.s)),
                         spec, 0.0);
}

double mixed_norm(const GridField &f, const MixedNormSpec &spec) {
  return mixed_norm_report(f, spec).value;
}

double mixed_norm(const ChannelState &s, const MixedNormSpec &spec) {
  return mixed_norm_report(s, spec).value;
}

//******************************************************************************
double smoothing_norm(const GridField &f, const potentials::WeightSpec &w) {
  const auto &grid = f.disc->radial();
  const auto &quad = f.disc->sphere();
  double sum = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    const double rho = w.rho(r);
    if (!(rho > 0.0))
      throw std::invalid_argument("smoothing_norm: weight not positive at r = " +
                                  std::to_string(r));
    double ang = 0.0;
    for (int q = 0; q < quad.size(); ++q)
      ang += quad.weight(q) * f.at(i, q).squaredNorm();
    sum += grid.h() * r * rho * rho * ang; // r^2 dr times rho^2 / r
  }
  return std::sqrt(sum);
}

double h1_norm(const ChannelState &s) {
  const double a = s.l2_norm_squared();
  if (a == 0.0)
    return 0.0;
  return std::sqrt(a + angular::apply_dirac_channel(s).l2_norm_squared());
}

double sup_radial_l2_angular(const ChannelState &s) {
  const auto &grid = s.disc->radial();
  double best = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double v = std::sqrt(s.plus.row(i).squaredNorm() + s.minus.row(i).squaredNorm()) /
                     grid.r(i);
    best = std::max(best, v);
  }
  return best;
}

//******************************************************************************
void SpaceTimeAccumulator::accumulate(double value, double t) {
  if (!std::isfinite(t) || (!m_t.empty() && !(t > m_t.back())))
    throw std::invalid_argument("SpaceTimeAccumulator: times must increase strictly");
  if (!(value >= 0.0))
    throw std::invalid_argument("SpaceTimeAccumulator: norms must be >= 0");
  if (!m_t.empty())
    m_sum += 0.5 * (t - m_t.back()) * (value * value + m_v.back() * m_v.back());
  m_max = std::max(m_max, value);
  m_t.push_back(t);
  m_v.push_back(value);
}

double SpaceTimeAccumulator::value() const {
  return m_kind == Kind::l2 ? std::sqrt(m_sum) : m_max;
}

double x_norm(const SpaceTimeAccumulator &l2_part,
              const SpaceTimeAccumulator &sup_part) {
  if (l2_part.kind() != SpaceTimeAccumulator::Kind::l2 ||
      sup_part.kind() != SpaceTimeAccumulator::Kind::sup)
    throw std::invalid_argument("x_norm: expects an l2 and a sup accumulator");
  if (l2_part.times() != sup_part.times())
    throw std::invalid_argument("x_norm: accumulators sampled at different times");
  return l2_part.value() + sup_part.value();
}

XNormTracker::XNormTracker(double s) : m_s(s) {
  if (!(s >= 0.0))
    throw std::invalid_argument("XNormTracker: s must be >= 0");
}

void XNormTracker::add(const ChannelState &u, double t) {
  const ChannelState v = angular::apply_abs_K_pow(u, m_s);
  add_values(sup_radial_l2_angular(v), h1_norm(v), t);
}

void XNormTracker::add_values(double linf_l2, double h1, double t) {
  m_l2.accumulate(linf_l2, t);
  m_sup.accumulate(h1, t);
  m_last_linf = linf_l2;
  m_last_h1 = h1;
}

} // namespace diraclab::norms
