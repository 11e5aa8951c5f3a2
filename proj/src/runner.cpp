#include "diraclab/runner.hpp"

#include "diraclab/io.hpp"
#include "diraclab/spinor_algebra.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#ifndef DIRACLAB_VERSION
#define DIRACLAB_VERSION "unknown"
#endif

namespace diraclab::runner {

namespace fs = std::filesystem;
using config::ConfigError;
using config::SimulationConfig;
using evolution::EvolutionState;

const char *code_version() { return "diraclab " DIRACLAB_VERSION; }

json RunManifest::to_json() const {
  json t = json::object();
  for (const auto &[k, v] : timings)
    t[k] = v;
  json files = json::array();
  for (const auto &f : outputs)
    files.push_back({{"path", f.path}, {"bytes", f.bytes}});
  return {{"name", name},
          {"config_hash", config_hash},
          {"code_version", code_version},
          {"completed", completed},
          {"resumed", resumed},
          {"timings_s", t},
          {"outputs", files}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Outputs {
public:
  explicit Outputs(std::string dir) : m_dir(std::move(dir)) {}
  void write(const std::string &rel, const std::string &content) {
    try {
      fs::create_directories(fs::path(path(rel)).parent_path());
      io::write_file_atomic(path(rel), content);
    } catch (const std::exception &e) {
      fail(e.what());
    }
    m_files.push_back({rel, content.size()});
  }
  void note(const std::string &rel) {
    std::error_code ec;
    const auto n = fs::file_size(path(rel), ec);
    if (ec)
      fail("cannot stat " + path(rel) + ": " + ec.message());
    m_files.push_back({rel, n});
  }
  [[noreturn]] void fail(const std::string &msg) const {
    std::string inv;
    for (const auto &f : m_files)
      inv += "\n  " + f.path;
    throw OutputError(msg + "; written so far:" + (inv.empty() ? " none" : inv), m_files);
  }
  std::string path(const std::string &rel) const { return (fs::path(m_dir) / rel).string(); }
  const std::vector<OutputFile> &files() const { return m_files; }

private:
  std::string m_dir;
  std::vector<OutputFile> m_files;
};

double spinor_linf(const angular::GridField &f) {
  double m = 0.0;
  for (int i = 0; i < f.disc->radial().size(); ++i)
    for (int q = 0; q < f.disc->sphere().size(); ++q)
      m = std::max(m, f.at(i, q).norm());
  return m;
}

std::string plot_name(const std::string &col) {
  std::string s;
  for (char c : col)
    s += std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ? c : '_';
  return s;
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json summarize(const diagnostics::DiagnosticsSeries &ser, double u0_linf,
               std::size_t tracked_count, bool companion) {
  json s;
  if (ser.rows.empty())
    return s;
  const auto &r0 = ser.rows.front();
  const double m0 = r0.mass;
  double mass_drift = 0.0, gamma_drift = 0.0, chiral = 0.0, defect = 0.0, top = 0.0;
  double h1_sup = 0.0;
  for (const auto &r : ser.rows) {
    if (m0 > 0.0) {
      mass_drift = std::max(mass_drift, std::abs(r.mass - m0) / m0);
      gamma_drift = std::max(gamma_drift, std::abs(cplx(r.gamma_re, r.gamma_im) -
                                                    cplx(r0.gamma_re, r0.gamma_im)) /
                                              m0);
      defect = std::max(defect, r.lm_defect / std::sqrt(r.mass));
    }
    chiral = std::max(chiral, r.chiral_sup);
    top = std::max(top, r.top_shell_fraction);
    h1_sup = std::max(h1_sup, r.h1);
  }
  const auto &last = ser.rows.back();
  s["t_end"] = last.t;
  s["rows"] = ser.rows.size();
  s["mass_initial"] = m0;
  s["mass_drift_rel_max"] = mass_drift;
  s["gamma_charge_initial"] = {r0.gamma_re, r0.gamma_im};
  s["gamma_charge_drift_rel_max"] = gamma_drift;
  s["u0_linf"] = u0_linf;
  s["chiral_sup_max"] = chiral;
  s["chiral_sup_max_rel"] = u0_linf > 0.0 ? chiral / (u0_linf * u0_linf) : 0.0;
  s["lm_defect_rel_max"] = defect;
  s["truncation_loss_final"] = last.truncation_loss;
  s["top_shell_fraction_max"] = top;
  s["lambda_h1_initial"] = r0.h1;
  s["lambda_h1_sup"] = h1_sup;
  s["lambda_h1_sup_ratio"] = r0.h1 > 0.0 ? h1_sup / r0.h1 : 0.0;

  json x = {{"l2t_final", last.x_l2t}, {"sup_final", last.x_sup}};
  for (const auto &r : ser.rows)
    if (std::abs(r.t - 1.0) < 1e-9) {
      x["l2t_at_1"] = r.x_l2t;
      x["sup_at_1"] = r.x_sup;
      x["l2t_ratio"] = nullable(last.x_l2t / r.x_l2t);
      x["sup_ratio"] = nullable(last.x_sup / r.x_sup);
    }
  s["x_norm"] = x;

  if (companion) {
    const std::size_t base = tracked_count;
    double chi_sup = 0.0, chi_def = 0.0, v_sup = 0.0;
    for (const auto &r : ser.rows) {
      chi_sup = std::max(chi_sup, r.tracked[base]);
      chi_def = std::max(chi_def, r.tracked[base + 1]);
      v_sup = std::max(v_sup, r.tracked[base + 2]);
    }
    s["companion"] = {{"chi_chiral_sup_max", chi_sup},
                      {"chi_lm_defect_max", chi_def},
                      {"v_lambda_h1_sup", v_sup},
                      {"v_lambda_h1_initial", ser.rows.front().tracked[base + 2]}};
  }
  return s;
}

io::Snapshot make_snapshot(std::uint64_t hash, const EvolutionState &st,
                           const diagnostics::DiagnosticsSeries &ser,
                           const diagnostics::ScatteringAccumulator *acc) {
  const auto &d = *st.channels.disc;
  io::Snapshot s;
  s.config_hash = hash;
  s.n_radial = d.radial().size();
  s.outer_radius = d.radial().R();
  s.two_j_max = d.two_j_max();
  s.angular_degree = d.sphere().degree();
  s.t = st.t;
  s.t_origin = st.t_origin;
  s.step = st.step;
  s.truncation_loss = st.truncation_loss;
  s.top_shell_fraction = st.top_shell_fraction;
  s.channels = st.channels;
  s.column_names = ser.column_names();
  for (std::size_t r = 0; r < ser.rows.size(); ++r)
    s.rows.push_back(ser.values(r));
  if (acc) {
    io::ScatteringSnapshot sc;
    sc.last_sample = acc->last_sample();
    sc.slots = acc->slots();
    sc.full = acc->full();
    sc.full_even = acc->full_even();
    sc.full_even_t = acc->full_even_time();
    s.scattering = std::move(sc);
  }
  return s;
}

void write_series_outputs(Outputs &out, const diagnostics::DiagnosticsSeries &ser,
                          bool svg) {
  out.write("diagnostics.csv", io::series_csv(ser));
  if (!svg || ser.rows.empty())
    return;
  const auto names = ser.column_names();
  const auto t = ser.column("t");
  for (std::size_t c = 1; c < names.size(); ++c)
    out.write("plots/" + plot_name(names[c]) + ".svg",
              io::svg_line_plot(t, ser.column(names[c]), names[c], "t"));
}

//******************************************************************************
void evolve(const SimulationConfig &c, const RunOptions &opt, Outputs &out,
            RunManifest &m) {
  const auto t_setup = Clock::now();
  const std::uint64_t hash = config::config_hash(c);
  const auto disc = angular::make_discretization(c.N, c.R, c.two_j_max, c.angular_degree);
  const config::InitialData init = config::build_initial(c, disc);
  const double limit = c.R - init.support_radius;
  if (c.T > limit && !c.override_wall_guard) {
    std::ostringstream os;
    os << "T = " << c.T << " exceeds R - support radius = " << limit
       << "; the solution would reach the outer boundary (override with "
          "--override-wall-guard)";
    throw ConfigError("time.T", os.str());
  }
  const potentials::PotentialSpec spec = c.potential.build();
  evolution::SolverOptions so;
  so.dt = c.dt;
  so.cubic = c.cubic;
  const evolution::SplitStepSolver solver(disc, spec, so);
  const auto flow = std::make_shared<const evolution::LinearFlow>(
      disc, spec, c.dt, solver.linear().generators());

  std::vector<std::string> extra;
  if (c.companion)
    extra = {"chi_chiral_sup", "chi_lm_defect", "v_lambda_h1"};
  if (c.weight)
    extra.push_back("smoothing " + c.weight->name());
  diagnostics::DiagnosticsRecorder rec(c.s, c.tracked, extra);

  std::optional<diagnostics::ScatteringAccumulator> acc;
  long sample_every = 0;
  if (c.scattering.enabled) {
    const auto windows = diagnostics::dyadic_windows(c.scattering.first_window, c.T);
    if (windows.size() < 3)
      throw ConfigError("scattering.first_window",
                        "fewer than 3 dyadic windows fit in [0, T]");
    try {
      acc.emplace(flow, init.u0, windows, c.scattering.sample_dt, c.s,
                  c.scattering.shrink_factor);
    } catch (const std::invalid_argument &e) {
      throw ConfigError("scattering", e.what());
    }
    sample_every = evolution::step_count(c.scattering.sample_dt, c.dt);
  }

  const auto extras = [&](const EvolutionState &st) {
    std::vector<double> v;
    if (c.companion) {
      angular::ChannelState chi = *init.chi0;
      flow->propagate(chi, st.t);
      const auto lm = diagnostics::lm_monitor(angular::synthesize(chi));
      v.push_back(lm.chiral_sup);
      v.push_back(lm.defect);
      v.push_back(norms::h1_norm(angular::apply_abs_K_pow(st.channels - chi, c.s)));
    }
    if (c.weight)
      v.push_back(norms::smoothing_norm(st.field(), *c.weight));
    return v;
  };

  EvolutionState state(init.u0);
  const std::string snap_path = out.path("snapshot.bin");
  if (opt.resume && fs::exists(snap_path)) {
    const io::Snapshot s = io::read_snapshot(snap_path, disc);
    if (s.config_hash != hash)
      throw ConfigError("resume", "snapshot was written by a different configuration (" +
                                      config::hex(s.config_hash) + " vs " +
                                      config::hex(hash) + ")");
    state = EvolutionState(*s.channels, s.t_origin);
    state.step = s.step;
    state.t = s.t;
    state.truncation_loss = s.truncation_loss;
    state.top_shell_fraction = s.top_shell_fraction;
    diagnostics::DiagnosticsSeries ser = rec.series();
    if (s.column_names != ser.column_names())
      throw ConfigError("resume", "snapshot columns differ from the configuration");
    for (const auto &r : s.rows)
      ser.rows.push_back(ser.make_row(r));
    rec.restore(ser);
    if (acc) {
      if (!s.scattering)
        throw ConfigError("resume", "snapshot holds no scattering state");
      acc->restore(s.scattering->last_sample, s.scattering->slots, *s.scattering->full,
                   s.scattering->full_even, s.scattering->full_even_t);
    }
    m.resumed = true;
  } else {
    rec.record(state, extras(state));
    if (acc)
      acc->observe(state);
  }
  const double u0_linf = spinor_linf(angular::synthesize(init.u0));
  m.timings.emplace_back("setup", seconds_since(t_setup));

  const auto t_evolve = Clock::now();
  const long total = evolution::step_count(c.T, c.dt);
  long rows_now = 0, since_checkpoint = 0;
  const auto checkpoint = [&](const EvolutionState &st) {
    io::write_snapshot(snap_path, make_snapshot(hash, st, rec.series(), acc ? &*acc : nullptr));
  };
  try {
    while (state.step < total) {
      long next = std::min(total, (state.step / c.snapshot_every + 1) * c.snapshot_every);
      if (sample_every > 0)
        next = std::min(next, (state.step / sample_every + 1) * sample_every);
      solver.advance(state, next - state.step);
      if (acc && state.step % sample_every == 0)
        acc->observe(state);
      if (state.step % c.snapshot_every == 0 || state.step == total) {
        rec.record(state, extras(state));
        ++rows_now;
        ++since_checkpoint;
        if (c.checkpoint_every > 0 && since_checkpoint >= c.checkpoint_every) {
          checkpoint(state);
          since_checkpoint = 0;
        }
        if (opt.stop_after_rows >= 0 && rows_now >= opt.stop_after_rows &&
            state.step < total) {
          checkpoint(state);
          m.completed = false;
          break;
        }
        if (!opt.quiet)
          std::cerr << "\r" << c.name << ": t = " << state.t << " / " << c.T << std::flush;
      }
    }
  } catch (const evolution::SolverAbort &e) {
    checkpoint(e.last_good());
    out.note("snapshot.bin");
    m.series = rec.series();
    write_series_outputs(out, m.series, false);
    throw;
  }
  if (!opt.quiet)
    std::cerr << "\n";
  m.timings.emplace_back("evolve", seconds_since(t_evolve));

  const auto t_out = Clock::now();
  if (m.completed)
    checkpoint(state);
  out.note("snapshot.bin");
  m.series = rec.series();
  write_series_outputs(out, m.series, c.svg);
  m.summary = summarize(m.series, u0_linf, c.tracked.size(), c.companion);
  m.summary["support_radius"] = init.support_radius;
  m.summary["wall_limit"] = limit;
  m.summary["wall_guard_overridden"] = c.T > limit;
  m.summary["shell_warning"] = solver.shell_warning_raised();
  if (acc && m.completed) {
    m.scattering = acc->result();
    const json sj = scattering_json(*m.scattering);
    m.summary["scattering"] = sj;
    out.write("scattering.json", sj.dump(2) + "\n");
  }
  m.timings.emplace_back("outputs", seconds_since(t_out));
}

//******************************************************************************
double bump(const Vec3 &x, double rho) {
  const double s = 1.0 - x.squaredNorm() / (rho * rho);
  return s > 0.0 ? std::pow(s, 6) : 0.0;
}

double fitted_slope(const std::vector<double> &x, const std::vector<double> &y) {
  // least squares of log y against log x
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

//******************************************************************************
RunManifest run(SimulationConfig c, const RunOptions &opt) {
  const auto t0 = Clock::now();
  if (opt.seed)
    c.seed = *opt.seed;
  if (opt.override_wall_guard)
    c.override_wall_guard = true;
  c.validate();
  Eigen::setNbThreads(std::max(1, opt.threads));

  RunManifest m;
  m.name = c.name;
  m.config_hash = config::hex(config::config_hash(c));
  m.code_version = code_version();
  fs::create_directories(opt.out_dir);
  Outputs out(opt.out_dir);
  out.write("config.json", config::to_json(c).dump(2) + "\n");

  if (c.study == "identity-checks") {
    m.summary = identity_checks(c.identities, c.seed);
    out.write("identity_checks.json", m.summary.dump(2) + "\n");
  } else if (c.study == "free-convergence") {
    m.summary = free_convergence(c);
    std::string csv = "dt,diff_to_next,observed_order\r\n";
    for (const auto &r : m.summary["rows"])
      csv += io::csv_number(r["dt"].get<double>()) + "," +
             (r["diff_to_next"].is_null() ? "" : io::csv_number(r["diff_to_next"].get<double>())) +
             "," +
             (r["observed_order"].is_null() ? ""
                                            : io::csv_number(r["observed_order"].get<double>())) +
             "\r\n";
    out.write("convergence.csv", csv);
  } else {
    evolve(c, opt, out, m);
  }
  m.summary["name"] = c.name;
  m.summary["config_hash"] = m.config_hash;
  m.summary["completed"] = m.completed;
  out.write("summary.json", m.summary.dump(2) + "\n");
  m.timings.emplace_back("total", seconds_since(t0));
  m.outputs = out.files();
  io::write_file_atomic(out.path("manifest.json"), m.to_json().dump(2) + "\n");
  return m;
}

json free_convergence(const SimulationConfig &c) {
  const auto disc = angular::make_discretization(c.N, c.R, c.two_j_max, c.angular_degree);
  const config::InitialData init = config::build_initial(c, disc);
  const potentials::PotentialSpec spec = c.potential.build();
  std::vector<angular::ChannelState> finals;
  for (double dt : c.convergence.dts) {
    evolution::SolverOptions so;
    so.dt = dt;
    so.cubic = c.cubic;
    const evolution::SplitStepSolver solver(disc, spec, so);
    EvolutionState st(init.u0);
    solver.advance(st, evolution::step_count(c.T, dt));
    finals.push_back(st.channels);
  }
  json rows = json::array();
  std::vector<double> diffs, dts;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    json r = {{"dt", c.convergence.dts[i]}, {"diff_to_next", nullptr},
              {"observed_order", nullptr}};
    if (i + 1 < finals.size()) {
      const double d = (finals[i] - finals[i + 1]).l2_norm();
      r["diff_to_next"] = d;
      diffs.push_back(d);
      dts.push_back(c.convergence.dts[i]);
    }
    rows.push_back(r);
  }
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    const double o = std::log(diffs[i] / diffs[i + 1]) / std::log(dts[i] / dts[i + 1]);
    rows[i]["observed_order"] = nullable(o);
    orders.push_back(o);
  }
  const bool positive =
      std::all_of(diffs.begin(), diffs.end(), [](double d) { return d > 0.0; });
  return {{"study", "free-convergence"},
          {"T", c.T},
          {"norm", "L2 of final-state differences between successive dt"},
          {"rows", rows},
          {"orders", orders},
          {"fitted_order", positive ? nullable(fitted_slope(dts, diffs)) : json(nullptr)},
          {"initial_l2", init.u0.l2_norm()}};
}

json identity_checks(const config::IdentityConfig &ic, std::uint64_t seed) {
  const cplx c(0.3, 0.2);
  const double rho = ic.bump_radius;
  const auto w = [rho](const Vec3 &x) -> Spinor {
    const double b = bump(x, rho);
    const cplx e = std::polar(1.0, 2.0 * x(0) - x(2));
    return b * Spinor{e, cplx(x(1), 0.5), cplx(0.3, x(2)) * e, cplx(x(0) * x(1), -0.2)};
  };
  json smooth = json::array(), kink = json::array();
  std::vector<double> hs, r1, r2;
  for (double h : ic.hs) {
    diagnostics::MorawetzSetup st;
    st.w = w;
    st.psi = [](double r) { return 0.5 * r * r; };
    st.phi = [](double) { return 1.0; };
    st.c = c;
    st.n = ic.n;
    st.h = h;
    const auto res = diagnostics::morawetz_residual(st);
    smooth.push_back({{"h", h}, {"res1", res.res1}, {"res2", res.res2},
                      {"scale1", res.scale1}, {"scale2", res.scale2}});
    hs.push_back(h);
    r1.push_back(res.res1);
    r2.push_back(res.res2);

    const double R = ic.kink_radius;
    st.psi = [R](double r) { return r <= R ? r * r / (2 * R) : r - R / 2; };
    st.phi = [R](double r) { return r <= R ? -1.0 / R : 0.0; };
    st.kink_radius = R;
    st.kink_band = 6.5 * h;
    const auto k = diagnostics::morawetz_residual(st);
    kink.push_back({{"h", h},
                    {"band", st.kink_band},
                    {"res1_near_kink", k.res1_near_kink},
                    {"res1_away", k.res1_away},
                    {"res2_near_kink", k.res2_near_kink},
                    {"res2_away", k.res2_away}});
  }
  json slopes1 = json::array(), slopes2 = json::array();
  for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
    const double lh = std::log(hs[i] / hs[i + 1]);
    slopes1.push_back(nullable(std::log(r1[i] / r1[i + 1]) / lh));
    slopes2.push_back(nullable(std::log(r2[i] / r2[i + 1]) / lh));
  }
  const double overall1 = std::log(r1.front() / r1.back()) / std::log(hs.front() / hs.back());
  const double overall2 = std::log(r2.front() / r2.back()) / std::log(hs.front() / hs.back());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), sc(0.3, 3.0);
  std::uniform_int_distribution<int> pw(0, 3);
  json hardy = json::array();
  bool hardy_ok = true;
  for (double sigma : ic.sigmas) {
    double worst = 0.0;
    const auto g = [](double r) { return std::exp(-r * r); };
    const auto gp = [](double r) { return -2.0 * r * std::exp(-r * r); };
    const double gauss = diagnostics::hardy_check(g, gp, sigma).ratio;
    worst = gauss;
    for (int n = 0; n < ic.hardy_profiles; ++n) {
      std::array<double, 3> a, b;
      for (int i = 0; i < 3; ++i) {
        a[i] = amp(rng);
        b[i] = sc(rng);
      }
      const double p = pw(rng);
      const auto f = [=](double r) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i)
          v += a[i] * std::pow(r, i == 0 ? 0.0 : p) * std::exp(-b[i] * r * r);
        return v;
      };
      const auto fp = [=](double r) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
          const double q = i == 0 ? 0.0 : p;
          v += a[i] * ((q > 0 ? q * std::pow(r, q - 1) : 0.0) - 2 * b[i] * std::pow(r, q + 1)) *
               std::exp(-b[i] * r * r);
        }
        return v;
      };
      worst = std::max(worst, diagnostics::hardy_check(f, fp, sigma).ratio);
    }
    const double bound = 2.0 / (sigma + 1.0);
    const bool ok = worst <= bound + 1e-3;
    hardy_ok = hardy_ok && ok;
    hardy.push_back({{"sigma", sigma},
                     {"gaussian_ratio", gauss},
                     {"max_ratio", worst},
                     {"proof_constant", bound},
                     {"sharp_constant", 1.0 / (sigma + 1.0)},
                     {"within_proof_constant", ok}});
  }
  return {{"study", "identity-checks"},
          {"grid_points_per_axis", ic.n},
          {"morawetz_smooth",
           {{"weights", "psi = |x|^2/2, phi = 1"},
            {"bump_radius", rho},
            {"c", {c.real(), c.imag()}},
            {"levels", smooth},
            {"slopes_id1", slopes1},
            {"slopes_id2", slopes2},
            {"overall_slope_id1", nullable(overall1)},
            {"overall_slope_id2", nullable(overall2)}}},
          {"morawetz_kink",
           {{"weights", "psi = |x|^2/(2R) inside, |x| - R/2 outside; phi = -1/R inside"},
            {"R", ic.kink_radius},
            {"levels", kink}}},
          {"hardy", hardy},
          {"hardy_within_proof_constant", hardy_ok}};
}

json report_json(const potentials::AssumptionReport &r) {
  json q = json::array();
  for (const auto &x : r.quantities) {
    json e = {{"name", x.name}, {"value", nullable(x.value)}, {"pass", x.pass()}};
    e["threshold"] = x.threshold ? json(*x.threshold) : json(nullptr);
    q.push_back(e);
  }
  return {{"quantities", q},
          {"notes", r.notes},
          {"shell_min", r.shell_min},
          {"shell_max", r.shell_max},
          {"radii_per_shell", r.radii_per_shell},
          {"angular_degree", r.angular_degree},
          {"delta", r.delta},
          {"all_pass", r.all_pass()}};
}

json check_potential(const SimulationConfig &c) {
  const potentials::PotentialSpec spec = c.potential.build();
  const potentials::WeightSpec w = c.weight.value_or(potentials::WeightSpec::constant(1.0));
  const auto a2 = potentials::check_A2(w);
  const auto l2 = potentials::rho_l2_linf(w);
  return {{"condition_V", report_json(potentials::check_condition_V(spec))},
          {"angular_assumptions",
           report_json(potentials::check_angular_assumptions(spec, c.s, w))},
          {"class_V", spec.is_V0_in_class_V()},
          {"weight", w.name()},
          {"A2", {{"ratio", a2.ratio},
                  {"worst_center", a2.worst_center},
                  {"worst_radius", a2.worst_radius},
                  {"balls", a2.balls}}},
          {"rho_l2_linf", {{"in_range", l2.in_range},
                           {"tail_bound", l2.tail_bound},
                           {"total_bound", nullable(l2.total_bound)}}}};
}

json scattering_json(const diagnostics::ScatteringResult &r) {
  json tails = json::array();
  for (const auto &t : r.tails)
    tails.push_back({{"t1", t.t1},
                     {"t2", t.t2},
                     {"h1", t.h1},
                     {"lambda_h1", t.lambda_h1},
                     {"samples", t.samples}});
  return {{"t_end", r.t_end},
          {"u_plus_l2", r.u_plus.l2_norm()},
          {"u_plus_h1", norms::h1_norm(r.u_plus)},
          {"tails", tails},
          {"shrink_factor", r.shrink_factor},
          {"cauchy_decreasing", r.cauchy_decreasing},
          {"verdict", r.verdict}};
}

} // namespace diraclab::runner
