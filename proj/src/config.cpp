#include "diraclab/config.hpp"

#include "diraclab/spinor_algebra.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace diraclab::config {

namespace {

// Strict view of a JSON object: every key must be consumed.
class Obj {
public:
  Obj(const json &j, std::string path) : m_j(j), m_path(std::move(path)) {
    if (!j.is_object())
      throw ConfigError(m_path, "expected an object");
  }

  std::string at(const std::string &key) const {
    return m_path.empty() ? key : m_path + "." + key;
  }

  const json *find(const std::string &key) {
    const auto it = m_j.find(key);
    if (it == m_j.end())
      return nullptr;
    m_used.insert(key);
    return &*it;
  }

  void get(const std::string &key, double &out) {
    if (const json *v = find(key))
      out = number(*v, at(key));
  }
  void get(const std::string &key, int &out) {
    if (const json *v = find(key))
      out = integer(*v, at(key));
  }
  void get(const std::string &key, long &out) {
    if (const json *v = find(key))
      out = integer(*v, at(key));
  }
  void get(const std::string &key, std::uint64_t &out) {
    if (const json *v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long>() >= 0))
        throw ConfigError(at(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string &key, bool &out) {
    if (const json *v = find(key)) {
      if (!v->is_boolean())
        throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string &key, std::string &out) {
    if (const json *v = find(key)) {
      if (!v->is_string())
        throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string &key, std::vector<double> &out) {
    if (const json *v = find(key)) {
      if (!v->is_array())
        throw ConfigError(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(number((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
    }
  }

  void finish() const {
    for (auto it = m_j.begin(); it != m_j.end(); ++it)
      if (!m_used.count(it.key()))
        throw ConfigError(at(it.key()), "unknown key");
  }

  static double number(const json &v, const std::string &path) {
    if (v.is_string() && v.get<std::string>() == "inf")
      return norms::inf;
    if (!v.is_number())
      throw ConfigError(path, "expected a number");
    return v.get<double>();
  }
  static long integer(const json &v, const std::string &path) {
    if (!v.is_number_integer())
      throw ConfigError(path, "expected an integer");
    return v.get<long>();
  }
  static cplx complex(const json &v, const std::string &path) {
    if (v.is_number())
      return v.get<double>();
    if (!v.is_array() || v.size() != 2)
      throw ConfigError(path, "expected a number or [re, im]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  }

private:
  const json &m_j;
  std::string m_path;
  std::set<std::string> m_used;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json spinor_json(const Spinor &s) {
  json a = json::array();
  for (int i = 0; i < 4; ++i)
    a.push_back(complex_json(s(i)));
  return a;
}

Spinor spinor_from(const json &v, const std::string &path) {
  if (!v.is_array() || v.size() != 4)
    throw ConfigError(path, "expected 4 complex entries");
  Spinor s;
  for (int i = 0; i < 4; ++i)
    s(i) = Obj::complex(v[i], path + "[" + std::to_string(i) + "]");
  return s;
}

json number_json(double x) { return x == norms::inf ? json("inf") : json(x); }

//******************************************************************************
ProfileConfig profile_from(const json &j, const std::string &path) {
  ProfileConfig p;
  Obj o(j, path);
  o.get("kind", p.kind);
  o.get("amp", p.amp);
  o.get("scale", p.scale);
  o.get("p", p.p);
  o.get("r", p.r);
  o.get("f", p.f);
  o.finish();
  static const std::set<std::string> kinds = {"zero",        "constant", "gaussian",
                                              "exponential", "power",    "tabulated"};
  if (!kinds.count(p.kind))
    throw ConfigError(o.at("kind"), "unknown profile kind '" + p.kind + "'");
  return p;
}

json profile_json(const ProfileConfig &p) {
  json j = {{"kind", p.kind}};
  if (p.kind == "zero")
    return j;
  if (p.kind == "tabulated") {
    j["r"] = p.r;
    j["f"] = p.f;
    return j;
  }
  j["amp"] = p.amp;
  if (p.kind != "constant")
    j["scale"] = p.scale;
  if (p.kind == "power")
    j["p"] = p.p;
  return j;
}

MatrixConfig matrix_from(const json &j, const std::string &path) {
  MatrixConfig m;
  if (j.is_string()) {
    m.kind = j.get<std::string>();
    if (m.kind != "beta" && m.kind != "identity")
      throw ConfigError(path, "expected \"beta\", \"identity\" or an object");
    return m;
  }
  Obj o(j, path);
  if (const json *cv = o.find("class_V")) {
    Obj c(*cv, o.at("class_V"));
    m.kind = "class_V";
    c.get("a", m.a);
    c.get("b", m.b);
    if (const json *z = c.find("z"))
      m.z = Obj::complex(*z, c.at("z"));
    if (const json *w = c.find("w"))
      m.w = Obj::complex(*w, c.at("w"));
    c.finish();
  } else if (const json *e = o.find("entries")) {
    m.kind = "entries";
    if (!e->is_array() || e->size() != 4)
      throw ConfigError(o.at("entries"), "expected 4 rows");
    for (int r = 0; r < 4; ++r) {
      const std::string rp = o.at("entries") + "[" + std::to_string(r) + "]";
      if (!(*e)[r].is_array() || (*e)[r].size() != 4)
        throw ConfigError(rp, "expected 4 complex entries");
      for (int c = 0; c < 4; ++c)
        m.entries(r, c) = Obj::complex((*e)[r][c], rp + "[" + std::to_string(c) + "]");
    }
  } else {
    throw ConfigError(path, "expected class_V or entries");
  }
  o.finish();
  return m;
}

json matrix_json(const MatrixConfig &m) {
  if (m.kind == "beta" || m.kind == "identity")
    return m.kind;
  if (m.kind == "class_V")
    return {{"class_V",
             {{"a", m.a}, {"b", m.b}, {"z", complex_json(m.z)}, {"w", complex_json(m.w)}}}};
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c)
      row.push_back(complex_json(m.entries(r, c)));
    rows.push_back(row);
  }
  return {{"entries", rows}};
}

potentials::WeightSpec weight_from(const json &j, const std::string &path) {
  Obj o(j, path);
  std::string kind = "constant";
  double param = 1.0;
  o.get("kind", kind);
  o.get("param", param);
  o.finish();
  if (kind == "constant")
    return potentials::WeightSpec::constant(param);
  if (kind == "power_split")
    return potentials::WeightSpec::power_split(param);
  if (kind == "log")
    return potentials::WeightSpec::log(param);
  throw ConfigError(o.at("kind"), "unknown weight kind '" + kind + "'");
}

json weight_json(const potentials::WeightSpec &w) {
  using K = potentials::WeightSpec::Kind;
  const char *kind = w.kind == K::constant ? "constant"
                     : w.kind == K::power_split ? "power_split"
                                                 : "log";
  return {{"kind", kind}, {"param", w.param}};
}

norms::MixedNormSpec norm_from(const json &j, const std::string &path) {
  norms::MixedNormSpec n;
  Obj o(j, path);
  o.get("p", n.p);
  o.get("q", n.q);
  o.get("r", n.r);
  o.get("s", n.s);
  o.get("x_power", n.x_power);
  if (const json *w = o.find("weight"))
    n.weight = weight_from(*w, o.at("weight"));
  int v = 0;
  if (o.find("shell_min")) {
    o.get("shell_min", v);
    n.shell_min = v;
  }
  if (o.find("shell_max")) {
    o.get("shell_max", v);
    n.shell_max = v;
  }
  o.finish();
  try {
    n.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(path, e.what());
  }
  return n;
}

json norm_json(const norms::MixedNormSpec &n) {
  json j = {{"p", number_json(n.p)}, {"q", number_json(n.q)}, {"r", number_json(n.r)},
            {"s", n.s},              {"x_power", n.x_power}};
  if (n.weight)
    j["weight"] = weight_json(*n.weight);
  if (n.shell_min)
    j["shell_min"] = *n.shell_min;
  if (n.shell_max)
    j["shell_max"] = *n.shell_max;
  return j;
}

Spinor random_unit_spinor(std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  Spinor z;
  for (int i = 0; i < 4; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    z(i) = {re, im};
  }
  return z / z.norm();
}

double lambda_h1(const angular::ChannelState &s, double order) {
  return norms::h1_norm(angular::apply_abs_K_pow(s, order));
}

} // namespace

//******************************************************************************
potentials::RadialProfile ProfileConfig::build() const {
  using potentials::RadialProfile;
  if (kind == "zero")
    return RadialProfile::zero();
  if (kind == "constant")
    return RadialProfile::constant(amp);
  if (kind == "gaussian")
    return RadialProfile::gaussian(amp, scale);
  if (kind == "exponential")
    return RadialProfile::exponential(amp, scale);
  if (kind == "power")
    return RadialProfile::power(amp, p, scale);
  if (kind == "tabulated")
    return RadialProfile::tabulated(r, f);
  throw ConfigError("profile", "unknown kind '" + kind + "'");
}

SpinorMatrix MatrixConfig::build() const {
  if (kind == "beta")
    return spinor::dirac_constants().beta;
  if (kind == "identity")
    return SpinorMatrix::Identity();
  if (kind == "class_V")
    return spinor::make_class_V(a, b, z, w);
  return entries;
}

potentials::PotentialSpec PotentialConfig::build() const {
  potentials::PotentialSpec s;
  s.A0 = A0.build();
  for (const auto &[p, m] : V0)
    s.V0_terms.push_back({p.build(), m.build()});
  s.sigma = sigma;
  return s;
}

//******************************************************************************
void SimulationConfig::validate() const {
  if (study != "none" && study != "free-convergence" && study != "identity-checks")
    throw ConfigError("study", "expected none, free-convergence or identity-checks");
  if (N < 8)
    throw ConfigError("grid.N", "need at least 8 radial points");
  if (!(R > 0.0) || !std::isfinite(R))
    throw ConfigError("grid.R", "must be positive");
  if (two_j_max < 1 || two_j_max % 2 == 0)
    throw ConfigError("grid.two_j_max", "must be a positive odd integer (2 j_max)");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("time.dt", "must be positive");
  if (!(T >= 0.0) || !std::isfinite(T))
    throw ConfigError("time.T", "must be >= 0");
  const double steps = T / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("time.T", "must be a multiple of time.dt");
  if (snapshot_every <= 0)
    throw ConfigError("time.snapshot_every", "must be positive");
  if (checkpoint_every < 0)
    throw ConfigError("time.checkpoint_every", "must be >= 0");
  if (!(s >= 0.0))
    throw ConfigError("norms.s", "must be >= 0");
  if (!(potential.sigma > 0.0))
    throw ConfigError("potential.sigma", "must be positive");
  static const std::set<std::string> profiles = {"zero", "gaussian-spinor", "lm",
                                                 "channel-packet"};
  if (!profiles.count(initial.profile))
    throw ConfigError("initial.profile", "unknown profile '" + initial.profile + "'");
  if (!(initial.width > 0.0))
    throw ConfigError("initial.width", "must be positive");
  if (initial.lambda_h1 && !(*initial.lambda_h1 > 0.0))
    throw ConfigError("initial.lambda_h1", "must be positive");
  if (initial.lambda_h1 && initial.profile == "lm")
    throw ConfigError("initial.lambda_h1", "not used by lm data; set amplitude");
  if (!(initial.defect >= 0.0))
    throw ConfigError("initial.defect", "must be >= 0");
  if (initial.profile == "channel-packet") {
    try {
      angular::ChannelIndex::make(initial.two_j, initial.two_m, initial.k);
    } catch (const std::invalid_argument &e) {
      throw ConfigError("initial.channel", e.what());
    }
    if (initial.two_j > two_j_max)
      throw ConfigError("initial.channel", "outside the angular truncation");
  }
  if (scattering.enabled) {
    if (!(scattering.first_window > 0.0))
      throw ConfigError("scattering.first_window", "must be positive");
    if (!(scattering.sample_dt > 0.0))
      throw ConfigError("scattering.sample_dt", "must be positive");
    const double k = scattering.sample_dt / dt;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
      throw ConfigError("scattering.sample_dt", "must be a multiple of time.dt");
    if (!(scattering.shrink_factor > 0.0))
      throw ConfigError("scattering.shrink_factor", "must be positive");
  }
  if (companion && initial.profile != "lm")
    throw ConfigError("companion", "needs lm initial data");
  if (study == "free-convergence") {
    if (convergence.dts.size() < 3)
      throw ConfigError("convergence.dts", "need at least 3 time steps");
    for (double d : convergence.dts) {
      const double n = T / d;
      if (!(d > 0.0) || std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("convergence.dts", "each dt must divide time.T");
    }
  }
  if (study == "identity-checks") {
    if (identities.n < 24)
      throw ConfigError("identities.n", "need at least 24 points per axis");
    if (identities.hs.size() < 2)
      throw ConfigError("identities.hs", "need at least 2 mesh widths");
    if (identities.hardy_profiles < 1)
      throw ConfigError("identities.hardy_profiles", "must be positive");
    for (double sg : identities.sigmas)
      if (!(sg > -1.0))
        throw ConfigError("identities.sigmas", "every sigma must exceed -1");
  }
}

SimulationConfig from_json(const json &j) {
  SimulationConfig c;
  Obj o(j, "");
  int version = 0;
  if (!o.find("schema_version"))
    throw ConfigError("schema_version", "missing");
  o.get("schema_version", version);
  if (version != schema_version)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version) +
                                            " (expected " +
                                            std::to_string(schema_version) + ")");
  o.get("name", c.name);
  o.get("study", c.study);
  if (const json *g = o.find("grid")) {
    Obj go(*g, "grid");
    go.get("N", c.N);
    go.get("R", c.R);
    go.get("two_j_max", c.two_j_max);
    go.get("angular_degree", c.angular_degree);
    go.finish();
  }
  if (const json *t = o.find("time")) {
    Obj to(*t, "time");
    to.get("dt", c.dt);
    to.get("T", c.T);
    to.get("snapshot_every", c.snapshot_every);
    to.get("checkpoint_every", c.checkpoint_every);
    to.finish();
  }
  o.get("cubic", c.cubic);
  if (const json *p = o.find("potential")) {
    Obj po(*p, "potential");
    if (const json *a = po.find("A0"))
      c.potential.A0 = profile_from(*a, "potential.A0");
    if (const json *v = po.find("V0")) {
      if (!v->is_array())
        throw ConfigError("potential.V0", "expected an array of terms");
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string path = "potential.V0[" + std::to_string(i) + "]";
        Obj to((*v)[i], path);
        const json *pr = to.find("profile");
        const json *mx = to.find("matrix");
        if (!pr || !mx)
          throw ConfigError(path, "needs profile and matrix");
        c.potential.V0.emplace_back(profile_from(*pr, path + ".profile"),
                                    matrix_from(*mx, path + ".matrix"));
        to.finish();
      }
    }
    po.get("sigma", c.potential.sigma);
    po.finish();
  }
  if (const json *i = o.find("initial")) {
    Obj io(*i, "initial");
    auto &in = c.initial;
    io.get("profile", in.profile);
    io.get("amplitude", in.amplitude);
    io.get("width", in.width);
    if (const json *ce = io.find("center")) {
      std::vector<double> v;
      if (!ce->is_array() || ce->size() != 3)
        throw ConfigError("initial.center", "expected [x, y, z]");
      for (int k = 0; k < 3; ++k)
        in.center(k) = Obj::number((*ce)[k], "initial.center");
    }
    if (const json *sp = io.find("spinor"))
      in.spinor = spinor_from(*sp, "initial.spinor");
    if (const json *l = io.find("lambda_h1"))
      in.lambda_h1 = Obj::number(*l, "initial.lambda_h1");
    io.get("defect", in.defect);
    if (const json *sp = io.find("defect_spinor"))
      in.defect_spinor = spinor_from(*sp, "initial.defect_spinor");
    if (const json *ch = io.find("channel")) {
      Obj co(*ch, "initial.channel");
      co.get("two_j", in.two_j);
      co.get("two_m", in.two_m);
      co.get("k", in.k);
      co.finish();
    }
    io.get("radius", in.radius);
    io.finish();
  }
  if (const json *n = o.find("norms")) {
    Obj no(*n, "norms");
    no.get("s", c.s);
    if (const json *tr = no.find("tracked")) {
      if (!tr->is_array())
        throw ConfigError("norms.tracked", "expected an array");
      for (std::size_t i = 0; i < tr->size(); ++i)
        c.tracked.push_back(
            norm_from((*tr)[i], "norms.tracked[" + std::to_string(i) + "]"));
    }
    if (const json *w = no.find("weight"))
      c.weight = weight_from(*w, "norms.weight");
    no.finish();
  }
  if (const json *s = o.find("scattering")) {
    Obj so(*s, "scattering");
    so.get("enabled", c.scattering.enabled);
    so.get("first_window", c.scattering.first_window);
    so.get("sample_dt", c.scattering.sample_dt);
    so.get("shrink_factor", c.scattering.shrink_factor);
    so.finish();
  }
  o.get("companion", c.companion);
  if (const json *cv = o.find("convergence")) {
    Obj co(*cv, "convergence");
    co.get("dts", c.convergence.dts);
    co.finish();
  }
  if (const json *id = o.find("identities")) {
    Obj io(*id, "identities");
    auto &ic = c.identities;
    io.get("n", ic.n);
    io.get("hs", ic.hs);
    io.get("bump_radius", ic.bump_radius);
    io.get("kink_radius", ic.kink_radius);
    io.get("hardy_profiles", ic.hardy_profiles);
    io.get("sigmas", ic.sigmas);
    io.finish();
  }
  o.get("seed", c.seed);
  o.get("override_wall_guard", c.override_wall_guard);
  o.get("svg", c.svg);
  o.finish();
  c.validate();
  return c;
}

json to_json(const SimulationConfig &c) {
  json j;
  j["schema_version"] = schema_version;
  j["name"] = c.name;
  j["study"] = c.study;
  j["grid"] = {{"N", c.N}, {"R", c.R}, {"two_j_max", c.two_j_max},
               {"angular_degree", c.angular_degree}};
  j["time"] = {{"dt", c.dt},
               {"T", c.T},
               {"snapshot_every", c.snapshot_every},
               {"checkpoint_every", c.checkpoint_every}};
  j["cubic"] = c.cubic;
  json v0 = json::array();
  for (const auto &[p, m] : c.potential.V0)
    v0.push_back({{"profile", profile_json(p)}, {"matrix", matrix_json(m)}});
  j["potential"] = {{"A0", profile_json(c.potential.A0)},
                    {"V0", v0},
                    {"sigma", c.potential.sigma}};
  const auto &in = c.initial;
  json ij = {{"profile", in.profile},
             {"amplitude", in.amplitude},
             {"width", in.width},
             {"center", {in.center(0), in.center(1), in.center(2)}},
             {"defect", in.defect},
             {"channel", {{"two_j", in.two_j}, {"two_m", in.two_m}, {"k", in.k}}},
             {"radius", in.radius}};
  if (in.spinor)
    ij["spinor"] = spinor_json(*in.spinor);
  if (in.defect_spinor)
    ij["defect_spinor"] = spinor_json(*in.defect_spinor);
  if (in.lambda_h1)
    ij["lambda_h1"] = *in.lambda_h1;
  j["initial"] = ij;
  json tracked = json::array();
  for (const auto &n : c.tracked)
    tracked.push_back(norm_json(n));
  j["norms"] = {{"s", c.s}, {"tracked", tracked}};
  if (c.weight)
    j["norms"]["weight"] = weight_json(*c.weight);
  j["scattering"] = {{"enabled", c.scattering.enabled},
                     {"first_window", c.scattering.first_window},
                     {"sample_dt", c.scattering.sample_dt},
                     {"shrink_factor", c.scattering.shrink_factor}};
  j["companion"] = c.companion;
  j["convergence"] = {{"dts", c.convergence.dts}};
  const auto &ic = c.identities;
  j["identities"] = {{"n", ic.n},
                     {"hs", ic.hs},
                     {"bump_radius", ic.bump_radius},
                     {"kink_radius", ic.kink_radius},
                     {"hardy_profiles", ic.hardy_profiles},
                     {"sigmas", ic.sigmas}};
  j["seed"] = c.seed;
  j["override_wall_guard"] = c.override_wall_guard;
  j["svg"] = c.svg;
  return j;
}

SimulationConfig load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
  return from_json(j);
}

std::uint64_t config_hash(const SimulationConfig &c) {
  json j = to_json(c);
  // output and bookkeeping switches do not change the numbers
  j.erase("svg");
  j.erase("override_wall_guard");
  j["time"].erase("checkpoint_every");
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

//******************************************************************************
std::vector<std::string> preset_names() {
  return {"free",       "conservation",       "small-data",     "lm-large",
          "scattering", "free-convergence", "identity-checks"};
}

SimulationConfig preset(const std::string &name) {
  SimulationConfig c;
  c.name = name;
  ProfileConfig decay;
  decay.kind = "exponential";
  decay.amp = 0.1;
  decay.scale = 1.0;
  const std::pair<ProfileConfig, MatrixConfig> beta_term{decay, MatrixConfig{}};

  if (name == "free") {
    c.T = 16.0;
    c.initial.lambda_h1 = 0.05;
  } else if (name == "conservation") {
    c.T = 16.0;
    c.potential.V0.push_back(beta_term);
    c.initial.amplitude = 1.0;
  } else if (name == "small-data") {
    c.T = 24.0;
    c.potential.V0.push_back(beta_term);
    c.initial.lambda_h1 = 0.05;
    c.scattering.enabled = true;
  } else if (name == "lm-large") {
    c.T = 24.0;
    c.potential.V0.push_back(beta_term);
    c.initial.profile = "lm";
    c.initial.amplitude = 5.0;
    c.initial.defect = 0.01;
    c.scattering.enabled = true;
    c.companion = true;
  } else if (name == "scattering") {
    c.T = 24.0;
    c.initial.lambda_h1 = 0.1;
    c.scattering.enabled = true;
  } else if (name == "free-convergence") {
    c.study = "free-convergence";
    c.N = 256;
    c.R = 16.0;
    c.two_j_max = 9;
    c.T = 1.0;
    c.snapshot_every = 25;
    c.initial.amplitude = 0.5;
    c.initial.center = Vec3(0.1, -0.05, 0.05);
    MatrixConfig m;
    m.kind = "class_V";
    m.a = 0.5;
    m.b = -0.3;
    m.z = 0.2;
    m.w = cplx(0.0, 0.1);
    c.potential.V0.push_back({decay, m});
  } else if (name == "identity-checks") {
    c.study = "identity-checks";
    c.T = 0.0;
  } else {
    std::string known;
    for (const auto &n : preset_names())
      known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("preset", "unknown preset '" + name + "' (known: " + known + ")");
  }
  c.validate();
  return c;
}

//******************************************************************************
double support_radius(const angular::ChannelState &s, double rel) {
  const auto &grid = s.disc->radial();
  std::vector<double> v(grid.size());
  double peak = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    v[i] = std::sqrt(s.plus.row(i).squaredNorm() + s.minus.row(i).squaredNorm()) /
           grid.r(i);
    peak = std::max(peak, v[i]);
  }
  if (peak == 0.0)
    return 0.0;
  for (int i = grid.size() - 1; i >= 0; --i)
    if (v[i] >= rel * peak)
      return std::min(grid.R(), grid.r(i) + 0.5 * grid.h());
  return 0.0;
}

InitialData build_initial(const SimulationConfig &c, angular::DiscretizationPtr disc) {
  const InitialConfig &in = c.initial;
  std::mt19937_64 rng(c.seed);
  InitialData out{angular::ChannelState(disc), std::nullopt, 0.0};
  const auto shape = [&](const Vec3 &x) {
    return std::exp(-(x - in.center).squaredNorm() / (in.width * in.width));
  };

  if (in.profile == "gaussian-spinor") {
    const Spinor chi = in.spinor ? Spinor(*in.spinor / in.spinor->norm())
                                 : random_unit_spinor(rng);
    out.u0 = angular::analyze(angular::sample(
        disc, [&](const Vec3 &x) -> Spinor { return in.amplitude * shape(x) * chi; }));
  } else if (in.profile == "lm") {
    const Spinor z = in.spinor ? *in.spinor : random_unit_spinor(rng);
    Spinor q = spinor::project_E(z).parallel;
    if (q.norm() == 0.0)
      throw ConfigError("initial.spinor", "has no component in E");
    q /= q.norm();
    const Spinor dz = in.defect_spinor ? *in.defect_spinor : random_unit_spinor(rng);
    Spinor d = spinor::project_E(dz).defect;
    angular::ChannelState chi0 = angular::analyze(angular::sample(
        disc, [&](const Vec3 &x) -> Spinor { return in.amplitude * shape(x) * q; }));
    out.u0 = chi0;
    if (in.defect > 0.0) {
      if (d.norm() == 0.0)
        throw ConfigError("initial.defect_spinor", "lies in E");
      d /= d.norm();
      angular::ChannelState v0 = angular::analyze(
          angular::sample(disc, [&](const Vec3 &x) -> Spinor { return shape(x) * d; }));
      v0 *= in.defect / lambda_h1(v0, c.s);
      out.u0 += v0;
    }
    out.chi0 = std::move(chi0);
  } else if (in.profile == "channel-packet") {
    const auto ch = angular::ChannelIndex::make(in.two_j, in.two_m, in.k);
    const int col = disc->position(ch);
    const auto &grid = disc->radial();
    for (int i = 0; i < grid.size(); ++i) {
      const double r = grid.r(i);
      out.u0.plus(i, col) = in.amplitude * std::pow(r / in.width, ch.l_plus() + 1) *
                            std::exp(-(r - in.radius) * (r - in.radius) /
                                     (in.width * in.width));
    }
  }
  if (in.lambda_h1 && in.profile != "zero") {
    const double now = lambda_h1(out.u0, c.s);
    if (now == 0.0)
      throw ConfigError("initial.lambda_h1", "initial data vanish");
    out.u0 *= *in.lambda_h1 / now;
  }
  out.support_radius = support_radius(out.u0);
  return out;
}

} // namespace diraclab::config
