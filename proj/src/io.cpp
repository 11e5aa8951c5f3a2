#include "diraclab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diraclab::io {

namespace fs = std::filesystem;

void write_file_atomic(const std::string &path, const std::string &content) {
  const fs::path p(path);
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, p);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

//******************************************************************************
std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string series_csv(const diagnostics::DiagnosticsSeries &series) {
  std::string out;
  const auto names = series.column_names();
  for (std::size_t c = 0; c < names.size(); ++c)
    out += (c ? "," : "") + csv_field(names[c]);
  out += "\r\n";
  for (std::size_t r = 0; r < series.rows.size(); ++r) {
    const auto v = series.values(r);
    for (std::size_t c = 0; c < v.size(); ++c)
      out += (c ? "," : "") + csv_number(v[c]);
    out += "\r\n";
  }
  return out;
}

//******************************************************************************
namespace {

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '&':
      out += "&amp;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

} // namespace

std::string svg_line_plot(const std::vector<double> &x, const std::vector<double> &y,
                          const std::string &title, const std::string &xlabel) {
  const double W = 640, H = 400, L = 80, Rm = 20, Tm = 40, B = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const std::size_t n = std::min(x.size(), y.size());
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      continue;
    if (!any) {
      x0 = x1 = x[i];
      y0 = y1 = y[i];
      any = true;
    }
    x0 = std::min(x0, x[i]);
    x1 = std::max(x1, x[i]);
    y0 = std::min(y0, y[i]);
    y1 = std::max(y1, y[i]);
  }
  if (x1 == x0)
    x1 = x0 + 1.0;
  if (y1 == y0) {
    const double pad = y0 == 0.0 ? 1.0 : 0.5 * std::abs(y0);
    y0 -= pad;
    y1 += pad;
  }
  const auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - Rm); };
  const auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - Tm - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << xml_escape(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - Rm
     << "\" height=\"" << H - Tm - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
     << short_number(x0) << "</text>\n";
  os << "<text x=\"" << W - Rm << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
     << short_number(x1) << "</text>\n";
  os << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">"
     << short_number(y0) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << Tm + 10 << "\" text-anchor=\"end\">"
     << short_number(y1) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i]))
      os << px(x[i]) << "," << py(y[i]) << " ";
  os << "\"/>\n</svg>\n";
  return os.str();
}

//******************************************************************************
namespace {

constexpr char magic[8] = {'D', 'L', 'S', 'N', 'A', 'P', '0', '1'};
constexpr std::uint32_t format_version = 1;

class Writer {
public:
  template <typename T> void pod(const T &v) {
    const char *p = reinterpret_cast<const char *>(&v);
    m_out.append(p, sizeof(T));
  }
  void str(const std::string &s) {
    pod(static_cast<std::uint32_t>(s.size()));
    m_out += s;
  }
  void matrix(const Eigen::MatrixXcd &m) {
    pod(static_cast<std::int64_t>(m.rows()));
    pod(static_cast<std::int64_t>(m.cols()));
    m_out.append(reinterpret_cast<const char *>(m.data()),
                 sizeof(cplx) * static_cast<std::size_t>(m.size()));
  }
  void state(const ChannelState &s) {
    matrix(s.plus);
    matrix(s.minus);
  }
  std::string take() { return std::move(m_out); }

private:
  std::string m_out;
};

class Reader {
public:
  explicit Reader(const std::string &b) : m_b(b) {}
  template <typename T> T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, m_b.data() + m_pos, sizeof(T));
    m_pos += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s = m_b.substr(m_pos, n);
    m_pos += n;
    return s;
  }
  Eigen::MatrixXcd matrix(long rows, long cols) {
    const auto r = pod<std::int64_t>();
    const auto c = pod<std::int64_t>();
    if (r != rows || c != cols)
      throw std::runtime_error("snapshot: channel array shape does not match the grid");
    Eigen::MatrixXcd m(r, c);
    const std::size_t bytes = sizeof(cplx) * static_cast<std::size_t>(r * c);
    need(bytes);
    std::memcpy(m.data(), m_b.data() + m_pos, bytes);
    m_pos += bytes;
    return m;
  }
  ChannelState state(const DiscretizationPtr &d) {
    ChannelState s(d);
    const long N = d->radial().size(), n = d->n_channels();
    s.plus = matrix(N, n);
    s.minus = matrix(N, n);
    return s;
  }
  bool done() const { return m_pos == m_b.size(); }

private:
  void need(std::size_t n) const {
    if (m_pos + n > m_b.size())
      throw std::runtime_error("snapshot: truncated file");
  }
  const std::string &m_b;
  std::size_t m_pos = 0;
};

} // namespace

std::string encode_snapshot(const Snapshot &s) {
  if (!s.channels)
    throw std::invalid_argument("snapshot: no channel state");
  Writer w;
  for (char c : magic)
    w.pod(c);
  w.pod(format_version);
  w.pod(s.config_hash);
  w.pod(static_cast<std::int32_t>(s.n_radial));
  w.pod(s.outer_radius);
  w.pod(static_cast<std::int32_t>(s.two_j_max));
  w.pod(static_cast<std::int32_t>(s.angular_degree));
  w.pod(s.t);
  w.pod(s.t_origin);
  w.pod(static_cast<std::int64_t>(s.step));
  w.pod(s.truncation_loss);
  w.pod(s.top_shell_fraction);
  w.state(*s.channels);
  w.pod(static_cast<std::uint32_t>(s.column_names.size()));
  for (const auto &n : s.column_names)
    w.str(n);
  w.pod(static_cast<std::uint64_t>(s.rows.size()));
  for (const auto &r : s.rows) {
    if (r.size() != s.column_names.size())
      throw std::invalid_argument("snapshot: row width differs from the header");
    for (double v : r)
      w.pod(v);
  }
  w.pod(static_cast<std::uint8_t>(s.scattering ? 1 : 0));
  if (s.scattering) {
    const auto &sc = *s.scattering;
    w.pod(static_cast<std::int64_t>(sc.last_sample));
    w.pod(static_cast<std::uint32_t>(sc.slots.size()));
    const auto slot = [&](const diagnostics::ScatteringAccumulator::Slot &sl) {
      w.pod(static_cast<std::int32_t>(sl.count));
      w.pod(static_cast<std::uint8_t>(sl.done));
      w.state(sl.acc);
    };
    for (const auto &sl : sc.slots)
      slot(sl);
    if (!sc.full)
      throw std::invalid_argument("snapshot: scattering state without the full slot");
    slot(*sc.full);
    w.pod(static_cast<std::uint8_t>(sc.full_even ? 1 : 0));
    if (sc.full_even)
      w.state(*sc.full_even);
    w.pod(sc.full_even_t);
  }
  for (char c : std::string("END!"))
    w.pod(c);
  return w.take();
}

Snapshot decode_snapshot(const std::string &bytes, DiscretizationPtr disc) {
  Reader r(bytes);
  for (char c : magic)
    if (r.pod<char>() != c)
      throw std::runtime_error("snapshot: not a DLSNAP01 file");
  if (r.pod<std::uint32_t>() != format_version)
    throw std::runtime_error("snapshot: unsupported format version");
  Snapshot s;
  s.config_hash = r.pod<std::uint64_t>();
  s.n_radial = r.pod<std::int32_t>();
  s.outer_radius = r.pod<double>();
  s.two_j_max = r.pod<std::int32_t>();
  s.angular_degree = r.pod<std::int32_t>();
  if (s.n_radial != disc->radial().size() || s.outer_radius != disc->radial().R() ||
      s.two_j_max != disc->two_j_max() || s.angular_degree != disc->sphere().degree())
    throw std::runtime_error("snapshot: grid descriptor does not match the configuration");
  s.t = r.pod<double>();
  s.t_origin = r.pod<double>();
  s.step = static_cast<long>(r.pod<std::int64_t>());
  s.truncation_loss = r.pod<double>();
  s.top_shell_fraction = r.pod<double>();
  s.channels = r.state(disc);
  const auto ncol = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < ncol; ++i)
    s.column_names.push_back(r.str());
  const auto nrow = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < nrow; ++i) {
    std::vector<double> row(ncol);
    for (auto &v : row)
      v = r.pod<double>();
    s.rows.push_back(std::move(row));
  }
  if (r.pod<std::uint8_t>()) {
    ScatteringSnapshot sc;
    sc.last_sample = static_cast<long>(r.pod<std::int64_t>());
    const auto nslot = r.pod<std::uint32_t>();
    const auto slot = [&] {
      const int count = r.pod<std::int32_t>();
      const bool done = r.pod<std::uint8_t>() != 0;
      return diagnostics::ScatteringAccumulator::Slot{r.state(disc), count, done};
    };
    for (std::uint32_t i = 0; i < nslot; ++i)
      sc.slots.push_back(slot());
    sc.full = slot();
    if (r.pod<std::uint8_t>())
      sc.full_even = r.state(disc);
    sc.full_even_t = r.pod<double>();
    s.scattering = std::move(sc);
  }
  std::string end;
  for (int i = 0; i < 4; ++i)
    end += r.pod<char>();
  if (end != "END!" || !r.done())
    throw std::runtime_error("snapshot: trailing bytes or missing end marker");
  return s;
}

void write_snapshot(const std::string &path, const Snapshot &s) {
  write_file_atomic(path, encode_snapshot(s));
}

Snapshot read_snapshot(const std::string &path, DiscretizationPtr disc) {
  return decode_snapshot(read_file(path), std::move(disc));
}

} // namespace diraclab::io
