#pragma once

#include "diraclab/diagnostics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace diraclab::io {

using angular::ChannelState;
using angular::DiscretizationPtr;

//******************************************************************************
// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string &path, const std::string &content);

// RFC 4180 field quoting.
std::string csv_field(const std::string &s);
// %.17g
std::string csv_number(double x);
std::string series_csv(const diagnostics::DiagnosticsSeries &series);

// Line plot of y against x with axis ranges printed; returns SVG text.
std::string svg_line_plot(const std::vector<double> &x, const std::vector<double> &y,
                          const std::string &title, const std::string &xlabel);

//******************************************************************************
// Binary snapshot "DLSNAP01": grid descriptor, channel arrays, time stamp,
// config hash, diagnostics rows so far and the scattering accumulator.
struct ScatteringSnapshot {
  long last_sample = -1;
  std::vector<diagnostics::ScatteringAccumulator::Slot> slots;
  std::optional<diagnostics::ScatteringAccumulator::Slot> full;
  std::optional<ChannelState> full_even;
  double full_even_t = 0.0;
};

struct Snapshot {
  std::uint64_t config_hash = 0;
  int n_radial = 0;
  double outer_radius = 0.0;
  int two_j_max = 0;
  int angular_degree = 0;
  double t = 0.0;
  double t_origin = 0.0;
  long step = 0;
  double truncation_loss = 0.0;
  double top_shell_fraction = 0.0;
  std::optional<ChannelState> channels;
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;
  std::optional<ScatteringSnapshot> scattering;
};

std::string encode_snapshot(const Snapshot &s);
// The discretization must match the stored grid descriptor; throws
// std::runtime_error on a malformed file or a mismatch.
Snapshot decode_snapshot(const std::string &bytes, DiscretizationPtr disc);

void write_snapshot(const std::string &path, const Snapshot &s);
Snapshot read_snapshot(const std::string &path, DiscretizationPtr disc);

std::string read_file(const std::string &path);

} // namespace diraclab::io
