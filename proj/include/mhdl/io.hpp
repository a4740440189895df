#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhdl/eos.hpp"
#include "mhdl/initial_data.hpp"
#include "mhdl/state.hpp"

namespace mhdl {

// ---- snapshot container ----
//
// little endian throughout
//   "MHDL" | u32 version | u32 dim | u32 nx | u32 sbp order | u64 nodes | f64 t | f64 kappa | f64 lambda | u32 flags
//   payload: f64 fields x (dim), u (dim), B (dim), p, one value per node
//   flags & 1: ladder extension in the payload: u32 N, then for k = 0..N: p_k, B_k (dim)
//   u32 CRC-32 of the payload bytes
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::uint32_t kFlagLadder = 1;

struct Ladder {
  std::vector<ScalarField> p;
  std::vector<VectorField> B;
};

struct Snapshot {
  SimState state;
  double kappa = 0.0, lambda = 0.0;
  std::optional<Ladder> ladder;
};

void write_snapshot(const std::string& path, const SimState& s, const EosParams& eos,
                    const Ladder* ladder = nullptr);
void write_snapshot(const std::string& path, const CompatibleData& data);
// grid is rebuilt from the header; pass one to reuse it (must match)
Snapshot read_snapshot(const std::string& path, GridPtr grid = nullptr);

std::vector<std::uint8_t> encode_snapshot(const SimState& s, const EosParams& eos, const Ladder* ladder = nullptr);
Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes, GridPtr grid = nullptr);

// ---- reports ----

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& values);  // formatted with format_number
};

// shortest round-trip representation, so equal doubles print identically
std::string format_number(double v);
std::string csv_escape(const std::string& field);
std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
struct Plot {
  std::string title, xlabel, ylabel;
  bool loglog = false;
  bool fit_slope = false;  // least-squares slope of log y against log x of the first series, shown in the title
  std::vector<PlotSeries> series;
};
// least-squares slope of log y against log x (points with non-positive values skipped)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
std::string to_svg(const Plot& p);

enum class ReportKind { Csv, Svg };
void emit_report(const Table& t, ReportKind kind, const std::string& path, const Plot* plot = nullptr);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace mhdl
