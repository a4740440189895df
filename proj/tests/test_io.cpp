#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "mhdl/grid.hpp"
#include "mhdl/io.hpp"
#include "mhdl/types.hpp"

using namespace mhdl;
namespace fs = std::filesystem;

namespace {

SimState random_state(GridPtr g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  SimState s = rest_state(g);
  s.t = 0.123456789;
  for (auto* v : {&s.x, &s.u, &s.B})
    for (auto& c : *v)
      for (double& a : c) a = N(rng);
  for (double& a : s.p) a = N(rng);
  return s;
}

bool same_bits(const ScalarField& a, const ScalarField& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_state(const SimState& a, const SimState& b) {
  if (a.t != b.t || a.x.size() != b.x.size()) return false;
  for (std::size_t i = 0; i < a.x.size(); ++i)
    if (!same_bits(a.x[i], b.x[i]) || !same_bits(a.u[i], b.u[i]) || !same_bits(a.B[i], b.B[i])) return false;
  return same_bits(a.p, b.p);
}

ErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_snapshot(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Config;  // not reached when decoding fails
}

constexpr std::size_t kHeaderBytes = 4 + 4 * 4 + 8 + 8 * 3 + 4;

}  // namespace

TEST_CASE("snapshot round trip is bit identical") {
  const GridPtr g = make_grid(2, 28);
  EosParams eos;
  eos.kappa = 250;
  eos.lambda = 0.05;
  for (const SimState& s : {rest_state(g), random_state(g, 7)}) {
    const auto bytes = encode_snapshot(s, eos);
    const Snapshot back = decode_snapshot(bytes);
    CHECK(same_state(s, back.state));
    CHECK(back.kappa == 250.0);
    CHECK(back.lambda == 0.05);
    CHECK_FALSE(back.ladder.has_value());
    CHECK(encode_snapshot(back.state, eos) == bytes);
  }
}

TEST_CASE("snapshot file round trip, 3d") {
  const GridPtr g = make_grid(3, 28);
  const SimState s = random_state(g, 3);
  const fs::path dir = fs::temp_directory_path() / "mhdl_io_test";
  fs::create_directories(dir);
  const auto path = (dir / "s.mhdl").string();
  write_snapshot(path, s, EosParams{});
  const Snapshot back = read_snapshot(path, g);
  CHECK(back.state.grid == g);
  CHECK(same_state(s, back.state));
  fs::remove_all(dir);
}

TEST_CASE("ladder extension round trip") {
  const GridPtr g = make_grid(2, 28);
  const SimState s = random_state(g, 11);
  Ladder L;
  for (int k = 0; k < 3; ++k) {
    const SimState r = random_state(g, 100 + k);
    L.p.push_back(r.p);
    L.B.push_back(r.B);
  }
  const Snapshot back = decode_snapshot(encode_snapshot(s, EosParams{}, &L));
  REQUIRE(back.ladder.has_value());
  REQUIRE(back.ladder->p.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(same_bits(back.ladder->p[k], L.p[k]));
    for (int i = 0; i < 2; ++i) CHECK(same_bits(back.ladder->B[k][i], L.B[k][i]));
  }
}

TEST_CASE("corrupt snapshots are rejected") {
  const GridPtr g = make_grid(2, 28);
  const auto good = encode_snapshot(random_state(g, 5), EosParams{});

  auto flipped = good;
  flipped[kHeaderBytes + 17] ^= 0x10;
  CHECK(kind_of(flipped) == ErrorKind::Integrity);

  auto crc = good;
  crc.back() ^= 0x01;
  CHECK(kind_of(crc) == ErrorKind::Integrity);

  auto truncated = good;
  truncated.resize(good.size() / 2);
  CHECK(kind_of(truncated) == ErrorKind::Integrity);

  auto version = good;
  version[4] = 9;
  CHECK(kind_of(version) == ErrorKind::Version);

  auto magic = good;
  magic[0] = 'X';
  CHECK(kind_of(magic) == ErrorKind::Integrity);

  // grid passed in must match the header
  CHECK_THROWS_AS(decode_snapshot(good, make_grid(2, 32)), Error);
  CHECK_THROWS_AS(read_snapshot("/nonexistent/dir/none.mhdl"), Error);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(std::stod(format_number(0.1)) == 0.1);
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv") {
  Table empty;
  empty.header = {"t", "E"};
  CHECK(to_csv(empty) == "t,E\r\n");
  CHECK(parse_csv(to_csv(empty)).rows.empty());

  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

  Table t;
  t.header = {"name", "value"};
  t.rows = {{"a,b", "1"}, {"q\"uote", "2"}, {"multi\nline", "3"}};
  const Table back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);

  Table n;
  n.header = {"x", "y"};
  n.add({0.1, 2.0});
  CHECK(to_csv(n) == "x,y\r\n0.1,2\r\n");
}

TEST_CASE("plots") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 / (v * v));
  CHECK(loglog_slope(x, y) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(loglog_slope({1, 2, 3}, {0, 1, 2}) == doctest::Approx(std::log(2.0) / std::log(1.5)));

  Plot p;
  p.title = "decay";
  p.loglog = true;
  p.fit_slope = true;
  p.series.push_back({"err", x, y});
  const std::string svg = to_svg(p);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("decay") != std::string::npos);
  CHECK(svg.find("-2") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
