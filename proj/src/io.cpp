#include "mhdl/io.hpp"

#include <algorithm>
#include <bit>
#include <boost/crc.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace mhdl {

namespace {

class Writer {
 public:
  std::vector<std::uint8_t> bytes;
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void field(const ScalarField& f) {
    for (double v : f) f64(v);
  }
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t pos, std::size_t end) : b_(b), pos_(pos), end_(end) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  ScalarField field(std::size_t n) {
    need(8 * n);
    ScalarField f(n);
    for (double& v : f) v = f64();
    return f;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw Error(ErrorKind::Integrity, "snapshot: truncated data");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_, end_;
};

std::uint32_t crc32(const std::uint8_t* p, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(p, n);
  return crc.checksum();
}

constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 4 + 8 + 8 + 8 + 8 + 4;

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const SimState& s, const EosParams& eos, const Ladder* ladder) {
  const int d = s.dim();
  Writer w;
  for (char c : std::string("MHDL")) w.bytes.push_back(static_cast<std::uint8_t>(c));
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(s.grid->nx()));
  w.u32(static_cast<std::uint32_t>(s.grid->sbp().interior_order()));
  w.u64(s.size());
  w.f64(s.t);
  w.f64(eos.kappa);
  w.f64(eos.lambda);
  w.u32(ladder ? kFlagLadder : 0u);
  const std::size_t start = w.bytes.size();
  for (const auto* v : {&s.x, &s.u, &s.B})
    for (int i = 0; i < d; ++i) w.field((*v)[i]);
  w.field(s.p);
  if (ladder) {
    if (ladder->p.empty() || ladder->p.size() != ladder->B.size())
      throw Error(ErrorKind::Precondition, "snapshot: ladder needs matching non-empty p and B levels");
    w.u32(static_cast<std::uint32_t>(ladder->p.size() - 1));
    for (std::size_t k = 0; k < ladder->p.size(); ++k) {
      w.field(ladder->p[k]);
      for (int i = 0; i < d; ++i) w.field(ladder->B[k][i]);
    }
  }
  w.u32(crc32(w.bytes.data() + start, w.bytes.size() - start));
  return w.bytes;
}

Snapshot decode_snapshot(const std::vector<std::uint8_t>& b, GridPtr grid) {
  if (b.size() < kHeaderBytes + 4 || std::string(b.begin(), b.begin() + 4) != "MHDL")
    throw Error(ErrorKind::Integrity, "snapshot: bad magic");
  Reader hr(b, 4, b.size());
  const std::uint32_t version = hr.u32();
  if (version != kSnapshotVersion)
    throw Error(ErrorKind::Version, "snapshot: unsupported format version " + std::to_string(version));
  const int d = static_cast<int>(hr.u32());
  const int nx = static_cast<int>(hr.u32());
  const int sbp = static_cast<int>(hr.u32());
  const std::uint64_t n = hr.u64();
  Snapshot out;
  out.state.t = hr.f64();
  out.kappa = hr.f64();
  out.lambda = hr.f64();
  const std::uint32_t flags = hr.u32();

  const std::size_t start = hr.pos(), end = b.size() - 4;
  Reader cr(b, end, b.size());
  if (cr.u32() != crc32(b.data() + start, end - start)) throw Error(ErrorKind::Integrity, "snapshot: CRC mismatch");

  if (!grid) grid = make_grid(d, nx, sbp);
  if (grid->dim() != d || grid->nx() != nx || grid->size() != n)
    throw Error(ErrorKind::Integrity, "snapshot: grid does not match the header");
  Reader r(b, start, end);
  SimState& s = out.state;
  s.grid = grid;
  for (auto* v : {&s.x, &s.u, &s.B}) {
    v->resize(d);
    for (int i = 0; i < d; ++i) (*v)[i] = r.field(n);
  }
  s.p = r.field(n);
  if (flags & kFlagLadder) {
    Ladder L;
    const std::uint32_t N = r.u32();
    if (N > 64) throw Error(ErrorKind::Integrity, "snapshot: implausible ladder order");
    for (std::uint32_t k = 0; k <= N; ++k) {
      L.p.push_back(r.field(n));
      VectorField B(d);
      for (int i = 0; i < d; ++i) B[i] = r.field(n);
      L.B.push_back(std::move(B));
    }
    out.ladder = std::move(L);
  }
  if (r.pos() != end) throw Error(ErrorKind::Integrity, "snapshot: trailing bytes in the payload");
  return out;
}

void write_snapshot(const std::string& path, const SimState& s, const EosParams& eos, const Ladder* ladder) {
  const auto bytes = encode_snapshot(s, eos, ladder);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorKind::Io, "write failed: " + path);
}

void write_snapshot(const std::string& path, const CompatibleData& data) {
  EosParams eos;
  eos.kappa = data.kappa;
  eos.lambda = data.lambda;
  Ladder L{data.p, data.B};
  write_snapshot(path, data.state(), eos, &L);
}

Snapshot read_snapshot(const std::string& path, GridPtr grid) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, std::move(grid));
}

// ---- CSV ----

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void Table::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_number(v));
  rows.push_back(std::move(row));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(r[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(field);
      rows.push_back(row);
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::Integrity, "csv: unterminated quoted field");
  if (any) {
    row.push_back(field);
    rows.push_back(row);
  }
  Table t;
  if (!rows.empty()) {
    t.header = rows.front();
    t.rows.assign(rows.begin() + 1, rows.end());
  }
  return t;
}

// ---- SVG ----

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  return den != 0 ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
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

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

}  // namespace

std::string to_svg(const Plot& p) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  std::string title = p.title;
  if (p.fit_slope && !p.series.empty()) title += " (slope " + fmt(loglog_slope(p.series[0].x, p.series[0].y), 3) + ")";
  auto tx = [&](double v) { return p.loglog ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const double a = tx(s.x[i]), b = tx(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double a) { return ml + (a - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double b) { return H - mb - (b - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<title>" << xml_escape(title) << "</title>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << xml_escape(title) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double v) { return p.loglog ? "1e" + fmt(v, 3) : fmt(v); };
  for (int k = 0; k <= 4; ++k) {
    const double a = x0 + (x1 - x0) * k / 4, b = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << px(a) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << label(a) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(b) + 3 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << label(b) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\">" << xml_escape(p.xlabel) << "</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 14 " << H / 2 << ")\">" << xml_escape(p.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* col = colors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const double a = tx(s.x[i]), b = tx(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      pts += fmt(px(a), 6) + "," + fmt(py(b), 6) + " ";
      os << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
    }
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 14 * k << "\" font-family=\"sans-serif\" font-size=\"11\" "
       << "fill=\"" << col << "\">" << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorKind::Io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void emit_report(const Table& t, ReportKind kind, const std::string& path, const Plot* plot) {
  if (kind == ReportKind::Csv) {
    write_text(path, to_csv(t));
    return;
  }
  if (!plot) throw Error(ErrorKind::Precondition, "emit_report: an SVG report needs a plot description");
  write_text(path, to_svg(*plot));
}

}  // namespace mhdl
