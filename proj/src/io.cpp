#include "blab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "blab/error.hpp"

namespace blab {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& where) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \r", used) != std::string::npos)
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(where.string() + ": not a number: '" + s + "'");
  }
}

std::vector<std::vector<std::string>> read_cells(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  return rows;
}

// nlohmann prints the shortest round-trip form; floats here use %.17g.
void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += "{\n";
      size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        out += pad + "  " + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          dump(j[k], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        out += pad + "  ";
        dump(j[k], out, indent + 2);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

Json to_json(const std::vector<int>& v) { return Json(v); }

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue-white-red for t in [-1, 1].
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t < 0) {
    r = g = static_cast<int>(std::lround(255 * (1 + t)));
  } else {
    g = b = static_cast<int>(std::lround(255 * (1 - t)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw NumericalError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const Json& doc) {
  std::string s;
  dump(doc, s, 0);
  write_text(path, s + "\n");
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_csv(const fs::path& path, const CsvTable& t) {
  std::string s;
  for (size_t k = 0; k < t.header.size(); ++k) s += (k ? "," : "") + t.header[k];
  s += "\n";
  for (const auto& row : t.rows) {
    for (size_t k = 0; k < row.size(); ++k) {
      if (k) s += ",";
      s += format_double(row[k]);
    }
    s += "\n";
  }
  write_text(path, s);
}

CsvTable read_csv(const fs::path& path) {
  auto cells = read_cells(path);
  if (cells.empty()) throw InvalidArgument(path.string() + ": empty CSV");
  CsvTable t;
  t.header = cells[0];
  for (size_t r = 1; r < cells.size(); ++r) {
    if (cells[r].size() != t.header.size())
      throw InvalidArgument(path.string() + ": row " + std::to_string(r) + " has " +
                            std::to_string(cells[r].size()) + " fields, header has " +
                            std::to_string(t.header.size()));
    std::vector<double> row;
    for (const auto& c : cells[r]) row.push_back(parse_double(c, path));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json grid_to_json(const Grid& g) {
  return Json{{"Lx", g.Lx()}, {"Ly", g.Ly()}, {"nx", g.nx()}, {"ny", g.ny()},
              {"hx", g.hx()}, {"hy", g.hy()}};
}

Grid grid_from_json(const Json& j) {
  try {
    return Grid(j.at("Lx").get<double>(), j.at("Ly").get<double>(), j.at("nx").get<int>(),
                j.at("ny").get<int>());
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("domain: ") + e.what());
  }
}

Json potential_to_json(const Grid& g, const Potential& q) {
  std::vector<double> v(q.values().data(), q.values().data() + q.values().size());
  return Json{{"grid", grid_to_json(g)}, {"M", q.sup_bound()}, {"values", v}};
}

Potential potential_from_spec(const Grid& g, const Json& spec) {
  using std::numbers::pi;
  try {
    const std::string type = spec.at("type").get<std::string>();
    std::function<double(double, double)> fn;
    if (type == "constant") {
      const double c = spec.at("value").get<double>();
      fn = [c](double, double) { return c; };
    } else if (type == "bump" || type == "bumps") {
      struct Term { double a; int m, k; };
      std::vector<Term> terms;
      auto term = [](const Json& t) {
        return Term{t.at("amplitude").get<double>(), t.value("m", 1), t.value("k", 1)};
      };
      if (type == "bump") {
        terms.push_back(term(spec));
      } else {
        for (const auto& t : spec.at("terms")) terms.push_back(term(t));
      }
      const double Lx = g.Lx(), Ly = g.Ly();
      fn = [terms, Lx, Ly](double x, double y) {
        double s = 0;
        for (const auto& t : terms) s += t.a * std::sin(t.m * pi * x / Lx) * std::sin(t.k * pi * y / Ly);
        return s;
      };
    } else {
      throw InvalidArgument("unknown potential type '" + type + "'");
    }
    if (spec.contains("M")) return sample_potential(fn, g, spec.at("M").get<double>());
    double sup = 0;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) sup = std::max(sup, std::abs(fn(g.x(i), g.y(j))));
    return sample_potential(fn, g, sup);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("potential: ") + e.what());
  }
}

LoadedPotential load_potential(const fs::path& path) {
  const Json j = read_json(path);
  try {
    if (j.contains("values")) {
      Grid g = grid_from_json(j.at("grid"));
      const auto v = j.at("values").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != g.interior_size())
        throw InvalidArgument(path.string() + ": expected " + std::to_string(g.interior_size()) +
                              " values, got " + std::to_string(v.size()));
      Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
      return {g, Potential(g, q, j.at("M").get<double>())};
    }
    Grid g = grid_from_json(j.at("domain"));
    return {g, potential_from_spec(g, j.at("potential"))};
  } catch (const Json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_boundary_csv(const fs::path& path, const Grid& g, const BoundaryFunction& f) {
  require_same_grid(g.shape(), f.shape(), "write_boundary_csv");
  std::string s = "edge,arclength,re,im\n";
  for (int k = 0; k < g.boundary_size(); ++k) {
    const auto& b = g.boundary()[k];
    s += std::string(edge_name(b.edge)) + "," + format_double(b.arclength) + "," +
         format_double(f[k].real()) + "," + format_double(f[k].imag()) + "\n";
  }
  write_text(path, s);
}

BoundaryFunction read_boundary_csv(const fs::path& path, const Grid& g) {
  auto cells = read_cells(path);
  if (cells.size() != static_cast<size_t>(g.boundary_size()) + 1)
    throw InvalidArgument(path.string() + ": expected " + std::to_string(g.boundary_size()) +
                          " boundary rows, got " + std::to_string(cells.size() - 1));
  BoundaryFunction f(g);
  for (int k = 0; k < g.boundary_size(); ++k) {
    const auto& row = cells[k + 1];
    if (row.size() != 4) throw InvalidArgument(path.string() + ": expected edge,arclength,re,im");
    const auto& b = g.boundary()[k];
    if (parse_edge(row[0]) != b.edge ||
        std::abs(parse_double(row[1], path) - b.arclength) > 1e-9 * g.perimeter())
      throw InvalidArgument(path.string() + ": row " + std::to_string(k + 1) +
                            " does not match the grid's boundary ordering");
    f.values()[k] = Complex(parse_double(row[2], path), parse_double(row[3], path));
  }
  return f;
}

void save_bsd(const fs::path& dir, const BoundarySpectralData& bsd) {
  fs::create_directories(dir);
  write_json(dir / "meta.json", Json{{"grid", grid_to_json(bsd.grid())},
                                     {"M", bsd.sup_bound()},
                                     {"K", bsd.size()},
                                     {"trace", "one-point"}});
  CsvTable t{{"n", "lambda"}, {}};
  for (int n = 0; n < bsd.size(); ++n) t.rows.push_back({double(n + 1), bsd[n].lambda});
  write_csv(dir / "lambdas.csv", t);
  for (int n = 0; n < bsd.size(); ++n)
    write_boundary_csv(dir / ("psi_" + std::to_string(n + 1) + ".csv"), bsd.grid(), bsd[n].psi);
}

BoundarySpectralData load_bsd(const fs::path& dir) {
  const Json meta = read_json(dir / "meta.json");
  Grid g = grid_from_json(meta.at("grid"));
  const int K = meta.at("K").get<int>();
  const auto lam = read_csv(dir / "lambdas.csv");
  if (static_cast<int>(lam.rows.size()) != K)
    throw InvalidArgument(dir.string() + ": lambdas.csv has " + std::to_string(lam.rows.size()) +
                          " rows, meta says K = " + std::to_string(K));
  std::vector<EigenPair> pairs(K);
  for (int n = 0; n < K; ++n) {
    pairs[n].lambda = lam.rows[n].at(1);
    pairs[n].psi = read_boundary_csv(dir / ("psi_" + std::to_string(n + 1) + ".csv"), g);
  }
  return BoundarySpectralData(g, meta.at("M").get<double>(), std::move(pairs));
}

void save_traces(const fs::path& dir, const Grid& g, const TraceSet& t) {
  fs::create_directories(dir);
  const auto& p = t.pulse;
  write_json(dir / "traces.json",
             Json{{"grid", grid_to_json(g)},
                  {"gamma_in", to_json(t.in)},
                  {"gamma_out", to_json(t.out)},
                  {"pulse", {{"width", p.pulse}, {"dt", p.dt}, {"t_first", p.t_first},
                             {"ds", p.ds}, {"samples", p.samples}}}});
  CsvTable c;
  c.header = {"in", "out"};
  for (int k = 0; k < t.values.cols(); ++k) c.header.push_back("s" + std::to_string(k));
  const size_t nout = t.out.size();
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    std::vector<double> row{double(t.in[r / nout]), double(t.out[r % nout])};
    for (int k = 0; k < t.values.cols(); ++k) row.push_back(t.values(r, k));
    c.rows.push_back(std::move(row));
  }
  write_csv(dir / "traces.csv", c);
}

TraceSet load_traces(const fs::path& dir) {
  const Json meta = read_json(dir / "traces.json");
  TraceSet t;
  try {
    t.in = meta.at("gamma_in").get<std::vector<int>>();
    t.out = meta.at("gamma_out").get<std::vector<int>>();
    const auto& p = meta.at("pulse");
    t.pulse = {p.at("width").get<double>(), p.at("dt").get<double>(), p.at("t_first").get<double>(),
               p.at("ds").get<double>(), p.at("samples").get<int>()};
  } catch (const Json::exception& e) {
    throw InvalidArgument(dir.string() + "/traces.json: " + e.what());
  }
  const auto c = read_csv(dir / "traces.csv");
  const size_t channels = t.in.size() * t.out.size();
  if (c.rows.size() != channels || c.header.size() != size_t(t.pulse.samples) + 2)
    throw InvalidArgument(dir.string() + "/traces.csv: shape does not match traces.json");
  t.values.resize(channels, t.pulse.samples);
  for (size_t r = 0; r < channels; ++r) {
    if (int(c.rows[r][0]) != t.in[r / t.out.size()] || int(c.rows[r][1]) != t.out[r % t.out.size()])
      throw InvalidArgument(dir.string() + "/traces.csv: channel order does not match traces.json");
    for (int k = 0; k < t.pulse.samples; ++k) t.values(r, k) = c.rows[r][k + 2];
  }
  return t;
}

Json expsum_to_json(const ExpSumModel& m, const std::vector<int>& in, const std::vector<int>& out) {
  Json amps = Json::array();
  for (Eigen::Index r = 0; r < m.amplitudes.rows(); ++r) {
    std::vector<double> a(m.amplitudes.cols());
    for (Eigen::Index c = 0; c < m.amplitudes.cols(); ++c) a[c] = m.amplitudes(r, c);
    Json row{{"in", in.empty() ? -1 : in[r / out.size()]},
             {"out", out.empty() ? -1 : out[r % out.size()]},
             {"amplitudes", a}};
    amps.push_back(row);
  }
  return Json{{"rates", m.rates},
              {"residual", m.residual},
              {"rank_collapsed", m.rank_collapsed},
              {"refined", m.refined},
              {"pairs", amps}};
}

void write_line_plot(const fs::path& dir, const std::string& stem, const PlotSpec& spec) {
  CsvTable t{{"series", "x", "y"}, {}};
  for (size_t s = 0; s < spec.series.size(); ++s)
    for (size_t k = 0; k < spec.series[s].x.size(); ++k)
      t.rows.push_back({double(s), spec.series[s].x[k], spec.series[s].y[k]});
  write_csv(dir / (stem + ".csv"), t);

  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : spec.series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      if ((spec.logx && !(s.x[k] > 0)) || (spec.logy && !(s.y[k] > 0))) continue;
      x0 = std::min(x0, tx(s.x[k])); x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, ty(s.y[k])); y1 = std::max(y1, ty(s.y[k]));
    }
  if (x0 > x1) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(spec.title) << "</text>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape_xml(spec.xlabel) << (spec.logx ? " (log10)" : "") << "</text>\n"
      << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << H / 2 << ")\">" << escape_xml(spec.ylabel) << (spec.logy ? " (log10)" : "") << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    const double sx = ml + (W - ml - mr) * k / 4, sy = H - mb - (H - mt - mb) * k / 4;
    svg << "<text x=\"" << svg_number(sx) << "\" y=\"" << H - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_double(std::round(xv * 1000) / 1000)
        << "</text>\n<text x=\"" << ml - 6 << "\" y=\"" << svg_number(sy + 4)
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(std::round(yv * 1000) / 1000)
        << "</text>\n";
  }
  for (size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    svg << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < ser.x.size(); ++k) {
      if ((spec.logx && !(ser.x[k] > 0)) || (spec.logy && !(ser.y[k] > 0))) continue;
      svg << svg_number(px(ser.x[k])) << "," << svg_number(py(ser.y[k])) << " ";
    }
    svg << "\"/>\n<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 14 * s
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colors[s % 6] << "\">"
        << escape_xml(ser.label) << "</text>\n";
  }
  svg << "</svg>\n";
  write_text(dir / (stem + ".svg"), svg.str());

  std::ostringstream gp;
  gp << "set datafile separator ','\nset key autotitle columnhead\n"
     << "set terminal svg size 640,400\nset output '" << stem << ".gp.svg'\n"
     << "set title '" << spec.title << "'\nset xlabel '" << spec.xlabel << "'\nset ylabel '"
     << spec.ylabel << "'\n";
  if (spec.logx) gp << "set logscale x\n";
  if (spec.logy) gp << "set logscale y\n";
  gp << "plot ";
  for (size_t s = 0; s < spec.series.size(); ++s)
    gp << (s ? ", \\\n     " : "") << "'" << stem << ".csv' using 2:($1 == " << s
       << " ? $3 : 1/0) with linespoints title '" << spec.series[s].label << "'";
  gp << "\n";
  write_text(dir / (stem + ".gp"), gp.str());
}

void write_heatmap(const fs::path& dir, const std::string& stem, const Grid& g,
                   const Eigen::VectorXd& v, const std::string& title) {
  CsvTable t{{"x", "y", "value"}, {}};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) t.rows.push_back({g.x(i), g.y(j), v[g.index(i, j)]});
  write_csv(dir / (stem + ".csv"), t);

  // At most 128 cells per side; each cell shows the node nearest its center.
  const int cx = std::min(g.nx(), 128), cy = std::min(g.ny(), 128);
  const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  const double S = 480, m = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << S + 2 * m << "\" height=\""
      << S + 2 * m << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << S / 2 + m << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(title) << " (max |value| " << format_double(scale) << ")</text>\n";
  for (int b = 0; b < cy; ++b)
    for (int a = 0; a < cx; ++a) {
      const int i = std::min(g.nx() - 1, (2 * a + 1) * g.nx() / (2 * cx));
      const int j = std::min(g.ny() - 1, (2 * b + 1) * g.ny() / (2 * cy));
      svg << "<rect x=\"" << svg_number(m + a * S / cx) << "\" y=\""
          << svg_number(m + (cy - 1 - b) * S / cy) << "\" width=\"" << svg_number(S / cx + 0.5)
          << "\" height=\"" << svg_number(S / cy + 0.5) << "\" fill=\""
          << diverging(v[g.index(i, j)] / scale) << "\"/>\n";
    }
  svg << "</svg>\n";
  write_text(dir / (stem + ".svg"), svg.str());

  write_text(dir / (stem + ".gp"),
             "set datafile separator ','\nset terminal svg size 560,520\nset output '" + stem +
                 ".gp.svg'\nset title '" + title + "'\nset view map\nset size ratio -1\n"
                 "set palette defined (-1 'blue', 0 'white', 1 'red')\n"
                 "plot '" + stem + ".csv' every ::1 using 1:2:3 with image notitle\n");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw NumericalError("SHA-256 failed");
  std::ostringstream os;
  for (unsigned k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

}  // namespace blab
