// blab: command-line front end. Exit codes: 0 ok, 2 invalid input, 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "blab/bvp.hpp"
#include "blab/config.hpp"
#include "blab/error.hpp"
#include "blab/io.hpp"
#include "blab/isozaki.hpp"
#include "blab/parabolic.hpp"
#include "blab/run.hpp"
#include "blab/stability.hpp"

using namespace blab;

namespace {

std::vector<double> parse_pair(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(what) + ": cannot parse '" + s + "'");
    }
  }
  if (v.empty() || v.size() > 2) throw InvalidArgument(std::string(what) + ": expected a or a,b");
  if (v.size() == 1) v.push_back(0);
  return v;
}

void same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("the two potentials live on different grids");
}

int cmd_bsd(const std::string& config, const std::string& qfile, int K, const fs::path& out) {
  if (config.empty() == qfile.empty()) throw InvalidArgument("bsd needs exactly one of --config or --q");
  std::optional<LoadedPotential> lp;
  if (!config.empty()) {
    const auto c = load_config(config);
    const Grid g(c.domain.Lx, c.domain.Ly, c.domain.nx, c.domain.ny);
    lp.emplace(LoadedPotential{g, potential_from_spec(g, c.q1)});
    if (K <= 0) K = c.bsd.K;
  } else {
    lp.emplace(load_potential(qfile));
  }
  if (K <= 0) K = 10;
  save_bsd(out, eigenpairs(assemble(lp->grid, lp->q), K));
  return 0;
}

int cmd_solve(const std::string& qfile, const std::string& lambda, const std::string& ffile,
              const std::string& route, int K, const fs::path& out) {
  const auto lp = load_potential(qfile);
  const auto l = parse_pair(lambda, "--lambda");
  const Complex lam(l[0], l[1]);
  const auto f = read_boundary_csv(ffile, lp.grid);
  if (route != "direct" && route != "series") throw InvalidArgument("--route must be direct or series");
  const ComplexField u = route == "direct"
                             ? solve_direct({lp.grid, lp.q, lam, f, {}})
                             : solve_series(eigenpairs(assemble(lp.grid, lp.q), K), f, lam, K);
  const Grid& g = lp.grid;
  CsvTable t{{"x", "y", "re", "im"}, {}};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Complex v = u.values[g.index(i, j)];
      t.rows.push_back({g.x(i), g.y(j), v.real(), v.imag()});
    }
  write_csv(out / "field.csv", t);
  write_boundary_csv(out / "neumann.csv", g, normal_trace(u.values, f, g));
  return 0;
}

int cmd_isozaki(const std::string& q1f, const std::string& q2f, const std::string& xis,
                double tau_max, double ratio, const fs::path& out) {
  const auto a = load_potential(q1f), b = load_potential(q2f);
  same_grid(a.grid, b.grid);
  const auto v = parse_pair(xis, "--xi");
  const Vec2 xi(v[0], v[1]);
  const auto fe = fourier_estimate(a.grid, a.q, b.q, xi, tau_schedule(xi.norm(), tau_max, a.grid, ratio));
  CsvTable t{{"tau", "re", "im"}, {}};
  for (const auto& s : fe.samples) t.rows.push_back({s.tau, s.s.real(), s.s.imag()});
  write_csv(out, t);
  std::cout << "estimate " << format_double(fe.value.real()) << " " << format_double(fe.value.imag()) << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& q1f, const std::string& q2f, double xi_max, double tau_max,
                    const fs::path& out) {
  const auto a = load_potential(q1f), b = load_potential(q2f);
  same_grid(a.grid, b.grid);
  const auto r = reconstruct_difference(a.grid, a.q, b.q, xi_max, tau_max);
  write_heatmap(out, "field", a.grid, r.field, "reconstructed q1 - q2");
  CsvTable s{{"xi_x", "xi_y", "re", "im"}, {}};
  for (const auto& p : r.spectrum) s.rows.push_back({p.xi.x(), p.xi.y(), p.value.real(), p.value.imag()});
  write_csv(out / "spectrum.csv", s);
  std::cout << "imag_residual " << format_double(r.imag_residual) << "\n";
  if (r.warning) std::cerr << "warning: imaginary residual above 5%\n";
  return 0;
}

int cmd_stability(const std::string& q1f, const fs::path& family_dir, int K, const fs::path& out) {
  const auto a = load_potential(q1f);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(family_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument(family_dir.string() + ": no .json potentials");
  std::vector<Potential> family;
  for (const auto& f : files) {
    auto b = load_potential(f);
    same_grid(a.grid, b.grid);
    family.push_back(b.q);
  }
  const auto r = hoelder_experiment(a.grid, a.q, family, K);
  CsvTable t{{"member", "delta", "l2_diff", "ratio", "h1", "h1_ok", "skipped"}, {}};
  Series s{"l2_diff", {}, {}};
  for (size_t k = 0; k < r.rows.size(); ++k) {
    const auto& w = r.rows[k];
    t.rows.push_back({double(k), w.delta, w.l2_diff, w.ratio, w.h1, double(w.h1_ok), double(w.skipped)});
    if (!w.skipped) {
      s.x.push_back(w.delta);
      s.y.push_back(w.l2_diff);
    }
  }
  write_csv(out / "table.csv", t);
  write_line_plot(out, "hoelder", {"||q1 - q2|| against delta", "delta", "l2_diff", true, true, {s}});
  std::cout << "spread " << format_double(r.spread) << " slope " << format_double(r.slope) << "\n";
  if (!r.note.empty()) std::cerr << "note: " << r.note << "\n";
  return 0;
}

int cmd_parabolic(const std::string& qfile, const std::string& gfile, const std::string& hfile,
                  double T0, double T, double eps, int nt, const fs::path& out) {
  const auto lp = load_potential(qfile);
  const Grid& g = lp.grid;
  const auto f = read_boundary_csv(gfile, g);
  const auto h = read_csv(hfile);
  if (h.header.size() != 2) throw InvalidArgument(hfile + ": expected two columns t,h");
  std::vector<double> t, v;
  for (const auto& r : h.rows) {
    t.push_back(r[0]);
    v.push_back(r[1]);
  }
  if (T <= 0) T = 2 * T0;
  if (eps <= 0) eps = T0 / 4;
  Gammas gam;
  for (int k = 0; k < g.boundary_size(); ++k) gam.out.push_back(k);
  const auto tr = parabolic_dn(g, lp.q, {f, interpolate_signal(t, v), eps, T, T0}, nt, gam);
  BoundaryFunction flux(g);
  for (int k = 0; k < g.boundary_size(); ++k) flux.values()[k] = tr.flux[k];
  write_boundary_csv(out, g, flux);
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_extract(const fs::path& dir, int K, const fs::path& out) {
  const auto traces = load_traces(dir);
  const auto rec = recover_from_traces(traces, K);
  write_json(out / "model.json", expsum_to_json(rec.model, traces.in, traces.out));
  CsvTable ev{{"n", "lambda"}, {}};
  for (size_t k = 0; k < rec.clusters.size(); ++k) ev.rows.push_back({double(k + 1), rec.clusters[k].lambda});
  write_csv(out / "eigenvalues.csv", ev);
  if (rec.model.rank_collapsed) std::cerr << "warning: rank collapsed, fewer rates than requested\n";
  return 0;
}

int cmd_match(const fs::path& b1, const fs::path& b2, int overlap, const fs::path& out) {
  const auto a = load_bsd(b1), b = load_bsd(b2);
  const auto al = match_eigenbases(a, b, default_gammas(a.grid(), overlap));
  Json clusters = Json::array();
  for (const auto& c : al) {
    Json m = Json::array();
    for (Eigen::Index i = 0; i < c.M.rows(); ++i) {
      std::vector<double> row(c.M.cols());
      for (Eigen::Index j = 0; j < c.M.cols(); ++j) row[j] = c.M(i, j);
      m.push_back(row);
    }
    clusters.push_back({{"first", c.cluster.first + 1},
                        {"size", c.cluster.size},
                        {"lambda", c.cluster.lambda},
                        {"points", c.points},
                        {"M", m},
                        {"orthogonality", c.orthogonality},
                        {"residual", c.residual}});
  }
  write_json(out, Json{{"clusters", clusters}});
  return 0;
}

int cmd_validate(const fs::path& config) {
  const auto d = validate_document(read_json(config));
  for (const auto& s : d) std::cout << s << "\n";
  if (d.empty()) std::cout << "ok\n";
  return d.empty() ? 0 : 2;
}

int cmd_run(const fs::path& config, fs::path out) {
  const auto c = load_config(config);
  if (out.empty()) out = c.output;
  if (out.empty()) throw InvalidArgument("run needs --out or an \"output\" entry in the config");
  const auto m = run(c, out);
  for (const auto& s : m.stages) std::cout << s.name << " " << format_double(s.seconds) << " s\n";
  std::cout << "wrote " << m.files.size() << " files to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary spectral data laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (overrides BLAB_WORKERS)");

  std::string config, q, q1, q2, f, g, h, lambda, xi, route = "direct", traces, bsd1, bsd2, family;
  std::string out;
  int K = 0, Ks = 200, nt = 512, overlap = -1;
  double tau_max = 40, ratio = 1.3, xi_max = 0, T0 = 0, T = 0, eps = 0;
  std::function<int()> action;

  auto* bsd = app.add_subcommand("bsd", "boundary spectral data of a potential");
  bsd->add_option("--config", config, "experiment config (domain, q1, bsd.K)");
  bsd->add_option("--q", q, "potential JSON");
  bsd->add_option("--K", K, "number of eigenpairs");
  bsd->add_option("--out", out, "output directory")->required();
  bsd->callback([&] { action = [&] { return cmd_bsd(config, q, K, out); }; });

  auto* solve = app.add_subcommand("solve", "shifted Dirichlet problem");
  solve->add_option("--q", q)->required();
  solve->add_option("--lambda", lambda, "re[,im]")->required();
  solve->add_option("--f", f, "boundary data CSV")->required();
  solve->add_option("--route", route)->check(CLI::IsMember({"direct", "series"}));
  solve->add_option("--K", Ks, "series truncation");
  solve->add_option("--out", out, "output directory")->required();
  solve->callback([&] { action = [&] { return cmd_solve(q, lambda, f, route, Ks, out); }; });

  auto* iso = app.add_subcommand("isozaki", "S_tau sweep and Fourier estimate");
  iso->add_option("--q1", q1)->required();
  iso->add_option("--q2", q2)->required();
  iso->add_option("--xi", xi, "fx,fy")->required();
  iso->add_option("--tau-max", tau_max);
  iso->add_option("--ratio", ratio);
  iso->add_option("--out", out, "output CSV")->required();
  iso->callback([&] { action = [&] { return cmd_isozaki(q1, q2, xi, tau_max, ratio, out); }; });

  auto* rec = app.add_subcommand("reconstruct", "band-limited reconstruction of q1 - q2");
  rec->add_option("--q1", q1)->required();
  rec->add_option("--q2", q2)->required();
  rec->add_option("--xi-max", xi_max)->required();
  rec->add_option("--tau-max", tau_max);
  rec->add_option("--out", out, "output directory")->required();
  rec->callback([&] { action = [&] { return cmd_reconstruct(q1, q2, xi_max, tau_max, out); }; });

  auto* stab = app.add_subcommand("stability", "Hoelder table over a family of potentials");
  stab->add_option("--q1", q1)->required();
  stab->add_option("--family", family, "directory of potential JSON files")->required();
  stab->add_option("--K", K)->required();
  stab->add_option("--out", out, "output directory")->required();
  stab->callback([&] { action = [&] { return cmd_stability(q1, family, K, out); }; });

  auto* par = app.add_subcommand("parabolic-dn", "time-stepped parabolic DN trace");
  par->add_option("--q", q)->required();
  par->add_option("--g", g, "boundary CSV")->required();
  par->set_help_flag("--help", "Print this help message and exit");  // -h is the signal
  par->add_option("--h", h, "CSV t,h")->required();
  par->add_option("--T0", T0)->required();
  par->add_option("--T", T, "default 2 T0");
  par->add_option("--eps", eps, "default T0 / 4");
  par->add_option("--nt", nt);
  par->add_option("--out", out, "output CSV")->required();
  par->callback([&] { action = [&] { return cmd_parabolic(q, g, h, T0, T, eps, nt, out); }; });

  auto* ex = app.add_subcommand("extract-bsd", "exponential-sum fit of pulse traces");
  ex->add_option("--traces", traces)->required();
  ex->add_option("--K", K, "model order")->required();
  ex->add_option("--out", out, "output directory")->required();
  ex->callback([&] { action = [&] { return cmd_extract(traces, K, out); }; });

  auto* match = app.add_subcommand("match", "per-cluster orthogonal matrices between two BSDs");
  match->add_option("--bsd1", bsd1)->required();
  match->add_option("--bsd2", bsd2)->required();
  match->add_option("--overlap", overlap);
  match->add_option("--out", out, "output JSON")->required();
  match->callback([&] { action = [&] { return cmd_match(bsd1, bsd2, overlap, out); }; });

  auto* runc = app.add_subcommand("run", "run an experiment config");
  runc->add_option("--config", config)->required();
  runc->add_option("--out", out, "output directory (default: the config's output)");
  runc->callback([&] { action = [&] { return cmd_run(config, out); }; });

  auto* val = app.add_subcommand("validate", "check a config without computing");
  val->add_option("--config", config)->required();
  val->callback([&] { action = [&] { return cmd_validate(config); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (workers > 0) setenv("BLAB_WORKERS", std::to_string(workers).c_str(), 1);

  try {
    return action();
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
