#include "blab/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "blab/bvp.hpp"
#include "blab/error.hpp"
#include "blab/expsum.hpp"
#include "blab/stability.hpp"

#ifndef BLAB_VERSION
#define BLAB_VERSION "0.0.0"
#endif

namespace blab {

namespace {

using std::numbers::pi;

struct Context {
  const ExperimentConfig& c;
  Grid grid;
  Potential q1;
  fs::path root;
};

Potential optional_q2(const Context& x) { return potential_from_spec(x.grid, x.c.q2); }

void stage_bsd(Context& x) {
  const fs::path dir = x.root / "bsd";
  auto bsd = eigenpairs(assemble(x.grid, x.q1), x.c.bsd.K);
  save_bsd(dir, bsd);
  CsvTable t{{"first", "size", "lambda"}, {}};
  for (const auto& cl : bsd.clusters()) t.rows.push_back({double(cl.first + 1), double(cl.size), cl.lambda});
  write_csv(dir / "clusters.csv", t);
  Series s{"lambda_n", {}, {}}, w{"Weyl 4 pi n / |Omega|", {}, {}};
  const double area = x.grid.Lx() * x.grid.Ly();
  for (int n = 0; n < bsd.size(); ++n) {
    s.x.push_back(n + 1);
    s.y.push_back(bsd[n].lambda);
    w.x.push_back(n + 1);
    w.y.push_back(4 * pi * (n + 1) / area);
  }
  write_line_plot(dir, "spectrum", {"Dirichlet spectrum", "n", "lambda", false, false, {s, w}});
}

void stage_neumann(Context& x) {
  const fs::path dir = x.root / "neumann";
  const auto bsd = load_bsd(x.root / "bsd");
  const Grid& g = x.grid;
  require_same_grid(bsd.grid().shape(), g.shape(), "neumann");
  const auto f = make_boundary_function(g, [](const BoundaryNode& b) -> Complex { return b.x * b.x + b.y; });
  const double lam = x.c.neumann.lambda, mu = x.c.neumann.mu;
  const auto series = neumann_difference(bsd, f, lam, mu);
  const auto spectrum = bsd.lambdas();
  const auto a = ShiftedSolver(g, x.q1, lam, spectrum).neumann_trace(f);
  const auto b = ShiftedSolver(g, x.q1, mu, spectrum).neumann_trace(f);
  const Eigen::VectorXcd direct = a.values() - b.values();
  CsvTable t{{"k", "arclength", "series_re", "series_im", "direct_re", "direct_im"}, {}};
  for (int k = 0; k < g.boundary_size(); ++k)
    t.rows.push_back({double(k), g.boundary()[k].arclength, series[k].real(), series[k].imag(),
                      direct[k].real(), direct[k].imag()});
  write_csv(dir / "difference.csv", t);
  const double err = boundary_norm(BoundaryFunction(g, series.values() - direct), g) /
                     boundary_norm(BoundaryFunction(g, direct), g);
  write_json(dir / "summary.json", Json{{"lambda", lam}, {"mu", mu}, {"K", bsd.size()}, {"relative_error", err}});
}

void stage_isozaki(Context& x) {
  const fs::path dir = x.root / "isozaki";
  const auto q2 = optional_q2(x);
  const auto& z = x.c.isozaki;
  CsvTable samples{{"xi_x", "xi_y", "tau", "re", "im"}, {}};
  CsvTable est{{"xi_x", "xi_y", "re", "im"}, {}};
  PlotSpec plot{"|S_tau| against tau", "tau", "|S_tau|", true, true, {}};
  for (const auto& xi : z.xi) {
    const auto sched = z.tau.empty() ? tau_schedule(xi.norm(), z.tau_max, x.grid, z.ratio) : z.tau;
    const auto fe = fourier_estimate(x.grid, x.q1, q2, xi, sched);
    Series s{"xi = (" + format_double(xi.x()) + ", " + format_double(xi.y()) + ")", {}, {}};
    for (const auto& p : fe.samples) {
      samples.rows.push_back({xi.x(), xi.y(), p.tau, p.s.real(), p.s.imag()});
      s.x.push_back(p.tau);
      s.y.push_back(std::abs(p.s));
    }
    est.rows.push_back({xi.x(), xi.y(), fe.value.real(), fe.value.imag()});
    plot.series.push_back(std::move(s));
  }
  write_csv(dir / "samples.csv", samples);
  write_csv(dir / "estimates.csv", est);
  write_line_plot(dir, "decay", plot);
}

void stage_reconstruct(Context& x) {
  const fs::path dir = x.root / "reconstruct";
  const auto q2 = optional_q2(x);
  const auto r = reconstruct_difference(x.grid, x.q1, q2, x.c.reconstruct.xi_max, x.c.reconstruct.tau_max);
  const Eigen::VectorXd truth = x.q1.values() - q2.values();
  write_heatmap(dir, "field", x.grid, r.field, "reconstructed q1 - q2");
  write_heatmap(dir, "truth", x.grid, truth, "sampled q1 - q2");
  CsvTable s{{"xi_x", "xi_y", "re", "im"}, {}};
  for (const auto& v : r.spectrum) s.rows.push_back({v.xi.x(), v.xi.y(), v.value.real(), v.value.imag()});
  write_csv(dir / "spectrum.csv", s);
  const double tn = interior_norm(truth, x.grid);
  write_json(dir / "summary.json",
             Json{{"xi_max", x.c.reconstruct.xi_max},
                  {"tau_max", x.c.reconstruct.tau_max},
                  {"lattice_points", r.spectrum.size()},
                  {"relative_error", tn > 0 ? interior_norm(Eigen::VectorXd(r.field - truth), x.grid) / tn : 0.0},
                  {"imag_residual", r.imag_residual},
                  {"warning", r.warning}});
}

void stage_stability(Context& x) {
  const fs::path dir = x.root / "stability";
  const Grid& g = x.grid;
  std::vector<Potential> family;
  for (double e : x.c.stability.family) family.push_back(stability_member(g, x.q1, e));
  const auto r = hoelder_experiment(g, x.q1, family, x.c.stability.K);
  CsvTable t{{"eps", "delta", "l2_diff", "ratio", "h1", "h1_ok", "skipped"}, {}};
  Series s{"l2_diff", {}, {}};
  for (size_t k = 0; k < r.rows.size(); ++k) {
    const auto& w = r.rows[k];
    t.rows.push_back({x.c.stability.family[k], w.delta, w.l2_diff, w.ratio, w.h1, double(w.h1_ok), double(w.skipped)});
    if (!w.skipped) {
      s.x.push_back(w.delta);
      s.y.push_back(w.l2_diff);
    }
  }
  write_csv(dir / "table.csv", t);
  write_line_plot(dir, "hoelder", {"||q1 - q2|| against delta", "delta", "l2_diff", true, true, {s}});
  Json planch = Json::array();
  for (const auto& q : family) {
    const auto p = plancherel(g, Eigen::VectorXd(x.q1.values() - q.values()));
    planch.push_back(p.rel_gap);
  }
  write_json(dir / "summary.json", Json{{"K", x.c.stability.K},
                                        {"slope", r.slope},
                                        {"intercept", r.intercept},
                                        {"constant", r.constant},
                                        {"spread", r.spread},
                                        {"plancherel_gap", planch},
                                        {"note", r.note}});
}

void stage_parabolic(Context& x) {
  const fs::path dir = x.root / "parabolic";
  const auto& p = x.c.parabolic;
  const Grid& g = x.grid;
  const auto gam = default_gammas(g, p.overlap);
  BoundaryFunction f(g);
  for (int k : gam.in)
    if (g.boundary()[k].edge == Edge::Bottom) f.values()[k] = std::sin(pi * g.boundary()[k].x / g.Lx());
  const double on = p.T0 - p.eps;
  BoundaryInput in{f, [on](double t) { return t < on && t > 0 ? std::pow(std::sin(pi * t / on), 2) : 0.0; },
                   p.eps, p.T, p.T0};
  const auto stepped = parabolic_dn(g, x.q1, in, p.nt, gam);
  const auto bsd = eigenpairs(assemble(g, x.q1), p.K);
  const auto spectral = spectral_parabolic_dn(bsd, in, gam, p.K);
  CsvTable t{{"k", "arclength", "stepped", "spectral"}, {}};
  for (size_t i = 0; i < gam.out.size(); ++i)
    t.rows.push_back({double(gam.out[i]), g.boundary()[gam.out[i]].arclength, stepped.flux[i], spectral.flux[i]});
  write_csv(dir / "trace.csv", t);
  Series a{"time-stepped", {}, {}}, b{"spectral", {}, {}};
  for (const auto& r : t.rows) {
    a.x.push_back(r[1]); a.y.push_back(r[2]);
    b.x.push_back(r[1]); b.y.push_back(r[3]);
  }
  write_line_plot(dir, "trace", {"parabolic DN trace at T0", "arclength", "flux", false, false, {a, b}});
  std::vector<std::string> warnings = stepped.warnings;
  warnings.insert(warnings.end(), spectral.warnings.begin(), spectral.warnings.end());
  const double n = spectral.flux.norm();
  write_json(dir / "summary.json",
             Json{{"K", p.K}, {"nt", p.nt}, {"T0", p.T0}, {"T", p.T}, {"eps", p.eps},
                  {"relative_error", n > 0 ? (stepped.flux - spectral.flux).norm() / n : 0.0},
                  {"warnings", warnings}});
}

void stage_pipeline(Context& x) {
  const fs::path dir = x.root / "pipeline";
  const auto& p = x.c.pipeline;
  const auto gam = default_gammas(x.grid, p.overlap);
  auto traces = simulate_pulse_traces(x.grid, x.q1, gam, p.pulse);
  if (p.noise > 0) {
    std::mt19937_64 rng(x.c.seed);
    std::normal_distribution<double> nd(0, p.noise * traces.values.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < traces.values.size(); ++k) traces.values.data()[k] += nd(rng);
  }
  save_traces(dir / "traces", x.grid, traces);
  const auto loaded = load_traces(dir / "traces");
  const auto rec = recover_from_traces(loaded, p.order);
  write_json(dir / "model.json", expsum_to_json(rec.model, loaded.in, loaded.out));
  CsvTable ev{{"n", "lambda"}, {}};
  for (size_t k = 0; k < rec.clusters.size(); ++k) {
    ev.rows.push_back({double(k + 1), rec.clusters[k].lambda});
    CsvTable th{{"in", "out", "theta"}, {}};
    const auto& m = rec.clusters[k].theta;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) th.rows.push_back({double(loaded.in[i]), double(loaded.out[j]), m(i, j)});
    write_csv(dir / ("theta_" + std::to_string(k + 1) + ".csv"), th);
  }
  write_csv(dir / "eigenvalues.csv", ev);
}

const std::map<std::string, std::function<void(Context&)>> kStages = {
    {"bsd", stage_bsd},             {"neumann", stage_neumann},     {"isozaki", stage_isozaki},
    {"reconstruct", stage_reconstruct}, {"stability", stage_stability}, {"parabolic", stage_parabolic},
    {"pipeline", stage_pipeline}};

std::vector<RunManifest::File> inventory(const fs::path& root) {
  std::vector<RunManifest::File> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == "manifest.json") continue;
    files.push_back({rel, e.file_size(), sha256_file(e.path())});
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return files;
}

void publish(const fs::path& tmp, const fs::path& out) {
  if (fs::exists(out)) {
    fs::path old = out;
    old += ".old";
    fs::remove_all(old);
    fs::rename(out, old);
    fs::rename(tmp, out);
    fs::remove_all(old);
  } else {
    fs::rename(tmp, out);
  }
}

}  // namespace

std::string tool_version() { return BLAB_VERSION; }

Json manifest_to_json(const RunManifest& m) {
  Json stages = Json::array(), files = Json::array();
  for (const auto& s : m.stages) stages.push_back({{"name", s.name}, {"seconds", s.seconds}});
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  Json j{{"status", m.status}};
  if (!m.error.empty()) j["error"] = m.error;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.tool_version;
  j["stages"] = stages;
  j["files"] = files;
  return j;
}

RunManifest run(const ExperimentConfig& c, const fs::path& out) {
  const auto diags = validate(c);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw InvalidArgument(msg);
  }
  if (out.empty()) throw InvalidArgument("run needs an output directory");

  RunManifest m;
  m.tool_version = tool_version();
  m.config_hash = sha256_hex(nlohmann::json(c.document).dump());

  const fs::path target = fs::absolute(out).lexically_normal();
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  const Grid grid(c.domain.Lx, c.domain.Ly, c.domain.nx, c.domain.ny);
  Context x{c, grid, potential_from_spec(grid, c.q1), tmp};
  write_json(tmp / "config.json", c.document);

  std::exception_ptr failure;
  for (const auto& name : kStageOrder) {
    if (std::find(c.stages.begin(), c.stages.end(), name) == c.stages.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      kStages.at(name)(x);
    } catch (const std::exception& e) {
      m.error = name + ": " + e.what();
      failure = std::current_exception();
      break;
    }
    m.stages.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  }
  m.status = failure ? "failed" : "ok";
  m.files = inventory(tmp);
  write_json(tmp / "manifest.json", manifest_to_json(m));
  publish(tmp, target);
  if (failure) std::rethrow_exception(failure);
  return m;
}

}  // namespace blab
