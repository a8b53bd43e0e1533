#include "blab/config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blab/error.hpp"
#include "blab/stability.hpp"

namespace blab {

namespace {

template <class T>
void read(const Json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

bool listed(const ExperimentConfig& c, const std::string& s) {
  return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Smallest n with 8 points per wavelength at tau on a side of length L.
int needed_n(double L, double tau) {
  return static_cast<int>(std::ceil(L * 8 * tau / (2 * std::numbers::pi))) - 1;
}

void check_resolution(const ExperimentConfig& c, const Grid& g, double tau_max, const char* stage,
                      std::vector<std::string>& d) {
  if (tau_max <= resolution_limit(g)) return;
  d.push_back(std::string(stage) + ": under-resolved, tau_max = " + fmt(tau_max) +
              " needs nx >= " + std::to_string(needed_n(c.domain.Lx, tau_max)) +
              " and ny >= " + std::to_string(needed_n(c.domain.Ly, tau_max)) +
              " for 8 points per wavelength (have " + std::to_string(g.nx()) + " x " +
              std::to_string(g.ny()) + ")");
}

// Sup bound of the potential, or -1 after recording why it cannot be built.
double check_potential(const Grid& g, const Json& spec, const char* name, std::vector<std::string>& d) {
  try {
    return potential_from_spec(g, spec).sup_bound();
  } catch (const InvalidArgument& e) {
    d.push_back(std::string("potential ") + name + ": " + e.what());
    return -1;
  }
}

bool whole_multiple(double a, double b) {
  const double k = a / b;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, k);
}

void check_heat_step(double dt, double M, const char* stage, std::vector<std::string>& d) {
  if (M >= 0 && dt * M / 2 >= 1)
    d.push_back(std::string(stage) + ": time step " + fmt(dt) + " too large for M = " + fmt(M) +
                " (Crank-Nicolson needs dt M / 2 < 1)");
}

}  // namespace

Potential stability_member(const Grid& g, const Potential& q1, double e) {
  Eigen::VectorXd v = q1.values();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      v[g.index(i, j)] += e * std::sin(std::numbers::pi * g.x(i) / g.Lx()) *
                          std::sin(std::numbers::pi * g.y(j) / g.Ly());
  return Potential(g, v, q1.sup_bound() + std::abs(e));
}

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig c;
  c.document = doc;
  try {
    if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
    const auto& dom = doc.at("domain");
    c.domain = {dom.at("Lx").get<double>(), dom.at("Ly").get<double>(), dom.at("nx").get<int>(),
                dom.at("ny").get<int>()};
    const auto& pots = doc.at("potentials");
    c.q1 = pots.at("q1");
    if (pots.contains("q2")) c.q2 = pots.at("q2");
    c.stages = doc.at("stages").get<std::vector<std::string>>();
    for (const auto& s : c.stages)
      if (std::find(kStageOrder.begin(), kStageOrder.end(), s) == kStageOrder.end())
        throw InvalidArgument("unknown stage '" + s + "'");
    read(doc, "output", c.output);
    read(doc, "seed", c.seed);

    const Json none = Json::object();
    const auto& b = doc.contains("bsd") ? doc.at("bsd") : none;
    read(b, "K", c.bsd.K);
    const auto& n = doc.contains("neumann") ? doc.at("neumann") : none;
    read(n, "lambda", c.neumann.lambda);
    read(n, "mu", c.neumann.mu);
    const auto& i = doc.contains("isozaki") ? doc.at("isozaki") : none;
    if (i.contains("xi")) {
      c.isozaki.xi.clear();
      for (const auto& x : i.at("xi")) {
        auto v = x.get<std::vector<double>>();
        if (v.size() != 2) throw InvalidArgument("isozaki.xi entries must be [x, y]");
        c.isozaki.xi.emplace_back(v[0], v[1]);
      }
    }
    read(i, "tau_max", c.isozaki.tau_max);
    read(i, "ratio", c.isozaki.ratio);
    read(i, "tau", c.isozaki.tau);
    const auto& r = doc.contains("reconstruct") ? doc.at("reconstruct") : none;
    read(r, "xi_max", c.reconstruct.xi_max);
    read(r, "tau_max", c.reconstruct.tau_max);
    const auto& s = doc.contains("stability") ? doc.at("stability") : none;
    read(s, "family", c.stability.family);
    read(s, "K", c.stability.K);
    const auto& p = doc.contains("parabolic") ? doc.at("parabolic") : none;
    read(p, "K", c.parabolic.K);
    read(p, "nt", c.parabolic.nt);
    read(p, "T0", c.parabolic.T0);
    read(p, "T", c.parabolic.T);
    read(p, "eps", c.parabolic.eps);
    read(p, "overlap", c.parabolic.overlap);
    const auto& q = doc.contains("pipeline") ? doc.at("pipeline") : none;
    read(q, "order", c.pipeline.order);
    read(q, "overlap", c.pipeline.overlap);
    read(q, "noise", c.pipeline.noise);
    read(q, "pulse", c.pipeline.pulse.pulse);
    read(q, "dt", c.pipeline.pulse.dt);
    read(q, "t_first", c.pipeline.pulse.t_first);
    read(q, "ds", c.pipeline.pulse.ds);
    read(q, "samples", c.pipeline.pulse.samples);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_json(path)); }

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> d;
  const auto& D = c.domain;
  if (!(D.Lx > 0 && D.Ly > 0)) d.push_back("domain: Lx and Ly must be positive");
  if (D.nx < 3 || D.ny < 3) d.push_back("domain: nx and ny must be at least 3");
  if (!d.empty()) return d;
  const Grid g(D.Lx, D.Ly, D.nx, D.ny);
  const int N = g.interior_size();

  if (c.stages.empty()) d.push_back("stages: nothing to run");
  const double M1 = check_potential(g, c.q1, "q1", d);
  const bool needs_q2 = listed(c, "isozaki") || listed(c, "reconstruct");
  if (needs_q2 && c.q2.is_null()) d.push_back("potentials: isozaki and reconstruct need q2");
  if (!c.q2.is_null()) check_potential(g, c.q2, "q2", d);

  if (listed(c, "bsd") && !(c.bsd.K >= 1 && c.bsd.K <= N))
    d.push_back("bsd: K must lie in [1, " + std::to_string(N) + "]");

  if (listed(c, "neumann")) {
    if (!listed(c, "bsd")) d.push_back("neumann: reads bsd/, so stage bsd must be listed");
    // Resonance with the computed spectrum is checked when the stage runs.
    if (!(std::isfinite(c.neumann.lambda) && std::isfinite(c.neumann.mu)))
      d.push_back("neumann: lambda and mu must be finite");
    if (c.neumann.lambda == c.neumann.mu) d.push_back("neumann: lambda and mu must differ");
  }

  if (listed(c, "isozaki")) {
    const auto& z = c.isozaki;
    if (!(z.ratio > 1)) d.push_back("isozaki: ratio must exceed 1");
    for (const auto& xi : z.xi) {
      const double xn = xi.norm();
      const double tau0 = z.tau.empty() ? std::max(5.0, xn + 2) : z.tau.front();
      if (!(tau0 > xn + 1))
        d.push_back("isozaki: tau0 = " + fmt(tau0) + " must exceed |xi| + 1 = " + fmt(xn + 1));
      const double cap = std::min(z.tau_max, resolution_limit(g));
      if (z.tau.empty() && !(cap > tau0))
        d.push_back("isozaki: empty tau schedule for |xi| = " + fmt(xn) + " (start " + fmt(tau0) +
                    ", cap " + fmt(cap) + ")");
    }
    if (!z.tau.empty()) {
      if (z.tau.size() < 2) d.push_back("isozaki: an explicit tau schedule needs two points");
      if (!std::is_sorted(z.tau.begin(), z.tau.end())) d.push_back("isozaki: tau must increase");
      check_resolution(c, g, z.tau.back(), "isozaki", d);
    } else {
      check_resolution(c, g, z.tau_max, "isozaki", d);
    }
  }

  if (listed(c, "reconstruct")) {
    const auto& r = c.reconstruct;
    if (!(r.xi_max > 0)) d.push_back("reconstruct: xi_max must be positive");
    check_resolution(c, g, r.tau_max, "reconstruct", d);
    const double cap = std::min(r.tau_max, resolution_limit(g));
    if (!(cap > r.xi_max + 2))
      d.push_back("reconstruct: tau cap " + fmt(cap) + " leaves no schedule above |xi| + 2 = " +
                  fmt(r.xi_max + 2));
  }

  if (listed(c, "stability")) {
    const auto& s = c.stability;
    if (!(s.K >= 2 && s.K <= N)) d.push_back("stability: K must lie in [2, " + std::to_string(N) + "]");
    if (s.family.empty()) d.push_back("stability: family is empty");
    if (M1 >= 0) {
      const auto q1 = potential_from_spec(g, c.q1);
      for (double e : s.family) {
        try {
          check_boundary_equality(g, q1, stability_member(g, q1, e));
        } catch (const InvalidArgument& err) {
          d.push_back("stability: member eps = " + fmt(e) + ": " + err.what());
          break;
        }
      }
    }
  }

  if (listed(c, "parabolic")) {
    const auto& p = c.parabolic;
    if (p.nt < 16) d.push_back("parabolic: nt must be at least 16");
    if (!(p.K >= 1 && p.K <= N)) d.push_back("parabolic: K must lie in [1, " + std::to_string(N) + "]");
    if (!(p.eps > 0)) d.push_back("parabolic: eps must be positive");
    if (!(p.eps < p.T0)) d.push_back("parabolic: eps = " + fmt(p.eps) + " must be below T0 = " + fmt(p.T0));
    if (!(p.T0 < p.T)) d.push_back("parabolic: T0 = " + fmt(p.T0) + " must be below T = " + fmt(p.T));
    if (p.T > 0 && p.nt > 0) {
      if (!whole_multiple(p.T0, p.T / p.nt)) d.push_back("parabolic: T0 must fall on a time step of T / nt");
      check_heat_step(p.T / p.nt, M1, "parabolic", d);
    }
  }

  if (listed(c, "pipeline")) {
    const auto& p = c.pipeline;
    const auto& o = p.pulse;
    if (p.order < 1) d.push_back("pipeline: order must be at least 1");
    if (o.samples < 2 * p.order + 4)
      d.push_back("pipeline: " + std::to_string(o.samples) + " samples cannot fit order " +
                  std::to_string(p.order) + " (need " + std::to_string(2 * p.order + 4) + ")");
    if (!(o.pulse > 0 && o.dt > 0 && o.ds > 0)) d.push_back("pipeline: pulse, dt and ds must be positive");
    if (!(o.t_first > o.pulse)) d.push_back("pipeline: t_first must come after the pulse");
    if (p.noise < 0) d.push_back("pipeline: noise must be non-negative");
    if (o.dt > 0) {
      if (!whole_multiple(o.t_first, o.dt) || !whole_multiple(o.ds, o.dt))
        d.push_back("pipeline: t_first and ds must be whole multiples of dt");
      check_heat_step(o.dt, M1, "pipeline", d);
    }
  }

  for (auto* ov : {&c.parabolic.overlap, &c.pipeline.overlap})
    if (*ov == 0 || *ov > std::min(D.nx, D.ny)) {
      d.push_back("gammas: overlap must be -1 (default) or in [1, " +
                  std::to_string(std::min(D.nx, D.ny)) + "]");
      break;
    }
  return d;
}

std::vector<std::string> validate_document(const Json& doc) {
  try {
    return validate(parse_config(doc));
  } catch (const InvalidArgument& e) {
    return {e.what()};
  }
}

}  // namespace blab
