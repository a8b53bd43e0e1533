#pragma once

#include <string>
#include <vector>

#include "blab/io.hpp"
#include "blab/isozaki.hpp"
#include "blab/parabolic.hpp"

namespace blab {

// Stage names in execution order.
inline const std::vector<std::string> kStageOrder = {
    "bsd", "neumann", "isozaki", "reconstruct", "stability", "parabolic", "pipeline"};

struct ExperimentConfig {
  Json document;  // as read; hashed into the manifest
  GridShape domain{1, 1, 32, 32};
  Json q1, q2;    // potential specs; q2 may be null
  std::vector<std::string> stages;
  std::string output;
  unsigned seed = 0;

  struct { int K = 10; } bsd;
  struct { double lambda = -30, mu = -80; } neumann;
  struct {
    std::vector<Vec2> xi{Vec2(0, 0)};
    double tau_max = 40, ratio = 1.3;
    std::vector<double> tau;  // explicit schedule; empty means tau_schedule
  } isozaki;
  struct { double xi_max = 8 * 3.141592653589793, tau_max = 40; } reconstruct;
  struct {
    std::vector<double> family{0.02, 0.05, 0.1, 0.2};  // q2 = q1 + e sin sin
    int K = 40;
  } stability;
  struct {
    int K = 200, nt = 512;
    double T0 = 0.1, T = 0.2, eps = 0.025;
    int overlap = -1;
  } parabolic;
  struct {
    PulseOptions pulse;
    int order = 16, overlap = -1;
    double noise = 0;  // relative, Gaussian, drawn from seed
  } pipeline;
};

// q1 + e sin(pi x / Lx) sin(pi y / Ly), bounded by M1 + |e|.
Potential stability_member(const Grid& grid, const Potential& q1, double e);

// Throws InvalidArgument when the document is structurally malformed (wrong
// types, unknown stages). Range checks are left to validate.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const fs::path& path);

// Every precondition of every listed stage, checked without computing.
std::vector<std::string> validate(const ExperimentConfig& config);
// Parse failures become diagnostics too.
std::vector<std::string> validate_document(const Json& doc);

}  // namespace blab
