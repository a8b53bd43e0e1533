#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "blab/domain.hpp"
#include "blab/expsum.hpp"
#include "blab/parabolic.hpp"
#include "blab/spectral.hpp"

namespace blab {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// %.17g
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const fs::path& path, const CsvTable& table);
CsvTable read_csv(const fs::path& path);

// Whole-document writes: JSON with two-space indent and a trailing newline.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const Json& doc);
Json read_json(const fs::path& path);

Json grid_to_json(const Grid& grid);
Grid grid_from_json(const Json& j);

// {"grid": ..., "M": ..., "values": [row-major, j * nx + i]}
Json potential_to_json(const Grid& grid, const Potential& q);

// Analytic potential specs:
//   {"type": "constant", "value": c}
//   {"type": "bump", "amplitude": a}                 a sin(pi x/Lx) sin(pi y/Ly)
//   {"type": "bumps", "terms": [{"amplitude", "cx", "cy", "width"}, ...]}
//       sum of a cos^2(pi r / (2 width)) for r = |x - c| < width
// plus an optional "M" (default: sup of the sampled values).
Potential potential_from_spec(const Grid& grid, const Json& spec);

struct LoadedPotential {
  Grid grid;
  Potential q;
};

// Either a sampled potential document or {"domain": {...}, "potential": spec}.
LoadedPotential load_potential(const fs::path& path);

// Columns: edge, arclength, re, im; one row per boundary sample.
void write_boundary_csv(const fs::path& path, const Grid& grid, const BoundaryFunction& f);
BoundaryFunction read_boundary_csv(const fs::path& path, const Grid& grid);

// Directory with meta.json, lambdas.csv and psi_{n}.csv (n from 1).
void save_bsd(const fs::path& dir, const BoundarySpectralData& bsd);
BoundarySpectralData load_bsd(const fs::path& dir);

// traces.csv (s, one column per channel) plus traces.json (grid, gammas, pulse).
void save_traces(const fs::path& dir, const Grid& grid, const TraceSet& traces);
TraceSet load_traces(const fs::path& dir);

Json expsum_to_json(const ExpSumModel& m, const std::vector<int>& in, const std::vector<int>& out);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
};

// Writes <stem>.svg, <stem>.csv and <stem>.gp; the script redraws the CSV.
void write_line_plot(const fs::path& dir, const std::string& stem, const PlotSpec& spec);

// Interior field as <stem>.csv (x, y, value), <stem>.svg heatmap and <stem>.gp.
void write_heatmap(const fs::path& dir, const std::string& stem, const Grid& grid,
                   const Eigen::VectorXd& values, const std::string& title);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

}  // namespace blab
