#include "blab/domain.hpp"

#include <cmath>
#include <string>

#include "blab/error.hpp"

namespace blab {

std::string_view edge_name(Edge e) {
  switch (e) {
    case Edge::Bottom: return "bottom";
    case Edge::Right: return "right";
    case Edge::Top: return "top";
    case Edge::Left: return "left";
  }
  return "?";
}

Edge parse_edge(std::string_view name) {
  for (Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left})
    if (edge_name(e) == name) return e;
  throw InvalidArgument("unknown edge tag '" + std::string(name) + "'");
}

namespace {

// Trapezoid weights on one edge after dropping the two corners: the corner
// half-cells are folded into the end samples, so the edge length is kept.
double edge_weight(int k, int n, double h) {
  if (n == 1) return 2 * h;
  return (k == 0 || k == n - 1) ? 1.5 * h : h;
}

}  // namespace

Grid::Grid(double Lx, double Ly, int nx, int ny) {
  if (!(Lx > 0) || !(Ly > 0))
    throw InvalidArgument("grid lengths must be positive");
  if (nx < 2 || ny < 2)
    throw InvalidArgument("grid needs at least 2 interior nodes per axis");
  shape_ = {Lx, Ly, nx, ny};
  hx_ = Lx / (nx + 1);
  hy_ = Ly / (ny + 1);

  boundary_.reserve(2 * (nx + ny));
  for (int i = 0; i < nx; ++i) {
    double x = (i + 1) * hx_;
    boundary_.push_back({Edge::Bottom, i, x, 0.0, x, edge_weight(i, nx, hx_)});
  }
  for (int j = 0; j < ny; ++j) {
    double y = (j + 1) * hy_;
    boundary_.push_back({Edge::Right, j, Lx, y, Lx + y, edge_weight(j, ny, hy_)});
  }
  for (int i = nx - 1; i >= 0; --i) {
    double x = (i + 1) * hx_;
    boundary_.push_back(
        {Edge::Top, i, x, Ly, Lx + Ly + (Lx - x), edge_weight(i, nx, hx_)});
  }
  for (int j = ny - 1; j >= 0; --j) {
    double y = (j + 1) * hy_;
    boundary_.push_back(
        {Edge::Left, j, 0.0, y, 2 * Lx + Ly + (Ly - y), edge_weight(j, ny, hy_)});
  }
}

std::vector<int> Grid::edge_nodes(Edge e) const {
  std::vector<int> out;
  for (int k = 0; k < boundary_size(); ++k)
    if (boundary_[k].edge == e) out.push_back(k);
  return out;
}

int Grid::inward_neighbor(int k, int depth) const {
  const BoundaryNode& b = boundary_[k];
  const int d = depth - 1;
  switch (b.edge) {
    case Edge::Bottom: return index(b.along, d);
    case Edge::Top: return index(b.along, ny() - 1 - d);
    case Edge::Left: return index(d, b.along);
    case Edge::Right: return index(nx() - 1 - d, b.along);
  }
  return -1;
}

double Grid::normal_spacing(int k) const {
  Edge e = boundary_[k].edge;
  return (e == Edge::Bottom || e == Edge::Top) ? hy_ : hx_;
}

double Grid::tangent_spacing(int k) const {
  Edge e = boundary_[k].edge;
  return (e == Edge::Bottom || e == Edge::Top) ? hx_ : hy_;
}

double Grid::diameter() const { return std::hypot(shape_.Lx, shape_.Ly); }

Grid build_grid(double Lx, double Ly, int nx, int ny) { return Grid(Lx, Ly, nx, ny); }

Potential::Potential(const Grid& grid, Eigen::VectorXd values, double sup_bound)
    : shape_(grid.shape()), values_(std::move(values)), sup_bound_(sup_bound) {
  if (values_.size() != grid.interior_size())
    throw InvalidArgument("potential size does not match the grid");
  if (!(sup_bound_ >= 0)) throw InvalidArgument("sup bound M must be >= 0");
  for (int k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw InvalidArgument("potential has a non-finite sample");
    if (std::abs(values_[k]) > sup_bound_ * (1 + 1e-12))
      throw InvalidArgument("potential sample |q| = " + std::to_string(std::abs(values_[k])) +
                            " exceeds the sup bound M = " + std::to_string(sup_bound_));
  }
}

Potential sample_potential(const std::function<double(double, double)>& func,
                           const Grid& grid, double M) {
  Eigen::VectorXd v(grid.interior_size());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j)] = func(grid.x(i), grid.y(j));
  return Potential(grid, std::move(v), M);
}

Potential constant_potential(const Grid& grid, double c, double M) {
  return Potential(grid, Eigen::VectorXd::Constant(grid.interior_size(), c), M);
}

BoundaryFunction::BoundaryFunction(const Grid& grid, Eigen::VectorXcd values)
    : shape_(grid.shape()), values_(std::move(values)) {
  if (values_.size() != grid.boundary_size())
    throw InvalidArgument("boundary function length does not match the grid");
}

BoundaryFunction::BoundaryFunction(const Grid& grid)
    : BoundaryFunction(grid, Eigen::VectorXcd::Zero(grid.boundary_size())) {}

BoundaryFunction make_boundary_function(
    const Grid& grid, const std::function<Complex(const BoundaryNode&)>& func) {
  Eigen::VectorXcd v(grid.boundary_size());
  for (int k = 0; k < grid.boundary_size(); ++k) v[k] = func(grid.boundary()[k]);
  return BoundaryFunction(grid, std::move(v));
}

void require_same_grid(const GridShape& a, const GridShape& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grids differ");
}

Complex boundary_inner(const BoundaryFunction& g1, const BoundaryFunction& g2,
                       const Grid& grid) {
  require_same_grid(g1.shape(), grid.shape(), "boundary_inner");
  require_same_grid(g2.shape(), grid.shape(), "boundary_inner");
  Complex s = 0;
  auto nodes = grid.boundary();
  for (int k = 0; k < grid.boundary_size(); ++k)
    s += nodes[k].weight * g1[k] * std::conj(g2[k]);
  return s;
}

Complex boundary_inner(const BoundaryFunction& g1, const BoundaryFunction& g2,
                       const Grid& grid, std::span<const int> subset) {
  require_same_grid(g1.shape(), grid.shape(), "boundary_inner");
  require_same_grid(g2.shape(), grid.shape(), "boundary_inner");
  Complex s = 0;
  auto nodes = grid.boundary();
  for (int k : subset) s += nodes[k].weight * g1[k] * std::conj(g2[k]);
  return s;
}

double boundary_norm(const BoundaryFunction& g, const Grid& grid) {
  return std::sqrt(std::max(0.0, boundary_inner(g, g, grid).real()));
}

double interior_norm(const Eigen::VectorXd& v, const Grid& grid) {
  return std::sqrt(grid.cell_area()) * v.norm();
}

double interior_norm(const Eigen::VectorXcd& v, const Grid& grid) {
  return std::sqrt(grid.cell_area()) * v.norm();
}

}  // namespace blab
