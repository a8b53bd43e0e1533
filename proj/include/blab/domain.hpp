#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace blab {

using Complex = std::complex<double>;

enum class Edge { Bottom, Right, Top, Left };

std::string_view edge_name(Edge e);
Edge parse_edge(std::string_view name);

struct BoundaryNode {
  Edge edge;
  int along;         // i for bottom/top samples, j for left/right samples
  double x, y;
  double arclength;  // position along the boundary walk starting at (0,0)
  double weight;
};

struct GridShape {
  double Lx = 0, Ly = 0;
  int nx = 0, ny = 0;
  bool operator==(const GridShape&) const = default;
};

// Uniform grid on (0,Lx)x(0,Ly) with nx*ny interior nodes. Boundary samples
// sit where interior grid lines meet the edges; corners are left out.
class Grid {
 public:
  Grid(double Lx, double Ly, int nx, int ny);

  const GridShape& shape() const { return shape_; }
  double Lx() const { return shape_.Lx; }
  double Ly() const { return shape_.Ly; }
  int nx() const { return shape_.nx; }
  int ny() const { return shape_.ny; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double cell_area() const { return hx_ * hy_; }
  int interior_size() const { return shape_.nx * shape_.ny; }
  int index(int i, int j) const { return j * shape_.nx + i; }
  double x(int i) const { return (i + 1) * hx_; }
  double y(int j) const { return (j + 1) * hy_; }

  std::span<const BoundaryNode> boundary() const { return boundary_; }
  int boundary_size() const { return static_cast<int>(boundary_.size()); }
  std::vector<int> edge_nodes(Edge e) const;

  // Interior nodes at distance h and 2h from boundary sample k along -nu.
  int inward_neighbor(int k, int depth) const;
  double normal_spacing(int k) const;
  double tangent_spacing(int k) const;

  double perimeter() const { return 2 * (shape_.Lx + shape_.Ly); }
  double diameter() const;

  bool operator==(const Grid& o) const { return shape_ == o.shape_; }

 private:
  GridShape shape_;
  double hx_, hy_;
  std::vector<BoundaryNode> boundary_;
};

Grid build_grid(double Lx, double Ly, int nx, int ny);

class Potential {
 public:
  Potential(const Grid& grid, Eigen::VectorXd values, double sup_bound);

  const GridShape& shape() const { return shape_; }
  const Eigen::VectorXd& values() const { return values_; }
  double sup_bound() const { return sup_bound_; }
  double operator[](int k) const { return values_[k]; }

 private:
  GridShape shape_;
  Eigen::VectorXd values_;
  double sup_bound_;
};

Potential sample_potential(const std::function<double(double, double)>& func,
                           const Grid& grid, double M);
Potential constant_potential(const Grid& grid, double c, double M);

class BoundaryFunction {
 public:
  BoundaryFunction() = default;
  BoundaryFunction(const Grid& grid, Eigen::VectorXcd values);
  explicit BoundaryFunction(const Grid& grid);  // zeros

  const GridShape& shape() const { return shape_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }
  Complex operator[](int k) const { return values_[k]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  GridShape shape_;
  Eigen::VectorXcd values_;
};

BoundaryFunction make_boundary_function(
    const Grid& grid, const std::function<Complex(const BoundaryNode&)>& func);

// sum_k w_k g1_k conj(g2_k)
Complex boundary_inner(const BoundaryFunction& g1, const BoundaryFunction& g2,
                       const Grid& grid);
// Same sum restricted to the listed boundary sample indices.
Complex boundary_inner(const BoundaryFunction& g1, const BoundaryFunction& g2,
                       const Grid& grid, std::span<const int> subset);
double boundary_norm(const BoundaryFunction& g, const Grid& grid);

// Discrete L2(Omega) quantities with cell weight hx*hy.
double interior_norm(const Eigen::VectorXd& v, const Grid& grid);
double interior_norm(const Eigen::VectorXcd& v, const Grid& grid);

void require_same_grid(const GridShape& a, const GridShape& b, const char* what);

}  // namespace blab
