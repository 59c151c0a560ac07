#pragma once

#include "mpdwg/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace mpdwg {

using ScalarField = std::function<double(const Vec2&)>;

/// Quadrature rule on a reference cell.
///
/// Triangle rules live on the reference triangle (0,0),(1,0),(0,1) and their
/// weights sum to 1/2; edge rules live on [0,1] and their weights sum to 1.
struct QuadratureRule {
  std::vector<Vec2> points;  ///< edge rules use only x()
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1].
QuadratureRule gauss_legendre(int npoints);

/// Collapsed (Duffy) Gauss product rule, exact for total degree <= q.
/// All weights are positive and all nodes strictly interior.
/// Throws std::invalid_argument("quadrature degree unavailable") unless 1 <= q <= 12.
const QuadratureRule& quad_triangle(int q);

/// Gauss rule with ceil((q+1)/2) nodes, exact to degree q on [0,1].
const QuadratureRule& quad_edge(int q);

/// Physical quadrature points and weights on a triangle.
struct MappedRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};
MappedRule map_rule(const QuadratureRule& ref, const std::array<Vec2, 3>& tri);

/// Scaled monomials ((x-xc)/h)^a ((y-yc)/h)^b, a+b <= degree, ordered by total
/// degree then decreasing a.
class ElementBasis {
 public:
  ElementBasis(int degree, const Vec2& center, double scale);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const Vec2& center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<std::array<int, 2>>& exponents() const { return exponents_; }

  Eigen::VectorXd values(const Vec2& x) const;
  /// Rows are basis functions, columns are d/dx, d/dy.
  Eigen::MatrixX2d gradients(const Vec2& x) const;
  /// Second derivative d^2/(dx_i dx_j) of every basis function.
  Eigen::VectorXd second_derivatives(const Vec2& x, int i, int j) const;

  static int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

 private:
  int degree_;
  Vec2 center_;
  double scale_;
  std::vector<std::array<int, 2>> exponents_;
};

/// Monomials t^j, j <= degree, in the parameter t in [0,1] along an edge.
class EdgeBasis {
 public:
  explicit EdgeBasis(int degree) : degree_(degree) {}
  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  Eigen::VectorXd values(double t) const;
  /// d/dt of every basis function.
  Eigen::VectorXd derivatives(double t) const;

 private:
  int degree_;
};

/// Oriented straight edge x(t) = start + t (end - start).
struct EdgeFrame {
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
  Vec2 normal = Vec2::Zero();  ///< outward with respect to the owning element
  double length = 0.0;

  Vec2 at(double t) const { return start + t * (end - start); }
};

/// Geometry of one triangle together with its three edges parametrized in the
/// global edge orientation (lower vertex index first).
struct ElementFrame {
  std::array<Vec2, 3> vertices{};
  ElementGeometry geom;
  std::array<EdgeFrame, 3> edges{};

  static ElementFrame from_mesh(const TriMesh& mesh, int t);
  /// Standalone triangle; edges are oriented along the local vertex order.
  static ElementFrame from_points(const Vec2& a, const Vec2& b, const Vec2& c);

  ElementBasis basis(int degree) const { return ElementBasis(degree, geom.centroid, geom.diameter); }
  MappedRule rule(int q) const { return map_rule(quad_triangle(q), vertices); }
};

Eigen::MatrixXd mass_matrix(const ElementBasis& basis, const MappedRule& rule);
Eigen::MatrixXd edge_mass_matrix(const EdgeBasis& basis, const QuadratureRule& rule, double length);

/// L2(T) projection of f onto P_m(T) in the scaled monomial basis of `frame`.
Eigen::VectorXd l2_project_element(const ScalarField& f, int m, const ElementFrame& frame, int q = 8);

/// L2(e) projection of f onto P_m(e) in the edge basis t^j.
Eigen::VectorXd l2_project_edge(const ScalarField& f, int m, const EdgeFrame& edge, int q = 7);

double evaluate(const ElementBasis& basis, const Eigen::VectorXd& coeffs, const Vec2& x);
double evaluate(const EdgeBasis& basis, const Eigen::VectorXd& coeffs, double t);

}  // namespace mpdwg
