#include "mpdwg/polytools.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace mpdwg {

namespace {

// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre needs at least one point");
  const int n = npoints;
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.degree = 2 * n - 1;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of the [-1,1] weight
    // x decreases with i; map [-1,1] -> [0,1]
    rule.points[i] = Vec2(0.5 * (1.0 - x), 0.0);
    rule.points[n - 1 - i] = Vec2(0.5 * (1.0 + x), 0.0);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace {

QuadratureRule collapsed_rule(int q) {
  const QuadratureRule gu = gauss_legendre((q + 3) / 2);  // integrand degree q+1 in u
  const QuadratureRule gv = gauss_legendre((q + 2) / 2);  // degree q in v
  QuadratureRule rule;
  rule.degree = q;
  for (std::size_t i = 0; i < gu.size(); ++i) {
    const double u = gu.points[i].x();
    for (std::size_t j = 0; j < gv.size(); ++j) {
      const double v = gv.points[j].x();
      rule.points.emplace_back(u, (1.0 - u) * v);
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

constexpr int kMaxTriangleDegree = 12;
constexpr int kMaxEdgeDegree = 41;

}  // namespace

const QuadratureRule& quad_triangle(int q) {
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> r;
    for (int d = 0; d <= kMaxTriangleDegree; ++d) r.push_back(collapsed_rule(d));
    return r;
  }();
  if (q < 1 || q > kMaxTriangleDegree) throw std::invalid_argument("quadrature degree unavailable");
  return rules[q];
}

const QuadratureRule& quad_edge(int q) {
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> r;
    for (int d = 0; d <= kMaxEdgeDegree; ++d) {
      QuadratureRule g = gauss_legendre((d + 2) / 2);
      g.degree = d;
      r.push_back(std::move(g));
    }
    return r;
  }();
  if (q < 0 || q > kMaxEdgeDegree) throw std::invalid_argument("quadrature degree unavailable");
  return rules[q];
}

MappedRule map_rule(const QuadratureRule& ref, const std::array<Vec2, 3>& tri) {
  MappedRule out;
  const Vec2 e1 = tri[1] - tri[0];
  const Vec2 e2 = tri[2] - tri[0];
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  out.points.reserve(ref.size());
  out.weights.reserve(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    out.points.push_back(tri[0] + ref.points[i].x() * e1 + ref.points[i].y() * e2);
    out.weights.push_back(ref.weights[i] * jac);
  }
  return out;
}

ElementBasis::ElementBasis(int degree, const Vec2& center, double scale)
    : degree_(degree), center_(center), scale_(scale) {
  if (degree < 0) throw std::invalid_argument("negative polynomial degree");
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) exponents_.push_back({a, d - a});
}

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Eigen::VectorXd ElementBasis::values(const Vec2& x) const {
  const double xi = (x.x() - center_.x()) / scale_;
  const double eta = (x.y() - center_.y()) / scale_;
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k) v[k] = ipow(xi, exponents_[k][0]) * ipow(eta, exponents_[k][1]);
  return v;
}

Eigen::MatrixX2d ElementBasis::gradients(const Vec2& x) const {
  const double xi = (x.x() - center_.x()) / scale_;
  const double eta = (x.y() - center_.y()) / scale_;
  Eigen::MatrixX2d g(size(), 2);
  for (int k = 0; k < size(); ++k) {
    const auto [a, b] = exponents_[k];
    g(k, 0) = a == 0 ? 0.0 : a * ipow(xi, a - 1) * ipow(eta, b) / scale_;
    g(k, 1) = b == 0 ? 0.0 : b * ipow(xi, a) * ipow(eta, b - 1) / scale_;
  }
  return g;
}

Eigen::VectorXd ElementBasis::second_derivatives(const Vec2& x, int i, int j) const {
  const double xi = (x.x() - center_.x()) / scale_;
  const double eta = (x.y() - center_.y()) / scale_;
  const int dx = (i == 0) + (j == 0);
  const int dy = (i == 1) + (j == 1);
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k) {
    const auto [a, b] = exponents_[k];
    if (a < dx || b < dy) {
      v[k] = 0.0;
      continue;
    }
    double c = 1.0;
    for (int s = 0; s < dx; ++s) c *= (a - s);
    for (int s = 0; s < dy; ++s) c *= (b - s);
    v[k] = c * ipow(xi, a - dx) * ipow(eta, b - dy) / (scale_ * scale_);
  }
  return v;
}

Eigen::VectorXd EdgeBasis::values(double t) const {
  Eigen::VectorXd v(size());
  double p = 1.0;
  for (int j = 0; j <= degree_; ++j, p *= t) v[j] = p;
  return v;
}

Eigen::VectorXd EdgeBasis::derivatives(double t) const {
  Eigen::VectorXd v(size());
  v[0] = 0.0;
  double p = 1.0;
  for (int j = 1; j <= degree_; ++j, p *= t) v[j] = j * p;
  return v;
}

ElementFrame ElementFrame::from_mesh(const TriMesh& mesh, int t) {
  ElementFrame f;
  f.vertices = mesh.triangle_points(t);
  f.geom = geometry(f.vertices);
  const auto& tri = mesh.triangles()[t];
  for (int i = 0; i < 3; ++i) {
    const int a = tri[(i + 1) % 3];
    const int b = tri[(i + 2) % 3];
    const int lo = std::min(a, b), hi = std::max(a, b);
    EdgeFrame& e = f.edges[i];
    e.start = mesh.vertices()[lo];
    e.end = mesh.vertices()[hi];
    e.normal = f.geom.normals[i];
    e.length = f.geom.edge_lengths[i];
  }
  return f;
}

ElementFrame ElementFrame::from_points(const Vec2& a, const Vec2& b, const Vec2& c) {
  ElementFrame f;
  f.vertices = {a, b, c};
  if (!(signed_area(a, b, c) > 0.0)) throw std::invalid_argument("triangle is not counterclockwise");
  f.geom = geometry(f.vertices);
  for (int i = 0; i < 3; ++i) {
    EdgeFrame& e = f.edges[i];
    e.start = f.vertices[(i + 1) % 3];
    e.end = f.vertices[(i + 2) % 3];
    e.normal = f.geom.normals[i];
    e.length = f.geom.edge_lengths[i];
  }
  return f;
}

Eigen::MatrixXd mass_matrix(const ElementBasis& basis, const MappedRule& rule) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    m.noalias() += rule.weights[q] * phi * phi.transpose();
  }
  return m;
}

Eigen::MatrixXd edge_mass_matrix(const EdgeBasis& basis, const QuadratureRule& rule, double length) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q].x());
    m.noalias() += rule.weights[q] * length * phi * phi.transpose();
  }
  return m;
}

Eigen::VectorXd l2_project_element(const ScalarField& f, int m, const ElementFrame& frame, int q) {
  const ElementBasis basis = frame.basis(m);
  const MappedRule rule = frame.rule(q);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    const Eigen::VectorXd phi = basis.values(rule.points[k]);
    mass.noalias() += rule.weights[k] * phi * phi.transpose();
    rhs += rule.weights[k] * f(rule.points[k]) * phi;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw std::logic_error("singular element mass matrix");
  return llt.solve(rhs);
}

Eigen::VectorXd l2_project_edge(const ScalarField& f, int m, const EdgeFrame& edge, int q) {
  const EdgeBasis basis(m);
  const QuadratureRule& rule = quad_edge(q);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.points[k].x();
    const double w = rule.weights[k] * edge.length;
    const Eigen::VectorXd phi = basis.values(t);
    mass.noalias() += w * phi * phi.transpose();
    rhs += w * f(edge.at(t)) * phi;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw std::logic_error("singular edge mass matrix");
  return llt.solve(rhs);
}

double evaluate(const ElementBasis& basis, const Eigen::VectorXd& coeffs, const Vec2& x) {
  return basis.values(x).dot(coeffs);
}

double evaluate(const EdgeBasis& basis, const Eigen::VectorXd& coeffs, double t) {
  return basis.values(t).dot(coeffs);
}

}  // namespace mpdwg
