#include "mpdwg/forms.hpp"

#include <cmath>

namespace mpdwg {

Eigen::MatrixXd local_s(const ElementFrame& frame, int k, bool include_trace_penalty, int q_edge) {
  const WeakLayout layout{k};
  const ElementBasis trial = frame.basis(k);
  const EdgeBasis trace_basis(k);
  const EdgeBasis grad_basis(k - 1);
  const QuadratureRule& erule = quad_edge(q_edge);
  const double h = frame.geom.diameter;

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(layout.size(), layout.size());
  Eigen::RowVectorXd jump(layout.size());
  for (int e = 0; e < 3; ++e) {
    const EdgeFrame& edge = frame.edges[e];
    for (std::size_t q = 0; q < erule.size(); ++q) {
      const double t = erule.points[q].x();
      const double w = erule.weights[q] * edge.length;
      const Vec2 x = edge.at(t);
      const Eigen::MatrixX2d grad = trial.gradients(x);
      for (int c = 0; c < 2; ++c) {
        jump.setZero();
        jump.head(layout.n0()) = grad.col(c).transpose();
        jump.segment(layout.vg_offset(e, c), layout.ng()) = -grad_basis.values(t).transpose();
        s.noalias() += (w / h) * jump.transpose() * jump;
      }
      if (include_trace_penalty) {
        jump.setZero();
        jump.head(layout.n0()) = trial.values(x).transpose();
        jump.segment(layout.vb_offset(e), layout.nb()) = -trace_basis.values(t).transpose();
        s.noalias() += (w / (h * h * h)) * jump.transpose() * jump;
      }
    }
  }
  return s;
}

namespace {

void check_coefficient(const Mat2& a) {
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if (!a.allFinite() || std::abs(a(0, 1) - a(1, 0)) > 1e-12 * scale) {
    throw SamplingError("invalid coefficient sample");
  }
}

}  // namespace

Eigen::MatrixXd local_b(const WeakHessianOperator& hessian, const ElementFrame& frame,
                        const CoefficientField& a, int q_triangle) {
  const ElementBasis& basis = hessian.target_basis();
  const MappedRule rule = frame.rule(q_triangle);
  const int nr = basis.size();

  std::array<std::array<Eigen::MatrixXd, 2>, 2> weighted_mass;
  for (auto& row : weighted_mass)
    for (auto& m : row) m = Eigen::MatrixXd::Zero(nr, nr);
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Mat2 aq = a(rule.points[q]);
    check_coefficient(aq);
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    const Eigen::MatrixXd pp = rule.weights[q] * phi * phi.transpose();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) weighted_mass[i][j] += aq(i, j) * pp;
  }

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nr, hessian.layout().size());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b.noalias() += weighted_mass[i][j] * hessian.matrix(i, j);
  return b;
}

Eigen::MatrixXd local_c(const ElementFrame& frame, int r, int q_triangle) {
  const ElementBasis basis = frame.basis(r);
  const MappedRule rule = frame.rule(q_triangle);
  const double h = frame.geom.diameter;
  const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Vec2& x = rule.points[q];
    const double w = rule.weights[q];
    const Eigen::VectorXd phi = basis.values(x);
    const Eigen::MatrixX2d grad = basis.gradients(x);
    c.noalias() += (w * h2) * phi * phi.transpose();
    c.noalias() += (w * h3) * grad * grad.transpose();
    if (r >= 2) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const Eigen::VectorXd d2 = basis.second_derivatives(x, i, j);
          c.noalias() += (w * h4) * d2 * d2.transpose();
        }
      }
    }
  }
  return c;
}

Eigen::VectorXd local_load(const ElementFrame& frame, const ScalarField& f, int r, int q_triangle) {
  const ElementBasis basis = frame.basis(r);
  const MappedRule rule = frame.rule(q_triangle);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const double fq = f(rule.points[q]);
    if (!std::isfinite(fq)) throw SamplingError("load singularity at quadrature node");
    out += rule.weights[q] * fq * basis.values(rule.points[q]);
  }
  return out;
}

}  // namespace mpdwg
