#include "mpdwg/weakcalc.hpp"

#include <stdexcept>

namespace mpdwg {

WeakFunctionLocal WeakFunctionLocal::zero(int k) {
  WeakFunctionLocal v;
  v.v0 = Eigen::VectorXd::Zero(ElementBasis::dimension(k));
  for (int e = 0; e < 3; ++e) {
    v.vb[e] = Eigen::VectorXd::Zero(k + 1);
    v.vg[e][0] = Eigen::VectorXd::Zero(k);
    v.vg[e][1] = Eigen::VectorXd::Zero(k);
  }
  return v;
}

Eigen::VectorXd WeakFunctionLocal::flatten() const {
  const WeakLayout layout{static_cast<int>(vb[0].size()) - 1};
  Eigen::VectorXd x(layout.size());
  x.head(layout.n0()) = v0;
  for (int e = 0; e < 3; ++e) {
    x.segment(layout.vb_offset(e), layout.nb()) = vb[e];
    for (int c = 0; c < 2; ++c) x.segment(layout.vg_offset(e, c), layout.ng()) = vg[e][c];
  }
  return x;
}

WeakFunctionLocal WeakFunctionLocal::unflatten(const Eigen::VectorXd& x, int k) {
  const WeakLayout layout{k};
  if (x.size() != layout.size()) throw std::invalid_argument("weak function coefficient size mismatch");
  WeakFunctionLocal v;
  v.v0 = x.head(layout.n0());
  for (int e = 0; e < 3; ++e) {
    v.vb[e] = x.segment(layout.vb_offset(e), layout.nb());
    for (int c = 0; c < 2; ++c) v.vg[e][c] = x.segment(layout.vg_offset(e, c), layout.ng());
  }
  return v;
}

WeakHessianOperator::WeakHessianOperator(const ElementFrame& frame, int k, int r, int q_triangle,
                                         int q_edge)
    : layout_{k}, r_(r), target_(frame.basis(r)) {
  if (k < 2) throw std::invalid_argument("weak Hessian requires k >= 2");
  if (r < 0 || r > k - 1) throw std::invalid_argument("weak Hessian degree must satisfy 0 <= r <= k-1");

  const ElementBasis trial = frame.basis(k);
  const EdgeBasis trace_basis(k);
  const EdgeBasis grad_basis(k - 1);
  const MappedRule rule = frame.rule(q_triangle);
  const QuadratureRule& erule = quad_edge(q_edge);
  const int nr = target_.size();

  mass_ = mass_matrix(target_, rule);
  const Eigen::LDLT<Eigen::MatrixXd> mass_factor(mass_);

  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nr, layout_.size());
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const Eigen::VectorXd d2phi = target_.second_derivatives(rule.points[q], j, i);
        rhs.leftCols(layout_.n0()).noalias() +=
            rule.weights[q] * d2phi * trial.values(rule.points[q]).transpose();
      }
      for (int e = 0; e < 3; ++e) {
        const EdgeFrame& edge = frame.edges[e];
        for (std::size_t q = 0; q < erule.size(); ++q) {
          const double t = erule.points[q].x();
          const double w = erule.weights[q] * edge.length;
          const Vec2 x = edge.at(t);
          const Eigen::VectorXd dphi_j = target_.gradients(x).col(j);
          const Eigen::VectorXd phi = target_.values(x);
          rhs.middleCols(layout_.vb_offset(e), layout_.nb()).noalias() -=
              (w * edge.normal[i]) * dphi_j * trace_basis.values(t).transpose();
          rhs.middleCols(layout_.vg_offset(e, i), layout_.ng()).noalias() +=
              (w * edge.normal[j]) * phi * grad_basis.values(t).transpose();
        }
      }
      ops_[i][j] = mass_factor.solve(rhs);
    }
  }
}

WeakHessianLocal WeakHessianOperator::apply(const WeakFunctionLocal& v) const {
  const Eigen::VectorXd x = v.flatten();
  WeakHessianLocal h;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) h[i][j] = ops_[i][j] * x;
  return h;
}

WeakHessianLocal weak_hessian(const WeakFunctionLocal& v, int r, const ElementFrame& frame) {
  const int k = static_cast<int>(v.vb[0].size()) - 1;
  return WeakHessianOperator(frame, k, r).apply(v);
}

WeakHessianLocal weak_hessian_by_parts(const WeakFunctionLocal& v, int r, const ElementFrame& frame,
                                       int q_triangle, int q_edge) {
  const int k = static_cast<int>(v.vb[0].size()) - 1;
  const ElementBasis trial = frame.basis(k);
  const ElementBasis target = frame.basis(r);
  const EdgeBasis trace_basis(k);
  const EdgeBasis grad_basis(k - 1);
  const MappedRule rule = frame.rule(q_triangle);
  const QuadratureRule& erule = quad_edge(q_edge);

  const Eigen::MatrixXd mass = mass_matrix(target, rule);
  WeakHessianLocal h;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(target.size());
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const double d2v0 = trial.second_derivatives(rule.points[q], i, j).dot(v.v0);
        rhs += rule.weights[q] * d2v0 * target.values(rule.points[q]);
      }
      for (int e = 0; e < 3; ++e) {
        const EdgeFrame& edge = frame.edges[e];
        for (std::size_t q = 0; q < erule.size(); ++q) {
          const double t = erule.points[q].x();
          const double w = erule.weights[q] * edge.length;
          const Vec2 x = edge.at(t);
          const double jump_value = trace_basis.values(t).dot(v.vb[e]) - trial.values(x).dot(v.v0);
          const double jump_grad =
              grad_basis.values(t).dot(v.vg[e][i]) - trial.gradients(x).col(i).dot(v.v0);
          rhs -= (w * jump_value * edge.normal[i]) * target.gradients(x).col(j);
          rhs += (w * jump_grad * edge.normal[j]) * target.values(x);
        }
      }
      h[i][j] = mass.llt().solve(rhs);
    }
  }
  return h;
}

WeakFunctionLocal GlobalWeakFunction::local(const TriMesh& mesh, int t) const {
  WeakFunctionLocal v;
  v.v0 = v0[t];
  const auto& te = mesh.triangle_edges(t);
  for (int e = 0; e < 3; ++e) {
    v.vb[e] = vb[te[e]];
    v.vg[e] = vg[te[e]];
  }
  return v;
}

GlobalWeakFunction project_Qh(const ScalarField& w, const GradientField& grad_w, const TriMesh& mesh,
                              int k, int q_triangle, int q_edge) {
  GlobalWeakFunction g;
  g.k = k;
  g.v0.resize(mesh.num_triangles());
  g.vb.resize(mesh.num_edges());
  g.vg.resize(mesh.num_edges());
  std::vector<bool> done(mesh.num_edges(), false);

  const auto dx = [&](const Vec2& x) { return grad_w(x).x(); };
  const auto dy = [&](const Vec2& x) { return grad_w(x).y(); };

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame frame = ElementFrame::from_mesh(mesh, t);
    g.v0[t] = l2_project_element(w, k, frame, q_triangle);
    const auto& te = mesh.triangle_edges(t);
    for (int e = 0; e < 3; ++e) {
      if (done[te[e]]) continue;
      done[te[e]] = true;
      g.vb[te[e]] = l2_project_edge(w, k, frame.edges[e], q_edge);
      g.vg[te[e]][0] = l2_project_edge(dx, k - 1, frame.edges[e], q_edge);
      g.vg[te[e]][1] = l2_project_edge(dy, k - 1, frame.edges[e], q_edge);
    }
  }
  return g;
}

}  // namespace mpdwg
