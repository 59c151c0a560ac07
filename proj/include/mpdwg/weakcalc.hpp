#pragma once

#include "mpdwg/mesh.hpp"
#include "mpdwg/polytools.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace mpdwg {

using GradientField = std::function<Vec2(const Vec2&)>;

/// Coefficient layout of a local weak function {v0, vb, vg} of degree k:
/// v0 in P_k(T), vb in P_k(e) and each component of vg in P_{k-1}(e).
/// Flattened order: v0, then vb per local edge, then vg per (edge, component).
struct WeakLayout {
  int k = 2;

  int n0() const { return ElementBasis::dimension(k); }
  int nb() const { return k + 1; }
  int ng() const { return k; }
  int size() const { return n0() + 3 * nb() + 6 * ng(); }
  int vb_offset(int edge) const { return n0() + edge * nb(); }
  int vg_offset(int edge, int comp) const { return n0() + 3 * nb() + (2 * edge + comp) * ng(); }
};

/// Element-local weak function. Edge coefficients are in the EdgeBasis of each
/// local edge's EdgeFrame.
struct WeakFunctionLocal {
  Eigen::VectorXd v0;
  std::array<Eigen::VectorXd, 3> vb;
  std::array<std::array<Eigen::VectorXd, 2>, 3> vg;

  static WeakFunctionLocal zero(int k);
  Eigen::VectorXd flatten() const;
  static WeakFunctionLocal unflatten(const Eigen::VectorXd& x, int k);
};

/// Component (i,j) of the discrete weak Hessian as P_r coefficients.
using WeakHessianLocal = std::array<std::array<Eigen::VectorXd, 2>, 2>;

/// Discrete weak second derivatives on one element.
///
/// For each (i,j) the operator maps the flattened weak-function coefficients
/// to P_r(T) coefficients by solving
///   (H_ij v, phi)_T = (v0, d_ji phi)_T - <vb n_i, d_j phi> + <vg_i, phi n_j>
/// for every phi in P_r(T). The mass matrix is factored once and shared by
/// all four components.
class WeakHessianOperator {
 public:
  WeakHessianOperator(const ElementFrame& frame, int k, int r, int q_triangle = 8, int q_edge = 7);

  int k() const { return layout_.k; }
  int r() const { return r_; }
  const WeakLayout& layout() const { return layout_; }
  const ElementBasis& target_basis() const { return target_; }
  const Eigen::MatrixXd& mass() const { return mass_; }

  /// dim P_r  x  layout().size()
  const Eigen::MatrixXd& matrix(int i, int j) const { return ops_[i][j]; }

  WeakHessianLocal apply(const WeakFunctionLocal& v) const;

 private:
  WeakLayout layout_;
  int r_;
  ElementBasis target_;
  Eigen::MatrixXd mass_;
  std::array<std::array<Eigen::MatrixXd, 2>, 2> ops_;
};

WeakHessianLocal weak_hessian(const WeakFunctionLocal& v, int r, const ElementFrame& frame);

/// Same quantity through the integrated-by-parts identity
///   (H_ij v, phi) = (d_ij v0, phi) - <(vb - v0) n_i, d_j phi> + <vg_i - d_i v0, phi n_j>.
/// Independent code path used to cross-check the defining form.
WeakHessianLocal weak_hessian_by_parts(const WeakFunctionLocal& v, int r, const ElementFrame& frame,
                                       int q_triangle = 8, int q_edge = 7);

/// Weak function stored once per element (v0) and once per global edge (vb, vg).
struct GlobalWeakFunction {
  int k = 2;
  std::vector<Eigen::VectorXd> v0;
  std::vector<Eigen::VectorXd> vb;
  std::vector<std::array<Eigen::VectorXd, 2>> vg;

  WeakFunctionLocal local(const TriMesh& mesh, int t) const;
};

/// Q_h w = {Q_0 w, Q_b w, Q_g grad w}.
GlobalWeakFunction project_Qh(const ScalarField& w, const GradientField& grad_w, const TriMesh& mesh,
                              int k = 2, int q_triangle = 8, int q_edge = 7);

}  // namespace mpdwg
