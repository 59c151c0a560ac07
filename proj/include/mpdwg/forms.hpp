#pragma once

#include "mpdwg/errors.hpp"
#include "mpdwg/polytools.hpp"
#include "mpdwg/weakcalc.hpp"

#include <Eigen/Dense>

#include <functional>

namespace mpdwg {

using Mat2 = Eigen::Matrix2d;
using CoefficientField = std::function<Mat2(const Vec2&)>;

/// Element-local matrices over the flattened weak-function layout (columns of
/// b, rows/cols of s) and the multiplier basis P_r(T) (rows of b, c, f).
struct LocalForms {
  Eigen::MatrixXd s;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  Eigen::VectorXd f;
};

/// s_T(u,v) = h^-1 <grad u0 - ug, grad v0 - vg>_dT, plus h^-3 <u0 - ub, v0 - vb>_dT
/// when `include_trace_penalty` is set. The trace term vanishes identically for
/// C0-type functions, which is why assembly omits it by default.
Eigen::MatrixXd local_s(const ElementFrame& frame, int k, bool include_trace_penalty = false,
                        int q_edge = 7);

/// b_T(v, sigma) = sum_ij (a_ij H_ij v, sigma)_T with a sampled at quadrature nodes.
Eigen::MatrixXd local_b(const WeakHessianOperator& hessian, const ElementFrame& frame,
                        const CoefficientField& a, int q_triangle = 8);

/// c_T(rho, sigma) = h^2 (rho, sigma) + h^3 (grad rho, grad sigma) + h^4 sum_ij (d_ij rho, d_ij sigma).
Eigen::MatrixXd local_c(const ElementFrame& frame, int r, int q_triangle = 8);

/// (f, phi_p)_T for the multiplier basis of degree r.
Eigen::VectorXd local_load(const ElementFrame& frame, const ScalarField& f, int r, int q_triangle = 8);

}  // namespace mpdwg
