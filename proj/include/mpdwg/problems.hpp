#pragma once

#include "mpdwg/forms.hpp"
#include "mpdwg/mesh.hpp"
#include "mpdwg/weakcalc.hpp"

#include <functional>
#include <string>

namespace mpdwg {

using HessianField = std::function<Mat2(const Vec2&)>;

enum class Smoothness { Smooth, PiecewiseQuadrants, SingularAtOrigin };

struct ExactSolution {
  ScalarField u;
  GradientField grad;
  HessianField hessian;
  std::string regularity;
};

enum class LoadMode {
  ClosedForm,  ///< use the analytic load
  Derived,     ///< f(x) = sum_ij a_ij(x) d_ij u(x)
};

/// Test problem: sum_ij a_ij d_ij u = f in the domain, u = g on its boundary.
struct ProblemSpec {
  int case_id = 0;
  std::string name;
  DomainId domain = DomainId::UnitSquare;
  CoefficientField coefficient;
  Smoothness smoothness = Smoothness::Smooth;
  double ellipticity_lower = 1.0;  ///< C1
  double ellipticity_upper = 1.0;  ///< C2
  ExactSolution exact;
  ScalarField closed_form_load;  ///< empty when no closed form exists
  LoadMode load_mode = LoadMode::Derived;
  double cordes = 1.0;  ///< documented Cordes epsilon

  double load(const Vec2& x) const;
  double derived_load(const Vec2& x) const;
  double boundary(const Vec2& x) const { return exact.u(x); }
  ScalarField load_field() const {
    return [this](const Vec2& x) { return load(x); };
  }
};

/// sin(x1) sin(x2) with a = I on the unit square or the L-shaped domain.
ProblemSpec case1(DomainId domain = DomainId::UnitSquare);

/// a = [[2, s1 s2], [s1 s2, 2]] with s_i = sign(x_i) on (-1,1)^2,
/// u = x1 x2 (1 - e^{1-|x1|}) (1 - e^{1-|x2|}).
ProblemSpec case2();

/// a = I + x x^T / |x|^2, u = |x|^alpha on the unit square or (-1,1)^2.
ProblemSpec case3(double alpha = 1.6, DomainId domain = DomainId::UnitSquare);

/// Dispatch on the case number; enforces the admissible (case, domain) pairs.
ProblemSpec make_problem(int case_id, DomainId domain, double alpha = 1.6);

/// Constant coefficient with an exact quadratic solution; f is derived.
ProblemSpec quadratic_problem(const Mat2& a, double cxx, double cxy, double cyy, double cx, double cy,
                              double c0, DomainId domain = DomainId::UnitSquare);

/// Cordes parameter (tr a)^2 / |a|_F^2 - (d - 1) for d = 2, clamped to 1.
double cordes_epsilon(const Mat2& a);

}  // namespace mpdwg
