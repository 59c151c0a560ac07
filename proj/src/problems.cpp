#include "mpdwg/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace mpdwg {

double ProblemSpec::derived_load(const Vec2& x) const {
  return coefficient(x).cwiseProduct(exact.hessian(x)).sum();
}

double ProblemSpec::load(const Vec2& x) const {
  if (load_mode == LoadMode::ClosedForm && closed_form_load) return closed_form_load(x);
  return derived_load(x);
}

ProblemSpec case1(DomainId domain) {
  if (domain != DomainId::UnitSquare && domain != DomainId::LShape) {
    throw std::invalid_argument("case 1 runs on the unit square or the L-shaped domain");
  }
  ProblemSpec p;
  p.case_id = 1;
  p.name = "case1";
  p.domain = domain;
  p.coefficient = [](const Vec2&) { return Mat2::Identity(); };
  p.smoothness = Smoothness::Smooth;
  p.exact.u = [](const Vec2& x) { return std::sin(x.x()) * std::sin(x.y()); };
  p.exact.grad = [](const Vec2& x) {
    return Vec2(std::cos(x.x()) * std::sin(x.y()), std::sin(x.x()) * std::cos(x.y()));
  };
  p.exact.hessian = [](const Vec2& x) {
    const double sx = std::sin(x.x()), cx = std::cos(x.x());
    const double sy = std::sin(x.y()), cy = std::cos(x.y());
    Mat2 h;
    h << -sx * sy, cx * cy, cx * cy, -sx * sy;
    return h;
  };
  p.exact.regularity = "analytic";
  p.closed_form_load = [](const Vec2& x) { return -2.0 * std::sin(x.x()) * std::sin(x.y()); };
  p.load_mode = LoadMode::Derived;
  p.cordes = 1.0;
  return p;
}

namespace {

double strict_sign(double s) {
  if (s == 0.0) throw SamplingError("coefficient sampled on discontinuity");
  return s > 0.0 ? 1.0 : -1.0;
}

// p(s) = s (1 - e^{1-|s|}) and its derivatives; case 2 is u = p(x1) p(x2).
double p0(double s) { return s * (1.0 - std::exp(1.0 - std::abs(s))); }
double p1(double s) {
  const double e = std::exp(1.0 - std::abs(s));
  return 1.0 - e + std::abs(s) * e;
}
double p2(double s) { return strict_sign(s) * std::exp(1.0 - std::abs(s)) * (2.0 - std::abs(s)); }

}  // namespace

ProblemSpec case2() {
  ProblemSpec p;
  p.case_id = 2;
  p.name = "case2";
  p.domain = DomainId::BigSquare;
  p.coefficient = [](const Vec2& x) {
    const double s = strict_sign(x.x()) * strict_sign(x.y());
    Mat2 a;
    a << 2.0, s, s, 2.0;
    return a;
  };
  p.smoothness = Smoothness::PiecewiseQuadrants;
  p.ellipticity_lower = 1.0;
  p.ellipticity_upper = 3.0;
  p.exact.u = [](const Vec2& x) { return p0(x.x()) * p0(x.y()); };
  p.exact.grad = [](const Vec2& x) { return Vec2(p1(x.x()) * p0(x.y()), p0(x.x()) * p1(x.y())); };
  p.exact.hessian = [](const Vec2& x) {
    Mat2 h;
    const double mixed = p1(x.x()) * p1(x.y());
    h << p2(x.x()) * p0(x.y()), mixed, mixed, p0(x.x()) * p2(x.y());
    return h;
  };
  p.exact.regularity = "C1, piecewise smooth across the axes";
  p.load_mode = LoadMode::Derived;
  p.cordes = 0.6;
  return p;
}

ProblemSpec case3(double alpha, DomainId domain) {
  if (domain != DomainId::UnitSquare && domain != DomainId::BigSquare) {
    throw std::invalid_argument("case 3 runs on the unit square or (-1,1)^2");
  }
  if (!(alpha > 1.0)) throw std::invalid_argument("case 3 requires alpha > 1");
  ProblemSpec p;
  p.case_id = 3;
  p.name = "case3";
  p.domain = domain;
  p.coefficient = [](const Vec2& x) {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) throw SamplingError("singular point");
    return Mat2(Mat2::Identity() + x * x.transpose() / r2);
  };
  p.smoothness = Smoothness::SingularAtOrigin;
  p.ellipticity_lower = 1.0;
  p.ellipticity_upper = 2.0;
  p.exact.u = [alpha](const Vec2& x) { return std::pow(x.norm(), alpha); };
  p.exact.grad = [alpha](const Vec2& x) -> Vec2 {
    const double r = x.norm();
    if (r == 0.0) return Vec2::Zero();
    return alpha * std::pow(r, alpha - 2.0) * x;
  };
  p.exact.hessian = [alpha](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) throw SamplingError("singular point");
    return Mat2(alpha * std::pow(r, alpha - 2.0) * Mat2::Identity() +
                alpha * (alpha - 2.0) * std::pow(r, alpha - 4.0) * x * x.transpose());
  };
  p.exact.regularity = "H^{1+alpha-tau}";
  p.closed_form_load = [alpha](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) throw SamplingError("singular point");
    return (2.0 * alpha * alpha - alpha) * std::pow(r, alpha - 2.0);
  };
  p.load_mode = LoadMode::ClosedForm;
  p.cordes = 0.8;
  return p;
}

ProblemSpec make_problem(int case_id, DomainId domain, double alpha) {
  switch (case_id) {
    case 1: return case1(domain);
    case 2:
      if (domain != DomainId::BigSquare) throw std::invalid_argument("case 2 runs on (-1,1)^2 only");
      return case2();
    case 3: return case3(alpha, domain);
    default: throw std::invalid_argument("case must be 1, 2 or 3");
  }
}

ProblemSpec quadratic_problem(const Mat2& a, double cxx, double cxy, double cyy, double cx, double cy,
                              double c0, DomainId domain) {
  ProblemSpec p;
  p.case_id = 0;
  p.name = "quadratic";
  p.domain = domain;
  p.coefficient = [a](const Vec2&) { return a; };
  const Eigen::SelfAdjointEigenSolver<Mat2> eig(a);
  p.ellipticity_lower = eig.eigenvalues()[0];
  p.ellipticity_upper = eig.eigenvalues()[1];
  p.exact.u = [=](const Vec2& x) {
    return cxx * x.x() * x.x() + cxy * x.x() * x.y() + cyy * x.y() * x.y() + cx * x.x() + cy * x.y() + c0;
  };
  p.exact.grad = [=](const Vec2& x) {
    return Vec2(2.0 * cxx * x.x() + cxy * x.y() + cx, cxy * x.x() + 2.0 * cyy * x.y() + cy);
  };
  p.exact.hessian = [=](const Vec2&) {
    Mat2 h;
    h << 2.0 * cxx, cxy, cxy, 2.0 * cyy;
    return h;
  };
  p.exact.regularity = "polynomial";
  p.load_mode = LoadMode::Derived;
  p.cordes = cordes_epsilon(a);
  return p;
}

double cordes_epsilon(const Mat2& a) {
  const double trace = a.trace();
  if (trace == 0.0) throw std::invalid_argument("Cordes parameter undefined for zero trace");
  const double eps = trace * trace / a.squaredNorm() - 1.0;
  return std::min(eps, 1.0);
}

}  // namespace mpdwg
