#include "mpdwg/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mpdwg {

namespace {

// Quadratic Lagrange shapes on the reference triangle: vertices, then the
// midpoint opposite vertex i.
std::array<double, 6> p2_shapes(const Vec2& ref) {
  const std::array<double, 3> l{1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
  std::array<double, 6> n{};
  for (int i = 0; i < 3; ++i) {
    n[i] = l[i] * (2.0 * l[i] - 1.0);
    n[3 + i] = 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
  }
  return n;
}

// Integral of a linear function over a segment of length len from its end values.
double linear_square_integral(double a, double b, double len) { return len * (a * a + a * b + b * b) / 3.0; }

double edge_vector_square(const TriMesh& mesh, int e, const std::array<Vec2, 2>& g) {
  const Edge& edge = mesh.edges()[e];
  const double len = (mesh.vertices()[edge.v[1]] - mesh.vertices()[edge.v[0]]).norm();
  return linear_square_integral(g[0].x(), g[1].x(), len) + linear_square_integral(g[0].y(), g[1].y(), len);
}

std::array<Vec2, 2> edge_gradient(const DofMap& dofs, const Eigen::VectorXd& u, int e) {
  std::array<Vec2, 2> g;
  for (int end = 0; end < 2; ++end) g[end] = Vec2(u[dofs.gradient_dof(e, 0, end)], u[dofs.gradient_dof(e, 1, end)]);
  return g;
}

Eigen::VectorXd gather(const DofMap& dofs, int t, const Eigen::VectorXd& v) {
  const auto& ed = dofs.element_dofs(t);
  Eigen::VectorXd local(DofMap::kLocalPrimal);
  for (int j = 0; j < DofMap::kLocalPrimal; ++j) local[j] = v[ed[j]];
  return local;
}

}  // namespace

ErrorNorms error_norms(const TriMesh& mesh, const DofMap& dofs, MultiplierSpace multiplier,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& lambda, const ExactSolution& exact,
                       int q_triangle) {
  const QuadratureRule& ref = quad_triangle(q_triangle);
  std::vector<std::array<double, 6>> shapes;
  shapes.reserve(ref.size());
  for (const Vec2& p : ref.points) shapes.push_back(p2_shapes(p));

  std::vector<std::array<Vec2, 2>> edge_error(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto g = edge_gradient(dofs, u, e);
    for (int end = 0; end < 2; ++end) edge_error[e][end] = g[end] - exact.grad(mesh.vertices()[mesh.edges()[e].v[end]]);
  }

  double e0 = 0.0;
  double eg = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& ed = dofs.element_dofs(t);
    std::array<double, 6> nodal{};
    for (int i = 0; i < 6; ++i) nodal[i] = u[ed[i]] - exact.u(dofs.node_position(ed[i]));
    const double jac = 2.0 * geometry(mesh, t).area;
    double local = 0.0;
    for (std::size_t q = 0; q < ref.size(); ++q) {
      double val = 0.0;
      for (int i = 0; i < 6; ++i) val += nodal[i] * shapes[q][i];
      local += ref.weights[q] * val * val;
    }
    e0 += jac * local;

    double boundary = 0.0;
    for (int e : mesh.triangle_edges(t)) boundary += edge_vector_square(mesh, e, edge_error[e]);
    eg += mesh.diameter(t) * boundary;
  }

  ErrorNorms out;
  out.e0 = std::sqrt(e0);
  out.eg = std::sqrt(eg);
  out.gamma = multiplier_l2_norm(mesh, multiplier, lambda);
  return out;
}

double gradient_trace_norm(const TriMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u, bool double_count) {
  double sum = 0.0;
  if (double_count) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      double boundary = 0.0;
      for (int e : mesh.triangle_edges(t)) boundary += edge_vector_square(mesh, e, edge_gradient(dofs, u, e));
      sum += mesh.diameter(t) * boundary;
    }
  } else {
    for (int e = 0; e < mesh.num_edges(); ++e) {
      sum += mesh.diameter(mesh.edges()[e].elements[0]) * edge_vector_square(mesh, e, edge_gradient(dofs, u, e));
    }
  }
  return std::sqrt(sum);
}

double multiplier_l2_norm(const TriMesh& mesh, MultiplierSpace multiplier, const Eigen::VectorXd& lambda) {
  const int r = multiplier_degree(multiplier);
  const int nr = ElementBasis::dimension(r);
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame frame = ElementFrame::from_mesh(mesh, t);
    const Eigen::MatrixXd m = mass_matrix(frame.basis(r), frame.rule(std::max(2 * r, 1)));
    const Eigen::VectorXd l = lambda.segment(t * nr, nr);
    sum += l.dot(m * l);
  }
  return std::sqrt(std::max(sum, 0.0));
}

double h2_seminorm(const BlockSystem& system, const Eigen::VectorXd& v) {
  double sum = v.dot(system.S * v);
  for (std::size_t t = 0; t < system.blocks.size(); ++t) {
    const ElementBlock& blk = system.blocks[t];
    const Eigen::VectorXd bv = blk.b * gather(system.dofs, static_cast<int>(t), v);
    sum += bv.dot(blk.mass.llt().solve(bv));
  }
  return std::sqrt(std::max(sum, 0.0));
}

double h2_seminorm_strong(const TriMesh& mesh, const BlockSystem& system, const CoefficientField& a,
                          const Eigen::VectorXd& v) {
  double sum = v.dot(system.S * v);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame frame = ElementFrame::from_mesh(mesh, t);
    const ElementBasis basis = frame.basis(2);
    const Eigen::VectorXd v0 = c0_embedding(frame).topRows(basis.size()) * gather(system.dofs, t, v);
    const MappedRule rule = frame.rule(system.config.q_triangle);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Mat2 coeff = a(rule.points[q]);
      double val = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) val += coeff(i, j) * basis.second_derivatives(rule.points[q], i, j).dot(v0);
      sum += rule.weights[q] * val * val;
    }
  }
  return std::sqrt(std::max(sum, 0.0));
}

std::optional<double> rate(double previous, double current) {
  if (!(previous > 0.0) || !(current > 0.0) || !std::isfinite(previous) || !std::isfinite(current)) {
    return std::nullopt;
  }
  return std::log2(previous / current);
}

ConvergenceTable rates(const std::vector<ErrorReport>& reports) {
  ConvergenceTable table;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    ConvergenceRow row;
    row.report = reports[i];
    if (i > 0) {
      const ErrorReport& prev = reports[i - 1];
      const ErrorReport& cur = reports[i];
      auto order = [&](const char* name, double a, double b) {
        auto r = rate(a, b);
        if (!r) table.warnings.push_back(std::string(name) + " order omitted at level " + std::to_string(cur.level) +
                                         ": non-positive or non-finite error");
        return r;
      };
      row.order_e0 = order("e0", prev.e0, cur.e0);
      row.order_eg = order("eg", prev.eg, cur.eg);
      row.order_gamma = order("gamma", prev.gamma, cur.gamma);
    }
    table.rows.push_back(row);
  }
  return table;
}

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", x);
  return buf;
}

std::string sci(const std::optional<double>& x) { return x ? sci(*x) : std::string(); }

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

void write_csv(const ConvergenceTable& table, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const ConvergenceRow& row : table.rows) {
    const ErrorReport& r = row.report;
    os << r.level << ',' << r.inv_h << ',' << sci(r.e0) << ',' << sci(row.order_e0)
       << ',' << sci(r.eg) << ',' << sci(row.order_eg) << ',' << sci(r.gamma) << ',' << sci(row.order_gamma) << ','
       << r.dofs << ',' << r.solver_iters << '\n';
  }
}

void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(table, os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

ConvergenceTable read_csv(std::istream& is) {
  ConvergenceTable table;
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("unexpected CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw std::runtime_error("malformed CSV row: " + line);
    ConvergenceRow row;
    row.report.level = std::stoi(f[0]);
    row.report.inv_h = std::stoi(f[1]);
    row.report.e0 = std::stod(f[2]);
    row.order_e0 = parse_optional(f[3]);
    row.report.eg = std::stod(f[4]);
    row.order_eg = parse_optional(f[5]);
    row.report.gamma = std::stod(f[6]);
    row.order_gamma = parse_optional(f[7]);
    row.report.dofs = std::stoi(f[8]);
    row.report.solver_iters = std::stoi(f[9]);
    table.rows.push_back(row);
  }
  return table;
}

ConditionEstimate lanczos_extremes(const LinearOperator& op, int n, int iters) {
  ConditionEstimate out;
  if (n <= 0) return out;
  const int kmax = std::min(iters, n);

  // Fixed seed and explicit mapping keep the start vector identical across
  // standard library implementations.
  std::mt19937 gen(20240607u);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = static_cast<double>(gen()) / 4294967295.0 - 0.5;
  q.normalize();

  Eigen::MatrixXd Q(n, kmax);
  std::vector<double> alpha, beta;
  double scale = 0.0;
  for (int k = 0; k < kmax; ++k) {
    Q.col(k) = q;
    Eigen::VectorXd w = op(q);
    const double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (k > 0) w -= beta.back() * Q.col(k - 1);
    // two passes of classical Gram-Schmidt against all previous vectors
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    const double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    out.steps = k + 1;
    if (b <= 1e-13 * scale) {
      out.breakdown = true;
      break;
    }
    if (k + 1 < kmax) {
      beta.push_back(b);
      q = w / b;
    } else {
      beta.push_back(b);
    }
  }

  const int m = out.steps;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
  out.lambda_min = eig.eigenvalues()[0];
  out.lambda_max = eig.eigenvalues()[m - 1];
  out.kappa = out.lambda_min > 0.0 ? out.lambda_max / out.lambda_min : std::numeric_limits<double>::infinity();

  if (out.breakdown || m == n) {
    out.converged = out.min_converged = out.max_converged = true;
  } else {
    // residual bound beta_m |s_m| of the extreme Ritz pairs
    const double b = beta[m - 1];
    const double rmin = std::abs(b * eig.eigenvectors()(m - 1, 0));
    const double rmax = std::abs(b * eig.eigenvectors()(m - 1, m - 1));
    out.min_converged = rmin <= 1e-6 * std::abs(out.lambda_min);
    out.max_converged = rmax <= 1e-6 * std::abs(out.lambda_max);
    out.converged = out.min_converged && out.max_converged;
  }
  return out;
}

ConditionEstimate condition_estimate(const SparseMatrix& A, int iters) {
  if (A.rows() != A.cols()) throw std::invalid_argument("condition_estimate needs a square matrix");
  return lanczos_extremes([&A](const Eigen::VectorXd& x) { return Eigen::VectorXd(A * x); },
                          static_cast<int>(A.rows()), iters);
}

ConditionEstimate condition_estimate_factored(const SparseMatrix& A, int iters) {
  if (A.rows() != A.cols()) throw std::invalid_argument("condition_estimate needs a square matrix");
  const Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(A);
  if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite: Cholesky factorization failed");

  const int n = static_cast<int>(A.rows());
  const ConditionEstimate upper = condition_estimate(A, iters);
  const ConditionEstimate inverse =
      lanczos_extremes([&llt](const Eigen::VectorXd& x) { return Eigen::VectorXd(llt.solve(x)); }, n, iters);

  ConditionEstimate out;
  out.lambda_max = upper.lambda_max;
  out.lambda_min = 1.0 / inverse.lambda_max;
  out.kappa = out.lambda_max / out.lambda_min;
  out.steps = std::max(upper.steps, inverse.steps);
  out.breakdown = upper.breakdown || inverse.breakdown;
  out.max_converged = upper.max_converged;
  out.min_converged = inverse.max_converged;
  out.converged = out.max_converged && out.min_converged;
  return out;
}

}  // namespace mpdwg
