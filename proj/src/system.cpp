#include "mpdwg/system.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

namespace mpdwg {

std::string_view multiplier_name(MultiplierSpace m) { return m == MultiplierSpace::P0 ? "p0" : "p1"; }

MultiplierSpace parse_multiplier(std::string_view name) {
  if (name == "p0") return MultiplierSpace::P0;
  if (name == "p1") return MultiplierSpace::P1;
  throw std::invalid_argument("multiplier must be p0 or p1");
}

std::string_view scheme_name(SchemeKind s) {
  switch (s) {
    case SchemeKind::MpdwgReduced: return "mpdwg";
    case SchemeKind::MpdwgSaddle: return "mpdwg-saddle";
    case SchemeKind::PdwgSaddle: return "pdwg";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "mpdwg") return SchemeKind::MpdwgReduced;
  if (name == "mpdwg-saddle") return SchemeKind::MpdwgSaddle;
  if (name == "pdwg") return SchemeKind::PdwgSaddle;
  throw std::invalid_argument("scheme must be mpdwg, mpdwg-saddle or pdwg");
}

DofMap::DofMap(const TriMesh& mesh, MultiplierSpace multiplier)
    : num_vertices_(mesh.num_vertices()),
      num_edges_(mesh.num_edges()),
      num_elements_(mesh.num_triangles()),
      num_primal_(mesh.num_vertices() + 5 * mesh.num_edges()),
      multipliers_per_element_(ElementBasis::dimension(multiplier_degree(multiplier))) {
  element_dofs_.resize(num_elements_);
  for (int t = 0; t < num_elements_; ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges(t);
    ElementDofs& d = element_dofs_[t];
    for (int i = 0; i < 3; ++i) {
      d[i] = vertex_dof(tri[i]);
      d[3 + i] = midpoint_dof(te[i]);
      for (int c = 0; c < 2; ++c)
        for (int end = 0; end < 2; ++end) d[6 + 4 * i + 2 * c + end] = gradient_dof(te[i], c, end);
    }
  }

  node_positions_.assign(num_vertices_ + num_edges_, Vec2::Zero());
  for (int v = 0; v < num_vertices_; ++v) node_positions_[v] = mesh.vertices()[v];
  for (int e = 0; e < num_edges_; ++e) {
    const Edge& edge = mesh.edges()[e];
    node_positions_[num_vertices_ + e] = 0.5 * (mesh.vertices()[edge.v[0]] + mesh.vertices()[edge.v[1]]);
  }

  // Only u0 values on the boundary are constrained; gradient DOFs stay free.
  std::vector<bool> fixed(num_primal_, false);
  for (int v = 0; v < num_vertices_; ++v) fixed[v] = mesh.boundary_vertex()[v];
  for (int e = 0; e < num_edges_; ++e) fixed[midpoint_dof(e)] = mesh.edges()[e].boundary;

  free_index_.assign(num_primal_, -1);
  for (int d = 0; d < num_primal_; ++d) {
    if (!fixed[d]) {
      free_index_[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(d);
    }
  }
}

Eigen::MatrixXd c0_embedding(const ElementFrame& frame) {
  const WeakLayout layout{2};
  const ElementBasis basis = frame.basis(2);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(layout.size(), DofMap::kLocalPrimal);

  std::array<Vec2, 6> nodes;
  for (int i = 0; i < 3; ++i) {
    nodes[i] = frame.vertices[i];
    nodes[3 + i] = 0.5 * (frame.vertices[(i + 1) % 3] + frame.vertices[(i + 2) % 3]);
  }
  Eigen::MatrixXd vandermonde(6, 6);
  for (int i = 0; i < 6; ++i) vandermonde.row(i) = basis.values(nodes[i]).transpose();
  E.topLeftCorner(6, 6) = vandermonde.inverse();

  for (int e = 0; e < 3; ++e) {
    const int a = (e + 1) % 3;
    const int b = (e + 2) % 3;
    const bool forward = frame.edges[e].start == frame.vertices[a];
    const int s = forward ? a : b;
    const int n = forward ? b : a;
    const int m = 3 + e;
    // quadratic Lagrange on t = 0, 1/2, 1 expressed in 1, t, t^2
    const int vb = layout.vb_offset(e);
    E(vb, s) = 1.0;
    E(vb + 1, s) = -3.0;
    E(vb + 1, m) = 4.0;
    E(vb + 1, n) = -1.0;
    E(vb + 2, s) = 2.0;
    E(vb + 2, m) = -4.0;
    E(vb + 2, n) = 2.0;
    for (int c = 0; c < 2; ++c) {
      const int vg = layout.vg_offset(e, c);
      const int g0 = 6 + 4 * e + 2 * c;
      E(vg, g0) = 1.0;
      E(vg + 1, g0) = -1.0;
      E(vg + 1, g0 + 1) = 1.0;
    }
  }
  return E;
}

BlockSystem assemble(const TriMesh& mesh, const ProblemSpec& problem, const SchemeConfig& config) {
  BlockSystem sys;
  sys.config = config;
  sys.dofs = DofMap(mesh, config.multiplier);
  const DofMap& dofs = sys.dofs;
  const int r = multiplier_degree(config.multiplier);
  const int nr = dofs.multipliers_per_element();
  const ScalarField load = problem.load_field();

  std::vector<Eigen::Triplet<double>> ts, tb, tc;
  ts.reserve(mesh.num_triangles() * 12 * 12);
  tb.reserve(mesh.num_triangles() * nr * 18);
  tc.reserve(mesh.num_triangles() * nr * nr);
  sys.f = Eigen::VectorXd::Zero(dofs.num_multiplier());
  sys.blocks.resize(mesh.num_triangles());

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementFrame frame = ElementFrame::from_mesh(mesh, t);
    const Eigen::MatrixXd E = c0_embedding(frame);
    const WeakHessianOperator hessian(frame, 2, r, config.q_triangle, config.q_edge);

    ElementBlock& blk = sys.blocks[t];
    blk.s = E.transpose() * local_s(frame, 2, config.trace_penalty, config.q_edge) * E;
    blk.b = local_b(hessian, frame, problem.coefficient, config.q_triangle) * E;
    blk.c = config.dual == DualStabilizer::Weighted ? local_c(frame, r, config.q_triangle)
                                                    : Eigen::MatrixXd::Zero(nr, nr);
    blk.mass = hessian.mass();
    blk.f = local_load(frame, load, r, config.q_triangle);

    const auto& ed = dofs.element_dofs(t);
    const int m0 = dofs.multiplier_offset(t);
    for (int i = 0; i < DofMap::kLocalPrimal; ++i)
      for (int j = 0; j < DofMap::kLocalPrimal; ++j)
        if (blk.s(i, j) != 0.0) ts.emplace_back(ed[i], ed[j], blk.s(i, j));
    for (int p = 0; p < nr; ++p) {
      for (int j = 0; j < DofMap::kLocalPrimal; ++j) tb.emplace_back(m0 + p, ed[j], blk.b(p, j));
      for (int q = 0; q < nr; ++q) tc.emplace_back(m0 + p, m0 + q, blk.c(p, q));
    }
    sys.f.segment(m0, nr) = blk.f;
  }

  const int n = dofs.num_primal();
  const int m = dofs.num_multiplier();
  sys.S.resize(n, n);
  sys.S.setFromTriplets(ts.begin(), ts.end());
  sys.B.resize(m, n);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.C.resize(m, m);
  sys.C.setFromTriplets(tc.begin(), tc.end());

  apply_dirichlet(sys, [](const Vec2&) { return 0.0; });
  return sys;
}

namespace {

// Column selection P (n x nf) with P(free_dofs[i], i) = 1.
SparseMatrix free_selector(const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < dofs.num_free(); ++i) t.emplace_back(dofs.free_dofs()[i], i, 1.0);
  SparseMatrix P(dofs.num_primal(), dofs.num_free());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

}  // namespace

void apply_dirichlet(BlockSystem& sys, const ScalarField& g) {
  const DofMap& dofs = sys.dofs;
  sys.lift = Eigen::VectorXd::Zero(dofs.num_primal());
  for (int d = 0; d < dofs.num_primal(); ++d) {
    if (dofs.constrained(d)) sys.lift[d] = g(dofs.node_position(d));
  }
  const SparseMatrix P = free_selector(dofs);
  sys.S_free = P.transpose() * sys.S * P;
  sys.B_free = sys.B * P;
  sys.rhs_primal = -(P.transpose() * (sys.S * sys.lift));
  sys.rhs_multiplier = sys.f - sys.B * sys.lift;
}

ReducedSystem schur_reduce(const BlockSystem& sys) {
  if (sys.config.dual == DualStabilizer::Zero) throw std::logic_error("Schur path requires invertible C");
  const DofMap& dofs = sys.dofs;
  ReducedSystem red;
  red.b = sys.rhs_primal;  // -S_fd u_d

  std::vector<Eigen::Triplet<double>> ta;
  ta.reserve(sys.blocks.size() * DofMap::kLocalPrimal * DofMap::kLocalPrimal);
  for (std::size_t t = 0; t < sys.blocks.size(); ++t) {
    const ElementBlock& blk = sys.blocks[t];
    const auto& ed = dofs.element_dofs(static_cast<int>(t));
    const Eigen::LLT<Eigen::MatrixXd> c_factor(blk.c);
    if (c_factor.info() != Eigen::Success) throw std::logic_error("Schur path requires invertible C");

    const Eigen::MatrixXd cinv_b = c_factor.solve(blk.b);
    const Eigen::MatrixXd schur = blk.b.transpose() * cinv_b;
    Eigen::VectorXd lift_local(DofMap::kLocalPrimal);
    for (int j = 0; j < DofMap::kLocalPrimal; ++j) lift_local[j] = sys.lift[ed[j]];
    // B_T^T C_T^-1 (f_T - B_T,d u_d); the S_fd part is already in rhs_primal.
    const Eigen::VectorXd rhs_local = cinv_b.transpose() * (blk.f - blk.b * lift_local);

    for (int i = 0; i < DofMap::kLocalPrimal; ++i) {
      const int fi = dofs.free_index(ed[i]);
      if (fi < 0) continue;
      red.b[fi] += rhs_local[i];
      for (int j = 0; j < DofMap::kLocalPrimal; ++j) {
        const int fj = dofs.free_index(ed[j]);
        if (fj < 0) continue;
        ta.emplace_back(fi, fj, schur(i, j));
      }
    }
  }
  SparseMatrix bcb(dofs.num_free(), dofs.num_free());
  bcb.setFromTriplets(ta.begin(), ta.end());
  red.A = sys.S_free + bcb;
  return red;
}

namespace {

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

LinearSolveResult solve_reduced(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  LinearSolveResult out;
  out.report.reduced_dofs = static_cast<int>(A.rows());
  out.report.nonzeros = A.nonZeros();
  std::vector<double> history;

  if (options.method == LinearSolver::Direct) {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(A);
    if (llt.info() != Eigen::Success) {
      throw SolverError("reduced matrix is not positive definite: Cholesky factorization failed");
    }
    out.x = llt.solve(b);
    double res = relative_residual(A, out.x, b);
    history.push_back(res);
    // iterative refinement with the same factor
    for (int sweep = 0; sweep < 5 && res > options.tolerance; ++sweep) {
      out.x += llt.solve(b - A * out.x);
      res = relative_residual(A, out.x, b);
      history.push_back(res);
      ++out.report.iterations;
    }
    out.report.residual = res;
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(options.tolerance);
    cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations : 10 * static_cast<int>(A.rows()));
    cg.compute(A);
    out.x = cg.solve(b);
    out.report.iterations = static_cast<int>(cg.iterations());
    out.report.residual = relative_residual(A, out.x, b);
    history.push_back(out.report.residual);
  }
  out.report.seconds = elapsed(start);
  if (!(out.report.residual <= options.tolerance)) {
    throw SolverError("reduced solve did not reach the requested tolerance", history);
  }
  return out;
}

SaddleSolution solve_saddle(const BlockSystem& sys, double tolerance) {
  const auto start = std::chrono::steady_clock::now();
  const int nf = sys.dofs.num_free();
  const int m = sys.dofs.num_multiplier();

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(sys.S_free.nonZeros() + 2 * sys.B_free.nonZeros() + sys.C.nonZeros());
  for (int k = 0; k < sys.S_free.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.S_free, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < sys.B_free.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sys.B_free, k); it; ++it) {
      t.emplace_back(nf + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nf + it.row(), it.value());
    }
  }
  for (int k = 0; k < sys.C.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.C, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(nf + it.row(), nf + it.col(), -it.value());

  SparseMatrix K(nf + m, nf + m);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  Eigen::VectorXd rhs(nf + m);
  rhs << sys.rhs_primal, sys.rhs_multiplier;

  // Symmetric equilibration D K D with D = diag(1/sqrt(max_j |K_ij|)); the
  // primal and multiplier blocks differ in scale by several powers of h.
  Eigen::VectorXd d = Eigen::VectorXd::Zero(nf + m);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) d[it.row()] = std::max(d[it.row()], std::abs(it.value()));
  for (int i = 0; i < d.size(); ++i) d[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 1.0;
  const SparseMatrix scaled = d.asDiagonal() * K * d.asDiagonal();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(scaled);
  if (lu.info() != Eigen::Success) {
    throw SolverError("saddle-point system is singular: " + lu.lastErrorMessage());
  }
  const auto solve = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    return d.asDiagonal() * lu.solve(Eigen::VectorXd(d.asDiagonal() * r));
  };
  Eigen::VectorXd x = solve(rhs);
  double res = relative_residual(K, x, rhs);
  std::vector<double> history{res};
  int sweeps = 0;
  for (; sweeps < 5 && res > tolerance; ++sweeps) {
    x += solve(rhs - K * x);
    res = relative_residual(K, x, rhs);
    history.push_back(res);
  }
  if (!std::isfinite(res) || res > tolerance) {
    std::ostringstream msg;
    msg << "saddle-point solve did not reach the requested tolerance (residual " << res << " after " << sweeps
        << " refinement sweeps, target " << tolerance << ")";
    throw SolverError(msg.str(), history);
  }

  SaddleSolution out;
  out.u_free = x.head(nf);
  out.lambda = x.tail(m);
  out.report.reduced_dofs = nf + m;
  out.report.nonzeros = K.nonZeros();
  out.report.iterations = sweeps;
  out.report.residual = res;
  out.report.seconds = elapsed(start);
  return out;
}

Eigen::VectorXd expand(const BlockSystem& sys, const Eigen::VectorXd& u_free) {
  Eigen::VectorXd u = sys.lift;
  const auto& free = sys.dofs.free_dofs();
  for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = u_free[static_cast<Eigen::Index>(i)];
  return u;
}

Eigen::VectorXd recover_multiplier(const BlockSystem& sys, const Eigen::VectorXd& u_full) {
  const DofMap& dofs = sys.dofs;
  const int nr = dofs.multipliers_per_element();
  Eigen::VectorXd lambda(dofs.num_multiplier());
  for (std::size_t t = 0; t < sys.blocks.size(); ++t) {
    const ElementBlock& blk = sys.blocks[t];
    const auto& ed = dofs.element_dofs(static_cast<int>(t));
    Eigen::VectorXd u_local(DofMap::kLocalPrimal);
    for (int j = 0; j < DofMap::kLocalPrimal; ++j) u_local[j] = u_full[ed[j]];
    lambda.segment(dofs.multiplier_offset(static_cast<int>(t)), nr) = blk.c.llt().solve(blk.b * u_local - blk.f);
  }
  return lambda;
}

Solution solve_problem(const TriMesh& mesh, const ProblemSpec& problem, SchemeKind scheme, SchemeConfig config,
                       const SolverOptions& options, BlockSystem* system_out) {
  config.dual = scheme == SchemeKind::PdwgSaddle ? DualStabilizer::Zero : DualStabilizer::Weighted;

  BlockSystem sys = assemble(mesh, problem, config);
  apply_dirichlet(sys, [&](const Vec2& x) { return problem.boundary(x); });

  Solution sol;
  if (scheme == SchemeKind::MpdwgReduced) {
    const ReducedSystem red = schur_reduce(sys);
    LinearSolveResult res = solve_reduced(red.A, red.b, options);
    sol.u = expand(sys, res.x);
    sol.lambda = recover_multiplier(sys, sol.u);
    sol.report = res.report;
  } else {
    SaddleSolution res = solve_saddle(sys, std::max(options.tolerance, 1e-10));
    sol.u = expand(sys, res.u_free);
    sol.lambda = res.lambda;
    sol.report = res.report;
  }
  sol.report.scheme = std::string(scheme_name(scheme));
  sol.report.primal_dofs = sys.dofs.num_free();
  sol.report.multiplier_dofs = sys.dofs.num_multiplier();
  if (system_out) *system_out = std::move(sys);
  return sol;
}

Eigen::VectorXd interpolate(const TriMesh& mesh, const DofMap& dofs, const ScalarField& u,
                            const GradientField& grad) {
  Eigen::VectorXd x(dofs.num_primal());
  for (int d = 0; d < mesh.num_vertices() + mesh.num_edges(); ++d) x[d] = u(dofs.node_position(d));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    for (int end = 0; end < 2; ++end) {
      const Vec2 g = grad(mesh.vertices()[edge.v[end]]);
      x[dofs.gradient_dof(e, 0, end)] = g.x();
      x[dofs.gradient_dof(e, 1, end)] = g.y();
    }
  }
  return x;
}

void write_symmetric_matrix(const SparseMatrix& A, std::ostream& os) {
  long nnz = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (it.row() >= it.col()) ++nnz;
  os << A.rows() << ' ' << nnz << " symmetric\n";
  const auto old = os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (it.row() >= it.col()) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old);
}

}  // namespace mpdwg
