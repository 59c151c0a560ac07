#pragma once

#include "mpdwg/errors.hpp"
#include "mpdwg/forms.hpp"
#include "mpdwg/mesh.hpp"
#include "mpdwg/problems.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mpdwg {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class MultiplierSpace { P0, P1 };

inline int multiplier_degree(MultiplierSpace m) { return m == MultiplierSpace::P0 ? 0 : 1; }
std::string_view multiplier_name(MultiplierSpace m);
MultiplierSpace parse_multiplier(std::string_view name);

/// Choice of the multiplier-multiplier form c_h.
enum class DualStabilizer {
  Weighted,  ///< h^2 L2 + h^3 H1 + h^4 H2 seminorm terms (the modified scheme)
  Zero,      ///< c_h = 0, the original primal-dual scheme
};

struct SchemeConfig {
  MultiplierSpace multiplier = MultiplierSpace::P1;
  DualStabilizer dual = DualStabilizer::Weighted;
  int q_triangle = 8;
  int q_edge = 7;
  bool trace_penalty = false;  ///< keep the (identically zero) h^-3 trace term
};

/// Global numbering for the C0-type P2 / [P1(e)]^2 / P_r element.
///
/// Primal DOFs: u0 at vertices [0, V), u0 at edge midpoints [V, V+E), then
/// four gradient DOFs per edge at V+E+4e: (gx at start, gx at end, gy at
/// start, gy at end) in the global edge orientation. Multiplier DOFs are
/// element-wise blocks of size dim P_r.
class DofMap {
 public:
  static constexpr int kLocalPrimal = 18;
  using ElementDofs = std::array<int, kLocalPrimal>;

  DofMap() = default;
  DofMap(const TriMesh& mesh, MultiplierSpace multiplier);

  int num_primal() const { return num_primal_; }
  int num_free() const { return static_cast<int>(free_dofs_.size()); }
  int num_constrained() const { return num_primal_ - num_free(); }
  int num_multiplier() const { return num_elements_ * multipliers_per_element_; }
  int multipliers_per_element() const { return multipliers_per_element_; }

  int vertex_dof(int v) const { return v; }
  int midpoint_dof(int e) const { return num_vertices_ + e; }
  int gradient_dof(int e, int comp, int end) const { return num_vertices_ + num_edges_ + 4 * e + 2 * comp + end; }

  /// Local order: 3 vertices, 3 midpoints (local edge i opposite vertex i),
  /// then 4 gradient DOFs per local edge.
  const ElementDofs& element_dofs(int t) const { return element_dofs_[t]; }
  int multiplier_offset(int t) const { return t * multipliers_per_element_; }

  bool constrained(int dof) const { return free_index_[dof] < 0; }
  int free_index(int dof) const { return free_index_[dof]; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }

  /// Node where a u0 DOF is a Lagrange value (vertex or edge midpoint).
  Vec2 node_position(int dof) const { return node_positions_[dof]; }
  bool is_value_dof(int dof) const { return dof < num_vertices_ + num_edges_; }

 private:
  int num_vertices_ = 0;
  int num_edges_ = 0;
  int num_elements_ = 0;
  int num_primal_ = 0;
  int multipliers_per_element_ = 0;
  std::vector<ElementDofs> element_dofs_;
  std::vector<int> free_index_;
  std::vector<int> free_dofs_;
  std::vector<Vec2> node_positions_;
};

/// Linear map from the 18 C0-type element DOFs to the general weak layout
/// (v0 in P2 monomials, vb = trace of v0, vg linear on each edge).
Eigen::MatrixXd c0_embedding(const ElementFrame& frame);

struct ElementBlock {
  Eigen::MatrixXd s;     ///< 18 x 18
  Eigen::MatrixXd b;     ///< nr x 18
  Eigen::MatrixXd c;     ///< nr x nr
  Eigen::MatrixXd mass;  ///< nr x nr multiplier mass matrix
  Eigen::VectorXd f;     ///< nr
};

struct BlockSystem {
  SchemeConfig config;
  DofMap dofs;
  std::vector<ElementBlock> blocks;

  SparseMatrix S;  ///< primal x primal
  SparseMatrix B;  ///< multiplier x primal
  SparseMatrix C;  ///< multiplier x multiplier, block diagonal
  Eigen::VectorXd f;

  /// Prescribed values on constrained DOFs, zero elsewhere.
  Eigen::VectorXd lift;
  SparseMatrix S_free;                ///< free x free
  SparseMatrix B_free;                ///< multiplier x free
  Eigen::VectorXd rhs_primal;         ///< -S_fd u_d
  Eigen::VectorXd rhs_multiplier;     ///< f - B_d u_d
};

/// Assembles S, B, C and f element by element with homogeneous boundary data.
BlockSystem assemble(const TriMesh& mesh, const ProblemSpec& problem, const SchemeConfig& config);

/// Fixes the boundary u0 DOFs to nodal values of g and moves the known columns
/// to the right-hand sides of both equations.
void apply_dirichlet(BlockSystem& system, const ScalarField& g);

struct ReducedSystem {
  SparseMatrix A;  ///< S + B^T C^-1 B on free DOFs
  Eigen::VectorXd b;
};

/// Element-by-element elimination of the multiplier. Throws std::logic_error
/// when c_h = 0.
ReducedSystem schur_reduce(const BlockSystem& system);

enum class LinearSolver { Direct, ConjugateGradient };

struct SolverOptions {
  LinearSolver method = LinearSolver::Direct;
  double tolerance = 1e-12;
  int max_iterations = 0;  ///< CG only; 0 means 10 * n
};

struct SolveReport {
  std::string scheme;
  int primal_dofs = 0;
  int multiplier_dofs = 0;
  int reduced_dofs = 0;
  int iterations = 0;  ///< CG iterations, or iterative-refinement sweeps for direct solves
  long nonzeros = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct LinearSolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

/// SPD solve. The relative residual ||Ax - b|| / ||b|| must reach `tolerance`.
/// Direct mode uses a sparse Cholesky factorization and throws SolverError if
/// it detects a non-positive pivot.
LinearSolveResult solve_reduced(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& options = {});

struct SaddleSolution {
  Eigen::VectorXd u_free;
  Eigen::VectorXd lambda;
  SolveReport report;
};

/// Sparse LU solve of [[S, B^T], [B, -C]] on the free DOFs.
SaddleSolution solve_saddle(const BlockSystem& system, double tolerance = 1e-10);

/// Full primal vector from free values and the Dirichlet lift.
Eigen::VectorXd expand(const BlockSystem& system, const Eigen::VectorXd& u_free);

/// lambda_T = C_T^-1 (B_T u_T - f_T) element by element.
Eigen::VectorXd recover_multiplier(const BlockSystem& system, const Eigen::VectorXd& u_full);

enum class SchemeKind { MpdwgReduced, MpdwgSaddle, PdwgSaddle };
/// "mpdwg" (reduced solve), "mpdwg-saddle" or "pdwg".
std::string_view scheme_name(SchemeKind s);
SchemeKind parse_scheme(std::string_view name);

struct Solution {
  Eigen::VectorXd u;       ///< all primal DOFs
  Eigen::VectorXd lambda;  ///< multiplier DOFs
  SolveReport report;
};

/// assemble + apply_dirichlet + the solve path selected by `scheme`.
/// PdwgSaddle forces c_h = 0, the other schemes force the weighted c_h.
Solution solve_problem(const TriMesh& mesh, const ProblemSpec& problem, SchemeKind scheme, SchemeConfig config,
                       const SolverOptions& options = {}, BlockSystem* system_out = nullptr);

inline Solution solve_problem(const TriMesh& mesh, const ProblemSpec& problem, SchemeKind scheme,
                              MultiplierSpace multiplier, const SolverOptions& options = {},
                              BlockSystem* system_out = nullptr) {
  SchemeConfig config;
  config.multiplier = multiplier;
  return solve_problem(mesh, problem, scheme, config, options, system_out);
}

/// Nodal interpolant: u at vertices and midpoints, grad u at edge endpoints.
Eigen::VectorXd interpolate(const TriMesh& mesh, const DofMap& dofs, const ScalarField& u,
                            const GradientField& grad);

/// Coordinate dump: header "N NNZ symmetric" then "row col value" lines for
/// the lower triangle (0-based).
void write_symmetric_matrix(const SparseMatrix& A, std::ostream& os);

}  // namespace mpdwg
