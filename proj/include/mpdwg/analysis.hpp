#pragma once

#include "mpdwg/mesh.hpp"
#include "mpdwg/problems.hpp"
#include "mpdwg/system.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpdwg {

/// Discrete L2 errors against the nodal interpolants I_h u and I_g grad u.
struct ErrorNorms {
  double e0 = 0.0;     ///< ||u0 - I_h u||
  double eg = 0.0;     ///< (sum_T h_T ||ug - I_g grad u||^2_dT)^1/2, interior edges seen twice
  double gamma = 0.0;  ///< ||lambda_h||
};

ErrorNorms error_norms(const TriMesh& mesh, const DofMap& dofs, MultiplierSpace multiplier,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& lambda, const ExactSolution& exact,
                       int q_triangle = 10);

/// sum_T h_T ||g||^2_dT for the gradient DOFs of `u` (double_count = true,
/// matching error_norms), or sum_e h_e ||g||^2_e with h_e the diameter of the
/// first incident triangle (double_count = false). Returns the square root.
double gradient_trace_norm(const TriMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u, bool double_count);

/// L2 norm of an element-wise P_r field given by multiplier coefficients.
double multiplier_l2_norm(const TriMesh& mesh, MultiplierSpace multiplier, const Eigen::VectorXd& lambda);

/// Weak-Hessian seminorm: sum_T ||Q_h(sum_ij a_ij H_ij v)||^2_T + s_h(v,v).
/// `v` holds all primal DOFs; the coefficient is the one baked into `system`.
double h2_seminorm(const BlockSystem& system, const Eigen::VectorXd& v);

/// Same with the strong Hessian of v0 in place of the weak one.
double h2_seminorm_strong(const TriMesh& mesh, const BlockSystem& system, const CoefficientField& a,
                          const Eigen::VectorXd& v);

struct ErrorReport {
  int level = 0;
  int inv_h = 0;  ///< 2^level (the table's 1/h or 2/h column)
  double e0 = 0.0;
  double eg = 0.0;
  double gamma = 0.0;
  std::optional<double> h2;
  int dofs = 0;
  int solver_iters = 0;
};

struct ConvergenceRow {
  ErrorReport report;
  std::optional<double> order_e0;
  std::optional<double> order_eg;
  std::optional<double> order_gamma;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> warnings;
};

/// log2(previous / current); empty for non-positive or non-finite input.
std::optional<double> rate(double previous, double current);

ConvergenceTable rates(const std::vector<ErrorReport>& reports);

inline constexpr const char* kCsvHeader =
    "level,inv_h,e0,order_e0,eg,order_eg,gamma,order_gamma,dofs,solver_iters";

void write_csv(const ConvergenceTable& table, std::ostream& os);
/// Throws std::runtime_error on I/O failure.
void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path);
/// Parses the format written by write_csv.
ConvergenceTable read_csv(std::istream& is);

struct ConditionEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  int steps = 0;
  bool converged = false;  ///< both extreme values converged
  bool min_converged = false;
  bool max_converged = false;
  bool breakdown = false;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Lanczos with full reorthogonalization; returns the extreme Ritz values.
ConditionEstimate lanczos_extremes(const LinearOperator& op, int n, int iters = 200);

/// Extreme Ritz values of A after `iters` Lanczos steps.
ConditionEstimate condition_estimate(const SparseMatrix& A, int iters = 200);

/// lambda_max from Lanczos on A, lambda_min from Lanczos on A^-1 through a
/// sparse Cholesky factor. Sharper than condition_estimate for ill-conditioned A.
ConditionEstimate condition_estimate_factored(const SparseMatrix& A, int iters = 200);

}  // namespace mpdwg
