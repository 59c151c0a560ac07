// Refinement-study driver for the primal-dual weak Galerkin solver.

#include "mpdwg/study.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

struct Options {
  int case_id = 1;
  std::string domain = "unit-square";
  int levels = 5;
  std::string multiplier = "p1";
  std::string scheme = "mpdwg";
  double alpha = 1.6;
  std::string solver = "direct";
  double tol = 1e-12;
  int q_triangle = 8;
  int q_edge = 7;
  std::string out;
  std::string figures;
  std::string dump_matrix;
  bool cond = false;
  bool h2norm = false;
  bool compare = false;
};

mpdwg::RunConfig to_config(const Options& o) {
  mpdwg::RunConfig c;
  c.case_id = o.case_id;
  c.domain = mpdwg::parse_domain(o.domain);
  c.levels = o.levels;
  c.multiplier = mpdwg::parse_multiplier(o.multiplier);
  c.scheme = mpdwg::parse_scheme(o.scheme);
  c.alpha = o.alpha;
  c.solver.method = o.solver == "cg" ? mpdwg::LinearSolver::ConjugateGradient : mpdwg::LinearSolver::Direct;
  c.solver.tolerance = o.tol;
  c.q_triangle = o.q_triangle;
  c.q_edge = o.q_edge;
  if (!o.out.empty()) c.out = o.out;
  c.cond = o.cond;
  c.h2norm = o.h2norm;
  c.compare_reference = o.compare;
  mpdwg::validate(c);
  if (!o.dump_matrix.empty() && c.scheme != mpdwg::SchemeKind::MpdwgReduced) {
    throw std::invalid_argument("--dump-matrix needs --scheme mpdwg");
  }
  return c;
}

// Reduced matrix on the finest mesh in coordinate form.
void dump_reduced(const mpdwg::RunConfig& config, const std::string& path) {
  const mpdwg::ProblemSpec problem = mpdwg::make_problem(config.case_id, config.domain, config.alpha);
  const mpdwg::TriMesh mesh = mpdwg::build_mesh(config.domain, config.levels);
  mpdwg::SchemeConfig sc;
  sc.multiplier = config.multiplier;
  sc.q_triangle = config.q_triangle;
  sc.q_edge = config.q_edge;
  mpdwg::BlockSystem sys = mpdwg::assemble(mesh, problem, sc);
  mpdwg::apply_dirichlet(sys, [&problem](const mpdwg::Vec2& x) { return problem.boundary(x); });
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  mpdwg::write_symmetric_matrix(mpdwg::schur_reduce(sys).A, os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence study for the modified primal-dual weak Galerkin method"};
  Options o;
  app.add_option("--case", o.case_id, "Test problem")->check(CLI::Range(1, 3));
  app.add_option("--domain", o.domain, "unit-square | big-square | l-shape (or omega1..omega3)");
  app.add_option("--levels", o.levels, "Finest refinement level")->check(CLI::Range(0, 8));
  app.add_option("--multiplier", o.multiplier, "Multiplier space")->check(CLI::IsMember({"p0", "p1"}));
  app.add_option("--scheme", o.scheme, "mpdwg | mpdwg-saddle | pdwg")
      ->check(CLI::IsMember({"mpdwg", "mpdwg-saddle", "pdwg"}));
  app.add_option("--alpha", o.alpha, "Exponent of the singular solution in case 3");
  app.add_option("--solver", o.solver, "Reduced-system solver")->check(CLI::IsMember({"direct", "cg"}));
  app.add_option("--tol", o.tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--q-triangle", o.q_triangle, "Element quadrature degree")->check(CLI::Range(1, 12));
  app.add_option("--q-edge", o.q_edge, "Edge quadrature degree")->check(CLI::Range(1, 40));
  app.add_option("--out", o.out, "CSV output path");
  app.add_option("--figures", o.figures, "Write pdwg/mpdwg multiplier-error curves to this CSV");
  app.add_option("--dump-matrix", o.dump_matrix, "Write the finest reduced matrix to this file");
  app.add_flag("--cond", o.cond, "Estimate condition numbers and CG iteration counts");
  app.add_flag("--h2norm", o.h2norm, "Report the discrete H2 error");
  app.add_flag("--compare-paper", o.compare, "Check rates against the embedded reference tables");
  CLI11_PARSE(app, argc, argv);

  mpdwg::RunConfig config;
  try {
    config = to_config(o);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (!o.figures.empty()) {
      const mpdwg::FigureCurves curves = mpdwg::compare_figures(config);
      std::ofstream os(o.figures);
      if (!os) throw std::runtime_error("cannot open " + o.figures);
      mpdwg::write_figure_csv(curves, os);
      for (const std::string& f : curves.failures) std::cerr << "missing point: " << f << '\n';
    }

    const mpdwg::StudyResult result = mpdwg::run_study(config);
    mpdwg::print_table(result, std::cout);
    if (!o.dump_matrix.empty()) dump_reduced(config, o.dump_matrix);
    std::cout << mpdwg::summary_line(result) << '\n';
    return result.pass() ? 0 : 1;
  } catch (const mpdwg::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
