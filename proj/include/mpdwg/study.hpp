#pragma once

#include "mpdwg/analysis.hpp"
#include "mpdwg/mesh.hpp"
#include "mpdwg/system.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpdwg {

struct RunConfig {
  int case_id = 1;
  DomainId domain = DomainId::UnitSquare;
  int levels = 5;  ///< levels 0..levels are solved
  MultiplierSpace multiplier = MultiplierSpace::P1;
  SchemeKind scheme = SchemeKind::MpdwgReduced;
  double alpha = 1.6;
  SolverOptions solver;
  int q_triangle = 8;
  int q_edge = 7;
  std::optional<std::filesystem::path> out;
  bool cond = false;
  bool h2norm = false;
  bool compare_reference = false;
};

/// Throws std::invalid_argument for inadmissible settings.
void validate(const RunConfig& config);

struct LevelConditioning {
  ConditionEstimate estimate;
  int cg_iterations = 0;
  bool cg_converged = false;
};

struct LevelResult {
  ErrorReport errors;
  SolveReport solve;
  std::optional<LevelConditioning> conditioning;  ///< reduced schemes only
};

struct ReferenceCheck {
  std::string name;
  double observed = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
  std::string note;  ///< set when the check could not be evaluated
};

struct StudyResult {
  RunConfig config;
  std::vector<LevelResult> levels;
  ConvergenceTable table;
  std::vector<ReferenceCheck> checks;
  double seconds = 0.0;

  bool pass() const;
};

/// Refinement study over levels 0..config.levels. Solver failures are
/// rethrown as SolverError with the level in the message. The CSV is
/// written when config.out is set; reference checks run when requested.
StudyResult run_study(const RunConfig& config);

/// Published error values for the M-PDWG scheme on one configuration.
struct ReferenceRow {
  int inv_h = 0;
  double e0 = 0.0;
  double eg = 0.0;
  double gamma = 0.0;
};

struct ReferenceTable {
  int index = 0;  ///< 1..8 in publication order
  int case_id = 0;
  DomainId domain = DomainId::UnitSquare;
  MultiplierSpace multiplier = MultiplierSpace::P1;
  std::array<ReferenceRow, 6> rows{};
};

const std::vector<ReferenceTable>& reference_tables();
const ReferenceTable* find_reference(int case_id, DomainId domain, MultiplierSpace multiplier);

/// Acceptance bands for the study's convergence table against the matching
/// reference configuration. Needs levels up to 5.
std::vector<ReferenceCheck> reference_checks(const RunConfig& config, const ConvergenceTable& table);

/// Multiplier error of the primal-dual scheme with and without c_h on the
/// same meshes. A failed solve leaves an empty entry and the run continues.
struct FigureCurves {
  std::vector<int> levels;
  std::vector<std::optional<double>> gamma_pdwg;
  std::vector<std::optional<double>> gamma_mpdwg;
  std::vector<std::string> failures;
};

FigureCurves compare_figures(const RunConfig& config);

inline constexpr const char* kFigureHeader = "level,gamma_pdwg,gamma_mpdwg";
void write_figure_csv(const FigureCurves& curves, std::ostream& os);

/// Human-readable convergence table.
void print_table(const StudyResult& result, std::ostream& os);

/// "scheme=... case=... domain=... multiplier=... levels=... pass=..."
std::string summary_line(const StudyResult& result);

}  // namespace mpdwg
