#include "mpdwg/study.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mpdwg;

namespace {

RunConfig small(int case_id, DomainId domain, int levels = 2) {
  RunConfig c;
  c.case_id = case_id;
  c.domain = domain;
  c.levels = levels;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Study, RejectsInadmissibleConfigurations) {
  EXPECT_THROW(validate(small(1, DomainId::BigSquare)), std::invalid_argument);
  EXPECT_THROW(validate(small(2, DomainId::UnitSquare)), std::invalid_argument);
  EXPECT_THROW(validate(small(3, DomainId::LShape)), std::invalid_argument);
  RunConfig c = small(1, DomainId::UnitSquare);
  c.levels = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small(1, DomainId::UnitSquare);
  c.solver.tolerance = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small(1, DomainId::UnitSquare);
  c.q_triangle = 20;
  EXPECT_THROW(validate(c), std::invalid_argument);
  EXPECT_NO_THROW(validate(small(1, DomainId::LShape)));
  EXPECT_NO_THROW(validate(small(3, DomainId::BigSquare)));
}

TEST(Study, TableLayout) {
  const StudyResult r = run_study(small(1, DomainId::UnitSquare, 3));
  ASSERT_EQ(r.table.rows.size(), 4u);
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const ErrorReport& e = r.table.rows[i].report;
    EXPECT_EQ(e.level, static_cast<int>(i));
    EXPECT_EQ(e.inv_h, 1 << i);
    EXPECT_GT(e.e0, 0.0);
    EXPECT_GT(e.eg, 0.0);
    EXPECT_GT(e.gamma, 0.0);
    EXPECT_EQ(r.table.rows[i].order_e0.has_value(), i > 0);
  }
  EXPECT_TRUE(r.checks.empty());
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(summary_line(r), "scheme=mpdwg case=1 domain=unit-square multiplier=p1 levels=3 pass=true");
}

TEST(Study, CsvDeterministic) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "mpdwg_study_a.csv";
  const auto b = dir / "mpdwg_study_b.csv";
  RunConfig c = small(2, DomainId::BigSquare);
  c.out = a;
  run_study(c);
  c.out = b;
  run_study(c);
  const std::string text = slurp(a);
  EXPECT_EQ(text.rfind(kCsvHeader, 0), 0u);
  EXPECT_EQ(text, slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Study, SchurAndSaddleAgree) {
  RunConfig c = small(3, DomainId::UnitSquare);
  const StudyResult r = run_study(c);
  c.scheme = SchemeKind::MpdwgSaddle;
  const StudyResult s = run_study(c);
  for (std::size_t i = 0; i < r.table.rows.size(); ++i)
    EXPECT_NEAR(r.table.rows[i].report.e0, s.table.rows[i].report.e0, 1e-8 * r.table.rows[i].report.e0);
}

TEST(Study, ConditioningReport) {
  RunConfig c = small(1, DomainId::UnitSquare);
  c.cond = true;
  const StudyResult r = run_study(c);
  for (const LevelResult& l : r.levels) {
    ASSERT_TRUE(l.conditioning.has_value());
    EXPECT_GT(l.conditioning->estimate.kappa, 0.0);
    EXPECT_TRUE(std::isfinite(l.conditioning->estimate.kappa));
    EXPECT_GT(l.conditioning->cg_iterations, 0);
  }
}

TEST(Study, ReferenceChecksNeedFiveLevels) {
  RunConfig c = small(1, DomainId::UnitSquare, 2);
  c.compare_reference = true;
  const StudyResult r = run_study(c);
  ASSERT_FALSE(r.checks.empty());
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.checks.front().note.empty());
}

TEST(Study, ReferenceTablesEmbedded) {
  ASSERT_EQ(reference_tables().size(), 8u);
  const ReferenceTable* t1 = find_reference(1, DomainId::UnitSquare, MultiplierSpace::P1);
  ASSERT_NE(t1, nullptr);
  EXPECT_EQ(t1->index, 1);
  EXPECT_DOUBLE_EQ(t1->rows[4].eg, 7.02e-4);
  EXPECT_DOUBLE_EQ(t1->rows[4].e0, 6.97e-7);
  const ReferenceTable* t3 = find_reference(2, DomainId::BigSquare, MultiplierSpace::P1);
  ASSERT_NE(t3, nullptr);
  EXPECT_DOUBLE_EQ(t3->rows[5].e0, 1.640e-3);
}

TEST(Figures, CurvesAndHeader) {
  const RunConfig c = small(2, DomainId::BigSquare);
  const FigureCurves a = compare_figures(c);
  ASSERT_EQ(a.levels.size(), 3u);
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    EXPECT_TRUE(a.gamma_mpdwg[i].has_value());
    EXPECT_TRUE(a.gamma_pdwg[i].has_value() || !a.failures.empty());
  }
  std::ostringstream os, os2;
  write_figure_csv(a, os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind(std::string(kFigureHeader) + "\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  write_figure_csv(compare_figures(c), os2);
  EXPECT_EQ(text, os2.str());
}
