#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsbgs/io.hpp"
#include "oracles.hpp"

using namespace dsbgs;
using namespace dsbgs::testing;

namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(DSBGS_FIXTURE_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsbgs_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

DenseMatrix parse(const std::string& text, std::size_t cap = kDensifyCap) {
  std::istringstream is(text);
  return read_matrix_market(is, "<mem>", cap);
}

}  // namespace

TEST(MatrixMarket, CoordinateRealGeneralSumsDuplicates) {
  const DenseMatrix expect{{2.0, 0, 0, 0}, {0, 0, -2, 0}, {7, 0, 0, 4.25}};
  EXPECT_EQ(read_matrix_market(fixture("coord_real_general.mtx")), expect);
}

TEST(MatrixMarket, CoordinateIntegerSymmetric) {
  const DenseMatrix expect{{2, 3, 0}, {3, 0, -1}, {0, -1, 5}};
  EXPECT_EQ(read_matrix_market(fixture("coord_integer_symmetric.mtx")), expect);
}

TEST(MatrixMarket, PatternBecomesOnes) {
  EXPECT_EQ(read_matrix_market(fixture("coord_pattern_general.mtx")), (DenseMatrix{{0, 1, 0}, {1, 0, 1}}));
  EXPECT_EQ(read_matrix_market(fixture("coord_pattern_symmetric.mtx")),
            (DenseMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}}));
}

TEST(MatrixMarket, ArrayFormats) {
  EXPECT_EQ(read_matrix_market(fixture("array_real_general.mtx")), (DenseMatrix{{1, 2, 3}, {4, 5, 6}}));
  EXPECT_EQ(read_matrix_market(fixture("array_real_symmetric.mtx")),
            (DenseMatrix{{1, 2, 3}, {2, 4, 5}, {3, 5, 6}}));
  EXPECT_EQ(read_matrix_market(fixture("array_integer_general.mtx")), (DenseMatrix{{1, 0}, {-3, 8}}));
}

TEST(MatrixMarket, IdentityAndSymmetricExpansion) {
  EXPECT_EQ(read_matrix_market(fixture("identity2.mtx")), DenseMatrix::identity(2));
  const DenseMatrix A = read_matrix_market(fixture("lower_only.mtx"));
  EXPECT_EQ(A(0, 1), 3.0);
  EXPECT_EQ(A(1, 0), 3.0);
}

TEST(MatrixMarket, RejectsEveryUnsupportedHeader) {
  const char* bad[] = {
      "%%MatrixMarket matrix coordinate complex general",
      "%%MatrixMarket matrix array complex symmetric",
      "%%MatrixMarket matrix coordinate real skew-symmetric",
      "%%MatrixMarket matrix coordinate real hermitian",
      "%%MatrixMarket matrix array pattern general",
      "%%MatrixMarket matrix array pattern symmetric",
      "%%MatrixMarket vector coordinate real general",
      "%%MatrixMarket matrix sparse real general",
      "%MatrixMarket matrix coordinate real general",
      "%%MatrixMarket matrix coordinate real",
  };
  for (const char* b : bad) {
    EXPECT_THROW(parse_matrix_market_banner(b), MatrixMarketError) << b;
    EXPECT_THROW(parse(std::string(b) + "\n1 1 1\n1 1 1\n"), MatrixMarketError) << b;
  }
  for (const char* fmt : {"coordinate", "array"})
    for (const char* field : {"real", "integer", "pattern"})
      for (const char* sym : {"general", "symmetric"}) {
        const std::string banner = std::string("%%MatrixMarket matrix ") + fmt + " " + field + " " + sym;
        if (std::string(fmt) == "array" && std::string(field) == "pattern") continue;
        EXPECT_NO_THROW(parse_matrix_market_banner(banner)) << banner;
      }
}

TEST(MatrixMarket, ErrorsCarryLineNumbers) {
  try {
    read_matrix_market(fixture("bad_entry.mtx"));
    FAIL() << "expected a parse error";
  } catch (const MatrixMarketError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("bad_entry.mtx:5"), std::string::npos);
  }
  try {
    parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 2\n");
    FAIL() << "expected a parse error";
  } catch (const MatrixMarketError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), MatrixMarketError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 two 1\n"), MatrixMarketError);
}

TEST(MatrixMarket, CapacityError) {
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n100 100 0\n", 9999), CapacityError);
  EXPECT_NO_THROW(parse("%%MatrixMarket matrix coordinate real general\n100 100 0\n", 10000));
}

TEST(MatrixMarket, RandomSparseRoundTrip) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.next_u64() % 30, n = 1 + rng.next_u64() % 30;
    DenseMatrix A(m, n);
    for (double& v : A.entries())
      if (rng.uniform01() < 0.2) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    const auto path = scratch("roundtrip.mtx").string();
    write_matrix_market(path, A);
    EXPECT_EQ(read_matrix_market(path), A);
  }
}

TEST(MatrixMarket, VectorRoundTrip) {
  Rng rng(22);
  const Vector v = random_vector(17, rng);
  const auto path = scratch("rhs.mtx").string();
  write_vector_market(path, v);
  EXPECT_EQ(read_vector_market(path), v);
}

TEST(MatrixMarket, AbtahaDimensionsWhenAvailable) {
  const char* path = std::getenv("DSBGS_ABTAHA1");
  if (!path) GTEST_SKIP() << "set DSBGS_ABTAHA1 to the abtaha1.mtx path to run";
  const DenseMatrix A = read_matrix_market(path);
  EXPECT_EQ(A.rows(), 14596u);
  EXPECT_EQ(A.cols(), 209u);
}

TEST(HistoryCsv, EmptyTraceIsHeaderOnly) {
  const auto path = scratch("empty.csv");
  write_history_csv(SolveTrace{}, path.string());
  EXPECT_EQ(lines_of(path), (std::vector<std::string>{"k,error_norm,residual_norm"}));
}

TEST(HistoryCsv, SingleRecordIsTwoLines) {
  SolveTrace tr;
  tr.error_history = {{0, 1.0}};
  tr.residual_history = {{0, 2.0}};
  const auto path = scratch("one.csv");
  write_history_csv(tr, path.string());
  EXPECT_EQ(lines_of(path), (std::vector<std::string>{"k,error_norm,residual_norm", "0,1,2"}));
}

TEST(HistoryCsv, RoundTripIsExact) {
  Rng rng(23);
  std::vector<HistoryRow> rows;
  for (std::size_t k = 0; k < 50; k += 10) rows.push_back({k, std::abs(rng.normal()) / 3, std::exp(rng.normal())});
  rows.push_back({60, std::numeric_limits<double>::quiet_NaN(), 1e-300});
  const auto path = scratch("hist.csv").string();
  write_history_csv(rows, path);
  const auto back = read_history_csv(path);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    EXPECT_EQ(back[i].k, rows[i].k);
    EXPECT_EQ(back[i].error_norm, rows[i].error_norm);
    EXPECT_EQ(back[i].residual_norm, rows[i].residual_norm);
  }
  EXPECT_TRUE(std::isnan(back.back().error_norm));
  EXPECT_EQ(back.back().residual_norm, 1e-300);
}

TEST(HistoryCsv, MissingErrorEntriesBecomeNan) {
  SolveTrace tr;
  tr.residual_history = {{0, 3.0}, {10, 2.0}};
  tr.error_history = {{10, 0.5}};
  const auto rows = history_rows(tr);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].error_norm));
  EXPECT_EQ(rows[1].error_norm, 0.5);
}

TEST(ResultsCsv, RoundTripIsExact) {
  ExperimentResult a;
  a.matrix = "type1(125x250,r=100,kappa=2)";
  a.m = 125;
  a.n = 250;
  a.label = "RK";
  a.alpha = 1;
  a.ell = 1;
  a.tau = 250;
  a.iter_mean = 3155.55;
  a.cpu_mean = 0.1 / 3;
  a.speedup_vs_baseline = 1;
  ExperimentResult b = a;
  b.label = "DSBGS(5,5,n)";
  b.alpha = 5;
  b.ell = 5;
  b.iter_mean = 596.95;
  b.speedup_vs_baseline = 2.0 / 3;
  const auto path = scratch("results.csv").string();
  write_results_csv({a, b}, path);
  EXPECT_EQ(lines_of(path).front(), "matrix,m,n,method,alpha,ell,tau,iter_mean,cpu_mean,speedup");
  const auto back = read_results_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].matrix, "type1(125x250;r=100;kappa=2)");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& src = i == 0 ? a : b;
    EXPECT_EQ(back[i].label, src.label == "DSBGS(5,5,n)" ? "DSBGS(5;5;n)" : src.label);
    EXPECT_EQ(back[i].m, src.m);
    EXPECT_EQ(back[i].tau, src.tau);
    EXPECT_EQ(back[i].alpha, src.alpha);
    EXPECT_EQ(back[i].iter_mean, src.iter_mean);
    EXPECT_EQ(back[i].cpu_mean, src.cpu_mean);
    EXPECT_EQ(back[i].speedup_vs_baseline, src.speedup_vs_baseline);
  }
}

TEST(Csv, UnwritablePathNamesThePath) {
  try {
    write_history_csv(SolveTrace{}, "/nonexistent-dir/x.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}
