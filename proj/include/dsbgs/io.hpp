#pragma once

// Matrix Market ingestion (densified) and CSV emission for traces and tables.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsbgs/experiment.hpp"
#include "dsbgs/linalg.hpp"
#include "dsbgs/solver.hpp"

namespace dsbgs {

inline constexpr std::size_t kDensifyCap = 10'000'000;

class MatrixMarketError : public std::runtime_error {
public:
  MatrixMarketError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class CapacityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MmFormat { coordinate, array };
enum class MmField { real, integer, pattern };
enum class MmSymmetry { general, symmetric };

struct MatrixMarketHeader {
  MmFormat format = MmFormat::coordinate;
  MmField field = MmField::real;
  MmSymmetry symmetry = MmSymmetry::general;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters in number '" + s + "'");
  return v;
}

}  // namespace detail

/// Parses the banner line. Rejects every combination outside
/// {coordinate, array} x {real, integer, pattern} x {general, symmetric},
/// and pattern with array storage.
inline MatrixMarketHeader parse_matrix_market_banner(const std::string& line,
                                                     const std::string& path = "<input>") {
  std::istringstream is(line);
  std::string banner, object, format, field, symmetry;
  if (!(is >> banner >> object >> format >> field >> symmetry))
    throw MatrixMarketError(path, 1, "malformed banner");
  if (banner != "%%MatrixMarket") throw MatrixMarketError(path, 1, "missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);

  MatrixMarketHeader h;
  if (object != "matrix") throw MatrixMarketError(path, 1, "unsupported object '" + object + "'");
  if (format == "coordinate") h.format = MmFormat::coordinate;
  else if (format == "array") h.format = MmFormat::array;
  else throw MatrixMarketError(path, 1, "unsupported format '" + format + "'");
  if (field == "real" || field == "double") h.field = MmField::real;
  else if (field == "integer") h.field = MmField::integer;
  else if (field == "pattern") h.field = MmField::pattern;
  else throw MatrixMarketError(path, 1, "unsupported field '" + field + "'");
  if (symmetry == "general") h.symmetry = MmSymmetry::general;
  else if (symmetry == "symmetric") h.symmetry = MmSymmetry::symmetric;
  else throw MatrixMarketError(path, 1, "unsupported symmetry '" + symmetry + "'");
  if (h.format == MmFormat::array && h.field == MmField::pattern)
    throw MatrixMarketError(path, 1, "unsupported combination 'array pattern'");
  return h;
}

/// Reads a Matrix Market stream into a dense matrix. Symmetric storage is
/// expanded, pattern entries become 1.0 and duplicate coordinates are summed.
inline DenseMatrix read_matrix_market(std::istream& in, const std::string& path = "<input>",
                                      std::size_t cap = kDensifyCap) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw MatrixMarketError(path, 1, "empty file");
  ++lineno;
  const MatrixMarketHeader h = parse_matrix_market_banner(line, path);

  auto next_data_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '%' || detail::blank(line)) continue;
      return;
    }
    throw MatrixMarketError(path, lineno, std::string("unexpected end of file reading ") + what);
  };

  next_data_line("size line");
  std::size_t rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream is(line);
    long long r = -1, c = -1, z = -1;
    if (!(is >> r >> c) || r < 0 || c < 0) throw MatrixMarketError(path, lineno, "malformed size line");
    if (h.format == MmFormat::coordinate && (!(is >> z) || z < 0))
      throw MatrixMarketError(path, lineno, "malformed size line");
    rows = static_cast<std::size_t>(r);
    cols = static_cast<std::size_t>(c);
    nnz = h.format == MmFormat::coordinate ? static_cast<std::size_t>(z) : 0;
  }
  if (h.symmetry == MmSymmetry::symmetric && rows != cols)
    throw MatrixMarketError(path, lineno, "symmetric matrix must be square");
  if (rows != 0 && cols > cap / rows)
    throw CapacityError(path + ": " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds the densification cap of " + std::to_string(cap) + " entries");

  DenseMatrix A(rows, cols);
  auto read_value = [&](std::istringstream& is) {
    if (h.field == MmField::pattern) return 1.0;
    std::string tok;
    if (!(is >> tok)) throw MatrixMarketError(path, lineno, "missing value");
    try {
      const double v = detail::parse_double(tok);
      if (!std::isfinite(v)) throw MatrixMarketError(path, lineno, "non-finite value");
      return v;
    } catch (const std::invalid_argument&) {
      throw MatrixMarketError(path, lineno, "malformed value '" + tok + "'");
    } catch (const std::out_of_range&) {
      throw MatrixMarketError(path, lineno, "value out of range '" + tok + "'");
    }
  };

  if (h.format == MmFormat::coordinate) {
    for (std::size_t e = 0; e < nnz; ++e) {
      next_data_line("entries");
      std::istringstream is(line);
      long long i = 0, j = 0;
      if (!(is >> i >> j)) throw MatrixMarketError(path, lineno, "malformed entry");
      if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols)
        throw MatrixMarketError(path, lineno, "entry index out of range");
      const double v = read_value(is);
      const auto r = static_cast<std::size_t>(i - 1);
      const auto c = static_cast<std::size_t>(j - 1);
      A(r, c) += v;
      if (h.symmetry == MmSymmetry::symmetric && r != c) A(c, r) += v;
    }
  } else {
    // column-major; symmetric stores the lower triangle only
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t first = h.symmetry == MmSymmetry::symmetric ? c : 0;
      for (std::size_t r = first; r < rows; ++r) {
        next_data_line("entries");
        std::istringstream is(line);
        const double v = read_value(is);
        A(r, c) = v;
        if (h.symmetry == MmSymmetry::symmetric) A(c, r) = v;
      }
    }
  }
  return A;
}

inline DenseMatrix read_matrix_market(const std::string& path, std::size_t cap = kDensifyCap) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_matrix_market(in, path, cap);
}

/// Writes nonzeros in coordinate real general form.
inline void write_matrix_market(const std::string& path, const DenseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  std::size_t nnz = 0;
  for (double v : A.entries()) nnz += v != 0.0 ? 1 : 0;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << detail::fmt17(A(i, j)) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Dense column vector as an m x 1 array file.
inline void write_vector_market(const std::string& path, std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
  for (double x : v) out << detail::fmt17(x) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Vector read_vector_market(const std::string& path) {
  const DenseMatrix M = read_matrix_market(path);
  if (M.cols() != 1) throw std::runtime_error(path + ": expected a single-column array");
  return Vector(M.entries().begin(), M.entries().end());
}

// ---------------------------------------------------------------------------
// CSV

struct HistoryRow {
  std::size_t k = 0;
  double error_norm = 0;
  double residual_norm = 0;
};

inline std::vector<HistoryRow> history_rows(const SolveTrace& trace) {
  std::vector<HistoryRow> rows;
  std::size_t e = 0;
  for (const auto& rp : trace.residual_history) {
    while (e < trace.error_history.size() && trace.error_history[e].k < rp.k) ++e;
    const double err = (e < trace.error_history.size() && trace.error_history[e].k == rp.k)
                           ? trace.error_history[e].value
                           : std::numeric_limits<double>::quiet_NaN();
    rows.push_back({rp.k, err, rp.value});
  }
  return rows;
}

inline void write_history_csv(const std::vector<HistoryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "k,error_norm,residual_norm\n";
  for (const auto& r : rows)
    out << r.k << ',' << detail::fmt17(r.error_norm) << ',' << detail::fmt17(r.residual_norm) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_history_csv(const SolveTrace& trace, const std::string& path) {
  write_history_csv(history_rows(trace), path);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != expected_header)
    throw std::runtime_error(path + ": unexpected CSV header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
  }
  return rows;
}

inline std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace detail

inline std::vector<HistoryRow> read_history_csv(const std::string& path) {
  std::vector<HistoryRow> rows;
  for (const auto& cells : detail::read_csv(path, "k,error_norm,residual_norm")) {
    if (cells.size() != 3) throw std::runtime_error(path + ": malformed history row");
    rows.push_back({std::stoull(cells[0]), detail::parse_double(cells[1]), detail::parse_double(cells[2])});
  }
  return rows;
}

inline constexpr const char* kResultsHeader =
    "matrix,m,n,method,alpha,ell,tau,iter_mean,cpu_mean,speedup";

inline void write_results_csv(const std::vector<ExperimentResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << kResultsHeader << '\n';
  for (const auto& r : results)
    out << detail::csv_safe(r.matrix) << ',' << r.m << ',' << r.n << ',' << detail::csv_safe(r.label)
        << ',' << detail::fmt17(r.alpha) << ',' << r.ell << ',' << r.tau << ','
        << detail::fmt17(r.iter_mean) << ',' << detail::fmt17(r.cpu_mean) << ','
        << detail::fmt17(r.speedup_vs_baseline) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<ExperimentResult> read_results_csv(const std::string& path) {
  std::vector<ExperimentResult> out;
  for (const auto& c : detail::read_csv(path, kResultsHeader)) {
    if (c.size() != 10) throw std::runtime_error(path + ": malformed results row");
    ExperimentResult r;
    r.matrix = c[0];
    r.m = std::stoull(c[1]);
    r.n = std::stoull(c[2]);
    r.label = c[3];
    r.alpha = detail::parse_double(c[4]);
    r.ell = std::stoull(c[5]);
    r.tau = std::stoull(c[6]);
    r.iter_mean = detail::parse_double(c[7]);
    r.cpu_mean = detail::parse_double(c[8]);
    r.speedup_vs_baseline = detail::parse_double(c[9]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dsbgs
