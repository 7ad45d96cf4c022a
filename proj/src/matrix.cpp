#include "ttd/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttd/error.h"

namespace ttd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DegenerateGraph: return "DegenerateGraph";
    case ErrorKind::TooManyClusters: return "TooManyClusters";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::EmptySession: return "EmptySession";
    case ErrorKind::EmptySegment: return "EmptySegment";
    case ErrorKind::OrderingError: return "OrderingError";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorKind::DimensionError, "ragged rows: row " + std::to_string(i));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.values()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionError, "shape mismatch in max_abs_diff");
  }
  double best = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) best = std::max(best, std::abs(av[i] - bv[i]));
  return best;
}

double frobenius_norm(const Matrix& m) {
  double sum = 0.0;
  for (double v : m.values()) sum += v * v;
  return std::sqrt(sum);
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (!m_.square()) {
    throw Error(ErrorKind::InvalidMatrix,
                "not square: " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
  const std::size_t n = m_.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (!std::isfinite(m_(i, j))) {
        throw Error(ErrorKind::InvalidMatrix,
                    "non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (m_(i, j) != m_(j, i)) {
        throw Error(ErrorKind::InvalidMatrix,
                    "asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

SymMatrix SymMatrix::average_of(const Matrix& m) {
  if (!m.square()) throw Error(ErrorKind::InvalidMatrix, "symmetrize needs a square matrix");
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return SymMatrix(std::move(out));
}

}  // namespace ttd
