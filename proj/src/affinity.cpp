#include "ttd/affinity.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttd/error.h"
#include "ttd/kernels.h"

namespace ttd {

SymMatrix cosine_affinity(const std::vector<Embedding>& embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw Error(ErrorKind::InvalidInput, "cosine_affinity needs at least 2 embeddings");
  const std::size_t dim = embeddings.front().size();
  if (dim == 0) throw Error(ErrorKind::DimensionError, "embedding dimension is 0");

  Matrix unit(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Embedding& e = embeddings[i];
    if (e.size() != dim) {
      throw Error(ErrorKind::DimensionError, "embedding " + std::to_string(i) + " has dimension " +
                                                 std::to_string(e.size()) + ", expected " + std::to_string(dim));
    }
    double norm = 0.0;
    for (double v : e) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::DegenerateInput, "embedding " + std::to_string(i) + " is zero or non-finite");
    }
    auto row = unit.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = e[j] / norm;
  }

  Matrix a = kernels::parallel::gram(unit);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = i == j ? 1.0 : std::clamp(0.5 * (1.0 + a(i, j)), 0.0, 1.0);
    }
  }
  return SymMatrix(std::move(a));
}

namespace {

// Half-sample symmetric reflection: ... c b a | a b c ... | c b a ...
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

}  // namespace

SymMatrix gaussian_blur(const SymMatrix& a, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidParameter, "blur sigma must be a finite value >= 0");
  }
  if (sigma == 0.0) return a;

  const std::size_t n = a.order();
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  // Separable: rows first, then columns.
  Matrix tmp(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * a(i, reflect(static_cast<std::ptrdiff_t>(j) + k, n));
      }
      tmp(i, j) = acc;
    }
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(reflect(static_cast<std::ptrdiff_t>(i) + k, n), j);
      }
      out(i, j) = acc;
    }
  }
  return SymMatrix::average_of(out);
}

std::size_t nearest_rank_index(double p, std::size_t n) {
  // The small slack keeps products such as 0.95 * 20 = 19.000000000000004 on rank 19.
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(n));
  return static_cast<std::size_t>(rank - 1);
}

double nearest_rank_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, "quantile of an empty row");
  std::sort(values.begin(), values.end());
  return values[nearest_rank_index(p, values.size())];
}

Matrix row_threshold(const SymMatrix& a, double p, double soft_multiplier) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidParameter, "p-percentile must lie in (0, 1)");
  const std::size_t n = a.order();
  Matrix out(n, n);
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = a.row(i);
    sorted.assign(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[std::min(nearest_rank_index(p, n) + 1, n - 1)];
    auto dst = out.row(i);
    for (std::size_t j = 0; j < n; ++j) dst[j] = row[j] >= cut ? 1.0 : row[j] * soft_multiplier;
  }
  return out;
}

SymMatrix symmetrize(const Matrix& a) {
  if (!a.square()) {
    throw Error(ErrorKind::InvalidMatrix,
                "symmetrize needs a square matrix, got " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  return SymMatrix::average_of(a);
}

SymMatrix refine(const SymMatrix& a, const RefinementConfig& cfg) {
  const SymMatrix blurred = cfg.blur_sigma > 0.0 ? gaussian_blur(a, cfg.blur_sigma) : a;
  Matrix out = symmetrize(row_threshold(blurred, cfg.p_percentile, cfg.soft_multiplier)).matrix();
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) = 1.0;
  return SymMatrix(std::move(out));
}

}  // namespace ttd
