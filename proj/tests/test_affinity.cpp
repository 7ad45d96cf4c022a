#include "doctest.h"
#include "support.h"
#include "ttd/affinity.h"
#include "ttd/error.h"

using namespace ttd;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidInput;
}

// Direct 2-D convolution with a normalized Gaussian of radius ceil(4 sigma)
// and half-sample reflection at the borders.
Matrix direct_blur(const Matrix& a, double sigma) {
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> w;
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    w.push_back(std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma)));
    total += w.back();
  }
  for (double& x : w) x /= total;
  auto reflect = [n](std::ptrdiff_t i) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return static_cast<std::size_t>(i);
  };
  Matrix out(a.rows(), a.cols());
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < n; ++j)
      for (std::ptrdiff_t di = -radius; di <= radius; ++di)
        for (std::ptrdiff_t dj = -radius; dj <= radius; ++dj)
          out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
              w[static_cast<std::size_t>(di + radius)] * w[static_cast<std::size_t>(dj + radius)] *
              a(reflect(i + di), reflect(j + dj));
  return out;
}

double sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v;
  return s;
}

SymMatrix with_first_row(const std::vector<double>& row) {
  const std::size_t n = row.size();
  Matrix m(n, n, 0.3);
  for (std::size_t j = 0; j < n; ++j) m(0, j) = m(j, 0) = row[j];
  return SymMatrix(m);
}

}  // namespace

TEST_CASE("cosine affinity of identical, orthogonal and opposite vectors") {
  const auto a = cosine_affinity({{1, 0, 0}, {1, 0, 0}, {0, 2, 0}, {-3, 0, 0}});
  CHECK(a(0, 1) == 1.0);
  CHECK(a(0, 2) == 0.5);
  CHECK(a(0, 3) == 0.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a(i, i) == 1.0);
}

TEST_CASE("cosine affinity ignores positive scaling and stays in [0, 1]") {
  std::mt19937_64 rng(41);
  auto e = ttd::testing::random_embeddings(12, 8, rng);
  const auto a = cosine_affinity(e);
  for (std::size_t i = 0; i < e.size(); ++i)
    for (double& v : e[i]) v *= 0.5 + static_cast<double>(i);
  const auto b = cosine_affinity(e);
  CHECK(max_abs_diff(a.matrix(), b.matrix()) <= 1e-14);
  for (double v : a.matrix().values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("cosine affinity errors") {
  CHECK(kind_of([] { cosine_affinity({{1, 0}, {1, 0, 0}}); }) == ErrorKind::DimensionError);
  CHECK(kind_of([] { cosine_affinity({{1, 0}, {0, 0}}); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("blur with sigma 0 is the identity") {
  std::mt19937_64 rng(42);
  const SymMatrix a = ttd::testing::random_symmetric(6, rng, 0.0, 1.0);
  CHECK(gaussian_blur(a, 0.0) == a);
  CHECK(kind_of([&] { gaussian_blur(a, -0.1); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("blur keeps a constant matrix constant") {
  const SymMatrix c(Matrix(7, 7, 0.37));
  for (double sigma : {0.5, 1.0, 3.0}) CHECK(max_abs_diff(gaussian_blur(c, sigma).matrix(), c.matrix()) <= 1e-12);
}

TEST_CASE("blurred spike matches direct convolution and keeps its mass") {
  Matrix spike(5, 5);
  spike(2, 2) = 1.0;
  const SymMatrix blurred = gaussian_blur(SymMatrix(spike), 1.0);
  CHECK(max_abs_diff(blurred.matrix(), direct_blur(spike, 1.0)) <= 1e-12);
  CHECK(std::abs(sum(blurred.matrix()) - 1.0) <= 1e-6);
  CHECK(blurred(2, 2) < 1.0);
  CHECK(blurred(0, 0) > 0.0);
}

TEST_CASE("blur of random symmetric input matches direct convolution") {
  std::mt19937_64 rng(43);
  const SymMatrix a = ttd::testing::random_symmetric(9, rng, 0.0, 1.0);
  for (double sigma : {0.7, 1.5}) CHECK(max_abs_diff(gaussian_blur(a, sigma).matrix(), direct_blur(a.matrix(), sigma)) <= 1e-12);
}

TEST_CASE("nearest-rank quantile") {
  CHECK(nearest_rank_index(0.5, 4) == 1);
  CHECK(nearest_rank_index(0.95, 20) == 18);
  CHECK(nearest_rank_index(0.01, 4) == 0);
  CHECK(nearest_rank_index(1.0, 4) == 3);
  CHECK(nearest_rank_quantile({0.1, 0.5, 0.9, 0.7}, 0.5) == 0.5);
}

TEST_CASE("row thresholding of a worked row") {
  const Matrix t = row_threshold(with_first_row({0.1, 0.5, 0.9, 0.7}), 0.5);
  CHECK(t(0, 0) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(t(0, 1) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(t(0, 2) == 1.0);
  CHECK(t(0, 3) == 1.0);
}

TEST_CASE("row thresholding with p = 1/N keeps everything but the minimum") {
  const Matrix t = row_threshold(with_first_row({0.4, 0.2, 0.9, 0.7, 0.6}), 1.0 / 5.0);
  CHECK(t(0, 1) == doctest::Approx(0.002).epsilon(1e-15));
  for (std::size_t j : {0u, 2u, 3u, 4u}) CHECK(t(0, j) == 1.0);
}

TEST_CASE("a constant row is binarized as one tied block") {
  const Matrix t = row_threshold(SymMatrix(Matrix(4, 4, 0.6)), 0.5);
  for (double v : t.values()) CHECK(v == 1.0);
}

TEST_CASE("row thresholding output range and count of ones") {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> level(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 20);
    // Coarse levels produce plenty of ties.
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = level(rng) / 10.0;
    const SymMatrix a(m);
    const double p = 0.3 + 0.05 * (trial % 13);
    const Matrix t = row_threshold(a, p);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t ones = 0;
      std::vector<double> row(a.row(i).begin(), a.row(i).end());
      const double q = nearest_rank_quantile(row, p);
      const auto ties = static_cast<std::size_t>(std::count(row.begin(), row.end(), q));
      for (std::size_t j = 0; j < n; ++j) {
        if (t(i, j) == 1.0) {
          ++ones;
        } else {
          CHECK(t(i, j) == doctest::Approx(0.01 * a(i, j)).epsilon(1e-15));
        }
      }
      CHECK(ones <= static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(n))) + ties);
      // Everything strictly above the quantile is binarized.
      for (std::size_t j = 0; j < n; ++j)
        if (a(i, j) > q) CHECK(t(i, j) == 1.0);
    }
  }
}

TEST_CASE("symmetrize") {
  CHECK(symmetrize(Matrix::from_rows({{1, 0.2}, {0.8, 1}})).matrix() == Matrix::from_rows({{1, 0.5}, {0.5, 1}}));
  std::mt19937_64 rng(45);
  const SymMatrix s = ttd::testing::random_symmetric(6, rng);
  CHECK(symmetrize(s.matrix()) == s);
  const Matrix anti = Matrix::from_rows({{0, 2, -1}, {-2, 0, 3}, {1, -3, 0}});
  CHECK(max_abs(symmetrize(anti).matrix()) == 0.0);
  const Matrix r = ttd::testing::random_matrix(5, 5, rng);
  CHECK(symmetrize(symmetrize(r).matrix()) == symmetrize(r));
  CHECK(kind_of([] { symmetrize(Matrix(2, 3)); }) == ErrorKind::InvalidMatrix);
}

TEST_CASE("refinement pins the diagonal and returns a symmetric matrix in [0, 1]") {
  std::mt19937_64 rng(46);
  const SymMatrix a = cosine_affinity(ttd::testing::random_embeddings(15, 6, rng));
  for (double blur : {0.0, 1.0}) {
    RefinementConfig cfg;
    cfg.p_percentile = 0.6;
    cfg.blur_sigma = blur;
    const SymMatrix r = refine(a, cfg);
    for (std::size_t i = 0; i < r.order(); ++i) {
      CHECK(r(i, i) == 1.0);
      for (std::size_t j = 0; j < r.order(); ++j) {
        CHECK(r(i, j) >= 0.0);
        CHECK(r(i, j) <= 1.0);
      }
    }
  }
}
