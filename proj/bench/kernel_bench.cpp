// Serial reference vs OpenMP kernels on random inputs.
//
//   kernel_bench [n ...]     (default sizes: 100 300 600)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "ttd/kernels.h"

namespace {

ttd::SymMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ttd::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return ttd::SymMatrix(std::move(m));
}

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> sizes;
  for (int i = 1; i < argc; ++i) sizes.push_back(std::strtoul(argv[i], nullptr, 10));
  if (sizes.empty()) sizes = {100, 300, 600};

  std::printf("threads: %d\n", ttd::kernels::max_threads());
  std::printf("%-14s %6s %12s %12s %8s\n", "kernel", "n", "serial_s", "parallel_s", "speedup");
  for (std::size_t n : sizes) {
    const ttd::SymMatrix m = random_symmetric(n, 42 + n);
    int serial_sweeps = 0;
    int parallel_sweeps = 0;
    const double ts = seconds([&] { serial_sweeps = ttd::kernels::serial::jacobi_eig(m, true).sweeps; });
    const double tp = seconds([&] { parallel_sweeps = ttd::kernels::parallel::jacobi_eig(m, true).sweeps; });
    std::printf("%-14s %6zu %12.4f %12.4f %8.2f  (sweeps %d / %d)\n", "jacobi_eig", n, ts, tp, ts / tp,
                serial_sweeps, parallel_sweeps);

    const double gs = seconds([&] { ttd::kernels::serial::gram(m.matrix()); });
    const double gp = seconds([&] { ttd::kernels::parallel::gram(m.matrix()); });
    std::printf("%-14s %6zu %12.4f %12.4f %8.2f\n", "gram", n, gs, gp, gs / gp);

    const double ms = seconds([&] { ttd::kernels::serial::multiply(m.matrix(), m.matrix()); });
    const double mp = seconds([&] { ttd::kernels::parallel::multiply(m.matrix(), m.matrix()); });
    std::printf("%-14s %6zu %12.4f %12.4f %8.2f\n", "multiply", n, ms, mp, ms / mp);

    ttd::Matrix spd_m = ttd::Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) spd_m(i, j) += 0.4 * m(i, j) / static_cast<double>(n);
    const ttd::SymMatrix spd(std::move(spd_m));
    const double cs = seconds([&] { ttd::kernels::serial::cholesky_solve(spd, m.matrix()); });
    const double cp = seconds([&] { ttd::kernels::parallel::cholesky_solve(spd, m.matrix()); });
    std::printf("%-14s %6zu %12.4f %12.4f %8.2f\n", "cholesky_solve", n, cs, cp, cs / cp);
  }
  return 0;
}
