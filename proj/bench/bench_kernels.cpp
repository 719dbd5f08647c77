// Timings for the OpenMP kernels against their serial references.

#include <cstdio>

#ifdef BLAB_HAVE_OPENMP
#include <omp.h>
#endif

#include <chrono>

#include "blab/kernels.hpp"
#include "blab/space.hpp"
#include "blab/symbols.hpp"

using namespace blab;
using kernels::Exec;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-24s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx\n",
              name, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
#ifdef BLAB_HAVE_OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP: both columns run serial code\n");
#endif

  SpaceParams params;
  params.alpha = 0.5;
  params.n_analytic = 96;
  const int n = params.n_analytic;
  const int np = 2 * n + 16;
  const DiskQuadrature quad = build_quadrature(params, 2 * (np + 8), 128, 1024);
  std::printf("grid: %d rings x %d angles, N = %d, N_P = %d\n",
              quad.ring_count(), quad.angular_count, n, np);

  const Symbol mollified = mollify(
      truncate(test_symbol_library().at("sector"), 0.9), MollifierSpec::make(0.05));

  Eigen::VectorXcd values;
  row("grid_eval (mollified)",
      time_best_of(2, [&] { values = kernels::grid_eval(mollified.eval, quad,
                                                        Exec::serial); }),
      time_best_of(2, [&] { values = kernels::grid_eval(mollified.eval, quad,
                                                        Exec::parallel); }));

  Eigen::MatrixXcd table;
  row("ring_mode_table",
      time_best_of(3, [&] {
        table = kernels::ring_mode_table(values, quad, -(np - 1), n - 1,
                                         Exec::serial);
      }),
      time_best_of(3, [&] {
        table = kernels::ring_mode_table(values, quad, -(np - 1), n - 1,
                                         Exec::parallel);
      }));

  const auto norms = analytic_basis_norms(np, params.alpha);
  Eigen::MatrixXcd coeffs;
  row("moment_matrix",
      time_best_of(3, [&] {
        coeffs = kernels::moment_matrix(table, -(np - 1), quad, np, n, norms,
                                        Exec::serial);
      }),
      time_best_of(3, [&] {
        coeffs = kernels::moment_matrix(table, -(np - 1), quad, np, n, norms,
                                        Exec::parallel);
      }));

  Eigen::MatrixXcd gram;
  row("conj_product",
      time_best_of(3, [&] { gram = kernels::conj_product(coeffs, coeffs,
                                                         Exec::serial); }),
      time_best_of(3, [&] { gram = kernels::conj_product(coeffs, coeffs,
                                                         Exec::parallel); }));

  row("residual_gram",
      time_best_of(2, [&] {
        gram = kernels::residual_gram(values, coeffs, quad, n, norms,
                                      Exec::serial);
      }),
      time_best_of(2, [&] {
        gram = kernels::residual_gram(values, coeffs, quad, n, norms,
                                      Exec::parallel);
      }));

  const Eigen::VectorXcd moments = coeffs.col(0);
  double out = 0.0;
  row("projection_residual",
      time_best_of(3, [&] {
        out += kernels::projection_residual_norm_sq(values, moments, quad,
                                                    norms, Exec::serial);
      }),
      time_best_of(3, [&] {
        out += kernels::projection_residual_norm_sq(values, moments, quad,
                                                    norms, Exec::parallel);
      }));
  return out < 0 ? 1 : 0;
}
