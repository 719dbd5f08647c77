#include "blab/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#ifdef BLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace blab::kernels {

namespace {

constexpr double kPi = std::numbers::pi;

bool use_parallel(Exec exec) {
#ifdef BLAB_HAVE_OPENMP
  return exec == Exec::parallel;
#else
  (void)exec;
  return false;
#endif
}

// e^{i 2 pi t / n} for t = 0..n-1; e^{i m theta_l} = roots[(m*l) mod n].
std::vector<cplx> unit_roots(int n) {
  std::vector<cplx> roots(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    roots[static_cast<std::size_t>(t)] = std::polar(1.0, 2.0 * kPi * t / n);
  }
  return roots;
}

// r_i^p for p = 0..max_power, ring-major.
Eigen::MatrixXd power_table(const DiskQuadrature& quad, int max_power) {
  const int rings = quad.ring_count();
  Eigen::MatrixXd powers(rings, max_power + 1);
  for (int i = 0; i < rings; ++i) {
    double acc = 1.0;
    for (int p = 0; p <= max_power; ++p) {
      powers(i, p) = acc;
      acc *= quad.radial_nodes[static_cast<std::size_t>(i)];
    }
  }
  return powers;
}

}  // namespace

int thread_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("BLAB_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 0;
  }();
  return cap;
}

namespace {

void apply_thread_cap() {
#ifdef BLAB_HAVE_OPENMP
  static const bool applied = [] {
    if (const int cap = thread_cap(); cap > 0) omp_set_num_threads(cap);
    return true;
  }();
  (void)applied;
#endif
}

}  // namespace

Eigen::VectorXcd grid_eval(const std::function<cplx(cplx)>& f,
                           const DiskQuadrature& quad, Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const int n = quad.angular_count;
  Eigen::VectorXcd out(static_cast<Eigen::Index>(rings) * n);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) collapse(2) if (par)
#endif
  for (int i = 0; i < rings; ++i) {
    for (int l = 0; l < n; ++l) {
      out(static_cast<Eigen::Index>(i) * n + l) = f(quad.node(i, l));
    }
  }
  (void)par;
  return out;
}

Eigen::MatrixXcd ring_mode_table(const Eigen::VectorXcd& values,
                                 const DiskQuadrature& quad, int m_min,
                                 int m_max, Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const int n = quad.angular_count;
  const int n_modes = m_max - m_min + 1;
  const auto roots = unit_roots(n);
  Eigen::MatrixXcd table(rings, n_modes);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) collapse(2) if (par)
#endif
  for (int i = 0; i < rings; ++i) {
    for (int c = 0; c < n_modes; ++c) {
      const int m = m_min + c;
      const int step = ((m % n) + n) % n;
      cplx acc = 0.0;
      std::size_t idx = 0;
      const cplx* v = values.data() + static_cast<std::ptrdiff_t>(i) * n;
      for (int l = 0; l < n; ++l) {
        acc += v[l] * roots[idx];
        idx += static_cast<std::size_t>(step);
        if (idx >= static_cast<std::size_t>(n)) idx -= static_cast<std::size_t>(n);
      }
      table(i, c) = acc / static_cast<double>(n);
    }
  }
  (void)par;
  return table;
}

Eigen::MatrixXcd moment_matrix(const Eigen::MatrixXcd& table, int m_min,
                               const DiskQuadrature& quad, int n_rows,
                               int n_cols, const std::vector<double>& norms,
                               Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const Eigen::MatrixXd powers = power_table(quad, n_rows + n_cols - 2);
  Eigen::MatrixXcd out(n_rows, n_cols);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) collapse(2) if (par)
#endif
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) {
      const int c = (j - i) - m_min;
      cplx acc = 0.0;
      for (int ring = 0; ring < rings; ++ring) {
        acc += quad.radial_weights[static_cast<std::size_t>(ring)] *
               powers(ring, i + j) * table(ring, c);
      }
      out(i, j) = acc / (norms[static_cast<std::size_t>(i)] *
                         norms[static_cast<std::size_t>(j)]);
    }
  }
  (void)par;
  return out;
}

Eigen::VectorXcd analytic_moments(const Eigen::MatrixXcd& table, int m_min,
                                  const DiskQuadrature& quad, int cap,
                                  const std::vector<double>& norms, Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const Eigen::MatrixXd powers = power_table(quad, cap - 1);
  Eigen::VectorXcd out(cap);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int m = 0; m < cap; ++m) {
    const int c = (-m) - m_min;
    cplx acc = 0.0;
    for (int ring = 0; ring < rings; ++ring) {
      acc += quad.radial_weights[static_cast<std::size_t>(ring)] *
             powers(ring, m) * table(ring, c);
    }
    out(m) = acc / norms[static_cast<std::size_t>(m)];
  }
  (void)par;
  return out;
}

Eigen::MatrixXcd conj_product(const Eigen::MatrixXcd& a,
                              const Eigen::MatrixXcd& b, Exec exec) {
  apply_thread_cap();
  const int rows = static_cast<int>(a.cols());
  const int cols = static_cast<int>(b.cols());
  const int inner = static_cast<int>(a.rows());
  Eigen::MatrixXcd out(rows, cols);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) collapse(2) if (par)
#endif
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < inner; ++k) {
        acc += std::conj(a(k, i)) * b(k, j);
      }
      out(i, j) = acc;
    }
  }
  (void)par;
  return out;
}

double projection_residual_norm_sq(const Eigen::VectorXcd& values,
                                   const Eigen::VectorXcd& moments,
                                   const DiskQuadrature& quad,
                                   const std::vector<double>& norms,
                                   Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const int n = quad.angular_count;
  const int cap = static_cast<int>(moments.size());
  // Scaled coefficients so the reconstruction is a plain polynomial in w.
  Eigen::VectorXcd scaled(cap);
  for (int m = 0; m < cap; ++m) {
    scaled(m) = moments(m) / norms[static_cast<std::size_t>(m)];
  }
  std::vector<double> ring_sums(static_cast<std::size_t>(rings), 0.0);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int i = 0; i < rings; ++i) {
    double acc = 0.0;
    const cplx* v = values.data() + static_cast<std::ptrdiff_t>(i) * n;
    for (int l = 0; l < n; ++l) {
      const cplx w = quad.node(i, l);
      cplx rec = 0.0;
      for (int m = cap; m-- > 0;) rec = rec * w + scaled(m);
      acc += std::norm(v[l] - rec);
    }
    ring_sums[static_cast<std::size_t>(i)] = acc;
  }
  (void)par;
  double total = 0.0;
  for (int i = 0; i < rings; ++i) {
    total += quad.node_weight(i) * ring_sums[static_cast<std::size_t>(i)];
  }
  return total;
}

Eigen::MatrixXcd residual_gram(const Eigen::VectorXcd& f_values,
                               const Eigen::MatrixXcd& coeffs,
                               const DiskQuadrature& quad, int n_cols,
                               const std::vector<double>& norms, Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const int n = quad.angular_count;
  const int np = static_cast<int>(coeffs.rows());
  std::vector<Eigen::MatrixXcd> ring_grams(
      static_cast<std::size_t>(rings));
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int i = 0; i < rings; ++i) {
    Eigen::MatrixXcd vmat(n, n_cols);  // residual values, angular major
    Eigen::VectorXcd pow(np);
    const cplx* fv = f_values.data() + static_cast<std::ptrdiff_t>(i) * n;
    for (int l = 0; l < n; ++l) {
      const cplx w = quad.node(i, l);
      cplx acc(1.0, 0.0);
      for (int m = 0; m < np; ++m) {
        pow(m) = acc / norms[static_cast<std::size_t>(m)];
        acc *= w;
      }
      for (int j = 0; j < n_cols; ++j) {
        cplx rec = 0.0;
        for (int m = 0; m < np; ++m) rec += coeffs(m, j) * pow(m);
        vmat(l, j) = fv[l] * pow(j) - rec;
      }
    }
    Eigen::MatrixXcd gram(n_cols, n_cols);
    for (int jj = 0; jj < n_cols; ++jj) {
      for (int ii = 0; ii < n_cols; ++ii) {
        cplx acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += vmat(l, jj) * std::conj(vmat(l, ii));
        }
        gram(ii, jj) = acc * quad.node_weight(i);
      }
    }
    ring_grams[static_cast<std::size_t>(i)] = std::move(gram);
  }
  (void)par;
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n_cols, n_cols);
  for (int i = 0; i < rings; ++i) {
    total += ring_grams[static_cast<std::size_t>(i)];
  }
  return total;
}

double weighted_norm_sq(const Eigen::VectorXcd& values,
                        const DiskQuadrature& quad, Exec exec) {
  apply_thread_cap();
  const int rings = quad.ring_count();
  const int n = quad.angular_count;
  std::vector<double> ring_sums(static_cast<std::size_t>(rings), 0.0);
  const bool par = use_parallel(exec);
#ifdef BLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (int i = 0; i < rings; ++i) {
    double acc = 0.0;
    const cplx* v = values.data() + static_cast<std::ptrdiff_t>(i) * n;
    for (int l = 0; l < n; ++l) acc += std::norm(v[l]);
    ring_sums[static_cast<std::size_t>(i)] = acc;
  }
  (void)par;
  double total = 0.0;
  for (int i = 0; i < rings; ++i) {
    total += quad.node_weight(i) * ring_sums[static_cast<std::size_t>(i)];
  }
  return total;
}

}  // namespace blab::kernels
