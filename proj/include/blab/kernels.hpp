#ifndef BLAB_KERNELS_HPP
#define BLAB_KERNELS_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "blab/space.hpp"

namespace blab::kernels {

// Every kernel comes in a serial and an OpenMP flavor. Parallel versions
// split work over independent output entries only; each entry is accumulated
// in the same fixed index order as the serial version, so the two flavors
// produce bit-identical results for any thread count.
enum class Exec { serial, parallel };

/// Worker cap from BLAB_THREADS (0 = library default).
int thread_cap();

/// Values of f on the tensor grid, ring-major: out[ring*angular_count + l].
Eigen::VectorXcd grid_eval(const std::function<cplx(cplx)>& f,
                           const DiskQuadrature& quad, Exec exec);

/// Ring-mode table T(ring, m - m_min) = (1/n) sum_l V(ring,l) e^{i m theta_l}
/// for m in [m_min, m_max]. Twiddles come from an exact unit-root table.
Eigen::MatrixXcd ring_mode_table(const Eigen::VectorXcd& values,
                                 const DiskQuadrature& quad, int m_min,
                                 int m_max, Exec exec);

/// Moment matrix A(i,j) = <v e_j, e_i> assembled from a ring-mode table of v:
/// A(i,j) = (1/(nu_i nu_j)) sum_ring w_ring r^{i+j} T(ring, (j-i)-m_min).
/// The table must cover modes j-i for i < n_rows, j < n_cols.
Eigen::MatrixXcd moment_matrix(const Eigen::MatrixXcd& table, int m_min,
                               const DiskQuadrature& quad, int n_rows,
                               int n_cols, const std::vector<double>& norms,
                               Exec exec);

/// Analytic moments c_m = <v, e_m> for m = 0..cap-1 from a table covering
/// modes [-(cap-1), 0].
Eigen::VectorXcd analytic_moments(const Eigen::MatrixXcd& table, int m_min,
                                  const DiskQuadrature& quad, int cap,
                                  const std::vector<double>& norms, Exec exec);

/// A^H * B with fixed accumulation order per entry.
Eigen::MatrixXcd conj_product(const Eigen::MatrixXcd& a,
                              const Eigen::MatrixXcd& b, Exec exec);

/// ||v - sum_m moments[m] e_m||^2_w, evaluated pointwise on the grid. Unlike
/// the difference ||v||^2 - ||moments||^2 this form has no cancellation and
/// is nonnegative by construction.
double projection_residual_norm_sq(const Eigen::VectorXcd& values,
                                   const Eigen::VectorXcd& moments,
                                   const DiskQuadrature& quad,
                                   const std::vector<double>& norms, Exec exec);

/// Gram matrix M(i,j) = sum_q w_q v_j(q) conj(v_i(q)) of the residual
/// vectors v_j = f e_j - sum_m C(m,j) e_m on the grid. Positive semidefinite
/// by construction; accurate when the residuals are tiny.
Eigen::MatrixXcd residual_gram(const Eigen::VectorXcd& f_values,
                               const Eigen::MatrixXcd& coeffs,
                               const DiskQuadrature& quad, int n_cols,
                               const std::vector<double>& norms, Exec exec);

/// sum_q w_q |v_q|^2 with per-ring partials combined in ring order.
double weighted_norm_sq(const Eigen::VectorXcd& values,
                        const DiskQuadrature& quad, Exec exec);

}  // namespace blab::kernels

#endif  // BLAB_KERNELS_HPP
