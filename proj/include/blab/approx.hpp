#ifndef BLAB_APPROX_HPP
#define BLAB_APPROX_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "blab/operators.hpp"
#include "blab/space.hpp"
#include "blab/symbols.hpp"

namespace blab {

enum class FamilyKind { mollified_truncation, harmonic_dilation };

/// The compact-approximant family psi_n. Mollified truncations carry exact
/// support certificates r_n + eps_n < 1; dilation members stay harmonic.
struct ApproximantFamily {
  Symbol base;
  std::vector<Symbol> members;
  // (r_n, eps_n); eps is 0 for dilation families.
  std::vector<std::pair<double, double>> schedule;
  FamilyKind kind = FamilyKind::mollified_truncation;
};

/// Default schedule r_n = 1 - 2^{-n}, eps_n = (1 - r_n)/2. Schedules with
/// 1 - r_n <= eps_n are rejected outright.
ApproximantFamily build_family(
    const Symbol& f, int count, FamilyKind kind,
    const std::vector<std::pair<double, double>>* schedule_override = nullptr,
    MollifyResolution res = {});

/// Nonnegative weights summing to 1.
struct SimplexWeights {
  std::vector<double> a;

  void validate() const;
  static SimplexWeights uniform(int count);
  static SimplexWeights vertex(int count, int index);
};

SimplexWeights interpolate(const SimplexWeights& w1, const SimplexWeights& w2,
                           double s);

enum class OperatorKind { hankel, hankel_adjoint, toeplitz, toeplitz_adjoint };

struct SotRow {
  int n = 0;
  std::string vector_id;
  double residual = 0.0;
};

struct SotReport {
  OperatorKind kind = OperatorKind::hankel;
  std::vector<SotRow> rows;

  double residual(int n, const std::string& id) const;
  std::string to_json() const;
  std::string to_csv() const;
  std::string to_text() const;  // aligned columns for humans
};

/// Analytic test vector sum_k coeffs[k] z^k.
struct TestVector {
  std::string id;
  std::vector<cplx> coeffs;
};

/// e_0, e_1, e_4 and a seeded unit-norm polynomial of degree 8.
std::vector<TestVector> default_test_vectors(const SpaceParams& params,
                                             std::uint64_t seed);

/// Precomputed section pieces for f and a family at common parameters.
/// C_u holds <u e_j, e_m> (N_P x N); G(u,v) = B(u,v) - C_u^H C_v is the
/// sesquilinear Gram so that G(d,d) is the Hankel Gram of the symbol d.
/// The top N rows of C_u are the Toeplitz section of u.
class FamilyWorkspace {
 public:
  static FamilyWorkspace build(const Symbol& f, const ApproximantFamily& family,
                               const SpaceParams& params,
                               const DiskQuadrature& quad, int proj_cap = 0,
                               kernels::Exec exec = kernels::Exec::parallel);

  int member_count() const { return static_cast<int>(c_members_.size()); }
  int n() const { return params_.n_analytic; }
  int projection_cap() const { return proj_cap_; }
  const SpaceParams& params() const { return params_; }

  /// Hankel Gram of d = f - sum a_m psi_m, restricted to the leading
  /// n_sub x n_sub block and the first m_sub members.
  Eigen::MatrixXcd difference_gram(const std::vector<double>& a, int m_sub,
                                   int n_sub) const;
  /// Toeplitz section of the same difference symbol.
  Eigen::MatrixXcd difference_toeplitz(const std::vector<double>& a, int m_sub,
                                       int n_sub) const;
  /// Hankel Gram of phi = sum a_m psi_m alone (members only).
  Eigen::MatrixXcd member_gram(const std::vector<double>& a, int m_sub,
                               int n_sub) const;
  /// C matrix of the difference symbol (projection coefficients).
  Eigen::MatrixXcd difference_c(const std::vector<double>& a, int m_sub) const;

  const Eigen::MatrixXcd& c_f() const { return c_f_; }
  const Eigen::MatrixXcd& c_member(int m) const { return c_members_[m]; }
  /// Grid values used during assembly (same quadrature as build()).
  const Eigen::VectorXcd& f_values() const { return values_[0]; }
  const Eigen::VectorXcd& member_values(int m) const {
    return values_[static_cast<std::size_t>(m) + 1];
  }
  const Eigen::MatrixXcd& g_ff() const { return g_ff_; }
  const Eigen::MatrixXcd& g_f_member(int m) const { return g_f_members_[m]; }
  const Eigen::MatrixXcd& g_members(int m, int l) const;  // m <= l

 private:
  SpaceParams params_;
  int proj_cap_ = 0;
  std::vector<Eigen::VectorXcd> values_;  // f first, then members
  Eigen::MatrixXcd c_f_;
  std::vector<Eigen::MatrixXcd> c_members_;
  Eigen::MatrixXcd g_ff_;
  std::vector<Eigen::MatrixXcd> g_f_members_;
  std::vector<Eigen::MatrixXcd> g_members_;  // upper triangle, row-major
};

/// Convex objective J(a) = ||section(H_{f - sum a psi})|| (or Toeplitz) on
/// the simplex, with subgradients from the top singular pair.
class DistanceObjective {
 public:
  DistanceObjective(const FamilyWorkspace& ws, OperatorFamily kind, int m_sub,
                    int n_sub);

  int dimension() const { return m_sub_; }
  double value(const std::vector<double>& a) const;
  double value_and_grad(const std::vector<double>& a,
                        std::vector<double>& grad) const;

 private:
  const FamilyWorkspace& ws_;
  OperatorFamily kind_;
  int m_sub_;
  int n_sub_;
};

struct SearchOptions {
  int max_iters = 300;
  double tol = 1e-7;          // Frank-Wolfe dual gap target
  int line_search_evals = 48;
  int polish_sweeps = 4;      // pairwise segment sweeps after FW
};

struct SearchResult {
  SimplexWeights weights;
  double value = 0.0;
  double dual_gap = 0.0;
  bool converged = false;
  // (iteration, J, dual gap)
  std::vector<std::array<double, 3>> trace;
};

/// Frank-Wolfe with away steps and exact (golden-section) line search.
SearchResult simplex_search(const DistanceObjective& objective,
                            const SimplexWeights& start,
                            const SearchOptions& opts = {});

/// Convenience wrapper: builds the workspace, runs from the uniform start
/// and from every vertex, returns the best result.
SearchResult simplex_search(const Symbol& f, const ApproximantFamily& family,
                            OperatorFamily kind, const SpaceParams& params,
                            const DiskQuadrature& quad,
                            const SearchOptions& opts = {});

/// Residual tables for strong-operator-topology convergence checks.
/// hankel:  ||(H_f - H_psi) g|| computed as the projection defect of (f-psi)g
/// toeplitz:||P((f-psi) g)||
/// adjoints: Gram-identity residuals ||M_d g|| and ||C_d^H C_d g||.
SotReport sot_report(const Symbol& f, const ApproximantFamily& family,
                     const std::vector<TestVector>& vectors, OperatorKind kind,
                     const SpaceParams& params, const DiskQuadrature& quad,
                     const FamilyWorkspace* ws = nullptr,
                     kernels::Exec exec = kernels::Exec::parallel);

struct DistanceCertificate {
  double value = 0.0;       // J(weights)
  double lower = 0.0;       // essential-norm lower estimate
  double upper = 0.0;       // essential-norm upper estimate
  double gap = 0.0;         // value - lower
  double vertex_min = 0.0;  // min_m J(e_m)
  BoundaryCheck boundary;   // of phi = sum a psi at ring 1.0
  // N -> singular values of the section of H_phi (or T_phi): compactness probe
  std::vector<std::pair<int, std::vector<double>>> sigma_tails;
  bool lower_consistent = true;  // lower - tol <= value

  std::string to_json() const;
  std::string sigma_csv() const;  // columns N,index,sigma
};

DistanceCertificate distance_certificate(
    const Symbol& f, const ApproximantFamily& family,
    const SimplexWeights& weights, OperatorFamily kind,
    const SpaceParams& params, const DiskQuadrature& quad,
    const FamilyWorkspace* ws = nullptr,
    const EssentialNormEstimate* estimate = nullptr);

}  // namespace blab

#endif  // BLAB_APPROX_HPP
