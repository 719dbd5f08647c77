#ifndef BLAB_SPACE_HPP
#define BLAB_SPACE_HPP

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blab {

using cplx = std::complex<double>;

// Tolerances used throughout the space module. The underlying identities are
// exact; these pin what "exact" means in double precision.
inline constexpr double kQuadExactnessTol = 1e-12;
inline constexpr double kMassTol = 1e-13;
inline constexpr double kGramTol = 1e-10;

/// Weight exponent and truncation caps for A^2_alpha and its polynomial
/// discretization.
struct SpaceParams {
  double alpha = 0.0;   // weight exponent, requires alpha > -1
  int n_analytic = 16;  // number of analytic basis functions e_0..e_{N-1}
  int fourier_cap = 0;  // max |Fourier mode| for L^2 polynomial elements
  int radial_cap = 0;   // max radial degree t per mode

  void validate() const;
  // Hankel assembly additionally needs products f*e_j representable.
  void validate_for_hankel() const;
};

/// Tensor-product rule integrating against dA_alpha on the unit disk.
/// Radial part: Gauss-Jacobi in u = r^2 for the weight (1+alpha)(1-u)^alpha;
/// angular part: uniform angles theta_l = 2*pi*l/angular_count.
struct DiskQuadrature {
  double alpha = 0.0;
  std::vector<double> radial_nodes;    // r_i in (0,1), ascending
  std::vector<double> radial_weights;  // positive, sum to 1
  int angular_count = 0;
  int exactness_degree = 0;  // max j+k with exact monomial integrals

  int ring_count() const { return static_cast<int>(radial_nodes.size()); }
  std::size_t node_count() const {
    return radial_nodes.size() * static_cast<std::size_t>(angular_count);
  }
  cplx node(int ring, int l) const;
  double node_weight(int ring) const {
    return radial_weights[static_cast<std::size_t>(ring)] / angular_count;
  }
  // Apply the rule to z^j conj(z)^k.
  cplx integrate_monomial(int j, int k) const;

  std::string to_json() const;
  static DiskQuadrature from_json(const std::string& text);
};

/// int_D z^j conj(z)^k dA_alpha: zero off the diagonal, else
/// Gamma(j+1)Gamma(2+alpha)/Gamma(j+2+alpha). Evaluated in log space.
double monomial_integral(int j, int k, double alpha);

/// <z^j conj(z)^k, z^p conj(z)^q>_alpha = monomial_integral(j+q, k+p, alpha).
double inner_monomials(int j, int k, int p, int q, double alpha);

/// ||z^k||_{2,alpha}; e_k = z^k / analytic_basis_norm(k, alpha).
double analytic_basis_norm(int k, double alpha);

/// Norms for k = 0..count-1.
std::vector<double> analytic_basis_norms(int count, double alpha);

/// Builds a rule with exactness_degree >= target_degree, verified
/// constructively against the closed form during construction.
/// min_radial / min_angular request extra resolution for rough symbols.
DiskQuadrature build_quadrature(const SpaceParams& params, int target_degree,
                                int min_radial = 0, int min_angular = 0);

/// K_alpha(z,w) = (1 - z*conj(w))^{-(2+alpha)}, principal branch.
cplx reproducing_kernel(cplx z, cplx w, double alpha);

/// Finite linear combination of monomials z^p conj(z)^q.
struct MonomialCoeffs {
  std::map<std::pair<int, int>, cplx> entries;

  MonomialCoeffs() = default;
  static MonomialCoeffs monomial(int p, int q, cplx coeff = 1.0);
  static MonomialCoeffs analytic(const std::vector<cplx>& coeffs);  // sum c_k z^k

  MonomialCoeffs& add(int p, int q, cplx coeff);
  cplx eval(cplx z) const;
  bool within_caps(const SpaceParams& params) const;
  int max_total_degree() const;

  MonomialCoeffs operator+(const MonomialCoeffs& other) const;
  MonomialCoeffs operator*(const MonomialCoeffs& other) const;
  MonomialCoeffs scaled(cplx s) const;
  MonomialCoeffs conjugated() const;
};

/// <u, v>_alpha via the closed monomial forms.
cplx inner(const MonomialCoeffs& u, const MonomialCoeffs& v, double alpha);

/// Action of the Bergman projection P_alpha on polynomials:
/// P_alpha(z^p conj(z)^q) = (mu_p / mu_{p-q}) z^{p-q} for p >= q, else 0,
/// with mu_k = monomial_integral(k, k, alpha).
MonomialCoeffs project(const MonomialCoeffs& coeffs, const SpaceParams& params);

}  // namespace blab

#endif  // BLAB_SPACE_HPP
