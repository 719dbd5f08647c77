#ifndef BLAB_OPERATORS_HPP
#define BLAB_OPERATORS_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "blab/kernels.hpp"
#include "blab/space.hpp"
#include "blab/symbols.hpp"

namespace blab {

enum class SectionKind { toeplitz, hankel_gram, hankel_explicit };

/// Dense finite-section matrix together with the parameters that produced it.
struct FiniteSection {
  Eigen::MatrixXcd matrix;
  SectionKind kind = SectionKind::toeplitz;
  SpaceParams params;
  std::string symbol_provenance;
  std::string domain_label;
  std::string codomain_label;
  // hankel_gram diagnostics
  double asymmetry = 0.0;      // max |G - G^H| before symmetrization
  int projection_cap = 0;      // analytic cap N_P used for P(f e_j)
  bool cap_warning = false;    // adaptive cap did not settle
  bool psd_warning = false;    // eigenvalue below -1e-9 * ||G||
  bool exactness_warning = false;  // quadrature degree below 2(N-1)

  std::string to_json() const;
};

/// Entries <f e_j, e_k>_alpha for j,k < N.
FiniteSection toeplitz_section(const Symbol& f, const SpaceParams& params,
                               const DiskQuadrature& quad,
                               kernels::Exec exec = kernels::Exec::parallel);

// Construction route for the Hankel Gram.
//   residual: Gram of the pointwise residuals (I-P)(f e_j) on the grid;
//             positive semidefinite by construction and accurate down to
//             ~1e-16 when the Hankel section is near zero (analytic f).
//   fast:     B - C^H C; cheaper for large sections but with a ~sqrt(eps)
//             noise floor from the cancellation.
//   auto_select: residual when grid*N_P*N is small enough, else fast.
enum class GramMethod { auto_select, residual, fast };

/// Gram matrix G_ij = <(I-P)(f e_j), (I-P)(f e_i)> with the projection
/// truncated at an analytic cap N_P. proj_cap = 0 requests the adaptive
/// policy (start at N+16, double until the Frobenius shift is < 1e-9,
/// cap at 8N).
FiniteSection hankel_gram_section(const Symbol& f, const SpaceParams& params,
                                  const DiskQuadrature& quad, int proj_cap = 0,
                                  kernels::Exec exec = kernels::Exec::parallel,
                                  GramMethod method = GramMethod::auto_select);

/// Explicit coordinates of (I-P)(f e_j) in the orthonormal complement basis
/// built by per-Fourier-mode Gram-Schmidt from {z^{m+t} conj(z)^t}. Closed
/// Gamma forms only; requires a polynomial symbol. Cross-check oracle for
/// the Gram construction at small N.
FiniteSection hankel_explicit_section(const Symbol& f, const SpaceParams& params);

/// Largest singular value (for hankel_gram: sqrt of the top eigenvalue).
double operator_norm(const FiniteSection& s);

/// Descending singular values (hankel_gram: eigenvalue square roots).
std::vector<double> singular_values(const FiniteSection& s);

/// Disk automorphism phi_z(w) = (z - w) / (1 - conj(z) w).
cplx mobius(cplx z, cplx w);

struct BerezinProbe {
  double hankel_defect = 0.0;  // ||(I-P)(f o phi_z)||
  double hankel_kz = 0.0;      // ||H_f k_z|| with k_z the normalized kernel
  double toeplitz = 0.0;       // ||P(f o phi_z)||
  bool cap_warning = false;    // defect moved > 1e-4 between N_P and 2 N_P
};

BerezinProbe berezin_probe(const Symbol& f, cplx z, const SpaceParams& params,
                           const DiskQuadrature& quad, int proj_cap = 0,
                           kernels::Exec exec = kernels::Exec::parallel);

double berezin_hankel_defect(const Symbol& f, cplx z, const SpaceParams& params,
                             const DiskQuadrature& quad, int proj_cap = 0);
double berezin_toeplitz(const Symbol& f, cplx z, const SpaceParams& params,
                        const DiskQuadrature& quad, int proj_cap = 0);

enum class OperatorFamily { hankel, toeplitz };

struct EssentialNormEstimate {
  double lower = 0.0;
  double upper = 0.0;
  cplx lower_witness;
  int upper_witness = 0;
  // (radius, max defect over angles, max k_z probe over angles)
  std::vector<std::array<double, 3>> scan_lower;
  // (cap K, tail norm ||S (I - Q_K)||)
  std::vector<std::pair<int, double>> scan_upper;
  // Tenth-root shape of the lower functional: the known essential-norm
  // upper bound has this form with an unspecified constant.
  double upper_tenth_root_shape = 0.0;
  bool sandwich_consistent = true;
  bool cap_warning = false;

  std::string to_json() const;
};

inline constexpr double kSandwichReportTol = 5e-3;

struct EssnormOpts {
  int angles = 16;
  int proj_cap = 0;
  kernels::Exec exec = kernels::Exec::parallel;
};

/// Sandwich estimate: lower from the Berezin functional maximized over
/// sampled z (radii x angles), upper from tail compressions
/// min_K ||S (I - Q_K)|| of the largest-N finite section.
EssentialNormEstimate essential_norm_estimate(
    const Symbol& f, OperatorFamily kind, const std::vector<double>& radii,
    const std::vector<int>& caps, const SpaceParams& params,
    const DiskQuadrature& quad, const EssnormOpts& opts = {});

/// Singular-value CSV rows (index, sigma).
std::string singular_values_csv(const std::vector<double>& sv);

}  // namespace blab

#endif  // BLAB_OPERATORS_HPP
