#ifndef BLAB_SYMBOLS_HPP
#define BLAB_SYMBOLS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "blab/space.hpp"

namespace blab {

/// A bounded function on the closed disk with evaluation semantics plus
/// certificates. Immutable after construction; safe to share across threads.
struct Symbol {
  std::function<cplx(cplx)> eval;
  double sup_bound = 1.0;
  // If set, eval(z) == 0 exactly for |z| >= vanishes_beyond.
  std::optional<double> vanishes_beyond;
  bool harmonic = false;
  std::string provenance;
  // Set for polynomial symbols; enables closed-form section assembly.
  std::shared_ptr<const MonomialCoeffs> poly;
  // Raised when a mollification's quadrature self-estimate is poor.
  bool accuracy_warning = false;

  cplx operator()(cplx z) const { return eval(z); }
};

/// Constructs a symbol and spot-checks |eval| <= sup_bound on a coarse grid.
Symbol make_symbol(std::function<cplx(cplx)> eval, double sup_bound,
                   std::string provenance,
                   std::optional<double> vanishes_beyond = std::nullopt,
                   bool harmonic = false);

Symbol make_polynomial_symbol(const MonomialCoeffs& coeffs, double sup_bound,
                              std::string provenance, bool harmonic = false);

/// The bump delta(z) = c exp(-1/(1-|z|^2)) on |z| < 1, zero outside;
/// c makes int delta dA = 1 against normalized area measure.
struct MollifierSpec {
  double epsilon = 0.1;
  double normalization = 0.0;  // c, precomputed at construction

  static MollifierSpec make(double epsilon);
};

/// Local polar rule resolution for evaluating delta_eps * f.
struct MollifyResolution {
  int radial = 24;
  int angular = 64;
};

/// f_r: f on |z| < r, zero outside.
Symbol truncate(const Symbol& f, double r);

/// delta_eps * f with f extended by zero outside the disk. The result
/// evaluates by a local polar rule over the window |w - z| < eps whose
/// weights are normalized to unit mass.
Symbol mollify(const Symbol& f, const MollifierSpec& spec,
               MollifyResolution res = {});

/// z -> f(r z). Preserves the sup bound and the harmonic flag.
Symbol dilate(const Symbol& f, double r);

struct BoundaryCheck {
  bool vanishes = false;
  double max_abs = 0.0;
};

/// max |f| over a dense angular sample of the ring |z| = ring, compared to
/// tol. Exact-support symbols short-circuit.
BoundaryCheck boundary_vanishing_check(const Symbol& f, double ring, double tol,
                                       int samples = 1024);

/// Max over sampled |z| <= rmax of the undivided five-point stencil
/// |f(z+h)+f(z-h)+f(z+ih)+f(z-ih)-4f(z)| (about h^2 * Laplacian).
double max_laplacian_residual(const Symbol& f, double h = 1e-3,
                              double rmax = 0.8, int samples = 64);

/// Named test symbols: "one", "z", "conj-z", "conj-z2", "z-conj-z",
/// "sector", "one-minus-abs2", "harmonic-arg", "re-z", "radial-osc".
const std::map<std::string, Symbol>& test_symbol_library();

/// Parses chained specs such as "mollify:eps=0.05/truncate:r=0.9/sector".
/// The rightmost element names a library symbol; transformations apply
/// right to left.
Symbol parse_symbol_spec(const std::string& spec);

/// Grid-cache record {grid_id, values[] as (re, im) pairs}.
std::string grid_cache_to_json(const std::string& grid_id,
                               const std::vector<cplx>& values);
std::pair<std::string, std::vector<cplx>> grid_cache_from_json(
    const std::string& text);

}  // namespace blab

#endif  // BLAB_SYMBOLS_HPP
