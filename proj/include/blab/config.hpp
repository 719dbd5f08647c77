#ifndef BLAB_CONFIG_HPP
#define BLAB_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace blab {

/// Raised on malformed or out-of-range configuration; mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat dotted-key experiment configuration. Grammar: one `key = value` pair
/// per line, `#` comments, no nesting. Lists are comma-separated.
struct ExperimentConfig {
  double alpha = 0.0;
  std::string symbol = "sector";

  int n = 32;               // space.n
  int fourier_cap = -1;     // space.fourier_cap (-1: derived)
  int radial_cap = 8;       // space.radial_cap

  int quad_degree = -1;     // quad.degree (-1: derived from caps)
  int quad_radial_min = 0;  // quad.radial_min
  int quad_angular_min = 0; // quad.angular_min
  int proj_cap = 0;         // proj.cap (0: adaptive/default)

  std::string operator_kind = "hankel";              // operator.kind
  std::string family_kind = "mollified-truncation";  // family.kind
  int family_m = 6;                                  // family.M
  double schedule_r0 = 0.5;                          // schedule.r0
  double schedule_ratio = 0.5;                       // schedule.ratio

  std::vector<double> radii = {0.9, 0.95, 0.99, 0.995};  // estimator.radii
  std::vector<int> caps;                                 // estimator.caps
  int estimator_angles = 16;                             // estimator.angles

  int search_max_iters = 300;   // search.max_iters
  double search_tol = 1e-7;     // search.tol

  std::vector<std::string> sot_vectors = {"e0", "e1", "e4", "rand8"};

  std::string out_dir;          // out.dir
  std::uint64_t seed = 1;       // seed

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
  std::string serialize() const;
  void validate() const;

  /// Caps defaulted to k*N/8, k = 1..7, when estimator.caps is absent.
  std::vector<int> effective_caps() const;
  int effective_fourier_cap() const;
  /// Schedule r_n = 1 - (1 - r0) * ratio^{n-1}, eps_n = (1 - r_n)/2.
  std::vector<std::pair<double, double>> schedule(bool with_eps) const;
};

}  // namespace blab

#endif  // BLAB_CONFIG_HPP
