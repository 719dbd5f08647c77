#include "blab/space.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace blab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_alpha(double alpha) {
  if (!(alpha > -1.0)) {
    throw std::domain_error("weight exponent must satisfy alpha > -1, got " +
                            std::to_string(alpha));
  }
}

// Golub-Welsch nodes/weights for the Jacobi weight (1-x)^alpha on (-1,1)
// (beta = 0). Returns nodes ascending.
void gauss_jacobi(int n, double alpha, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  const double beta = 0.0;
  Eigen::VectorXd diag(n), subdiag(n - 1 > 0 ? n - 1 : 0);
  const double ab = alpha + beta;
  diag(0) = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double d = 2.0 * k + ab;
    diag(k) = (beta * beta - alpha * alpha) / (d * (d + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    double c;
    if (k == 1) {
      c = 4.0 * (alpha + 1.0) * (beta + 1.0) /
          ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    } else {
      const double d = 2.0 * k + ab;
      c = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
          (d * d * (d + 1.0) * (d - 1.0));
    }
    subdiag(k - 1) = std::sqrt(c);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("Gauss-Jacobi tridiagonal eigensolve failed");
  }
  // mu0 = int_{-1}^{1} (1-x)^alpha dx = 2^{alpha+1}/(alpha+1)
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

}  // namespace

void SpaceParams::validate() const {
  require_alpha(alpha);
  if (n_analytic < 1) {
    throw std::invalid_argument("n_analytic must be >= 1");
  }
  if (fourier_cap < 0 || radial_cap < 0) {
    throw std::invalid_argument("fourier_cap and radial_cap must be >= 0");
  }
}

void SpaceParams::validate_for_hankel() const {
  validate();
  if (fourier_cap < n_analytic - 1) {
    throw std::invalid_argument(
        "fourier_cap must be >= n_analytic - 1 for Hankel assembly");
  }
}

cplx DiskQuadrature::node(int ring, int l) const {
  const double theta = 2.0 * kPi * l / angular_count;
  return std::polar(radial_nodes[static_cast<std::size_t>(ring)], theta);
}

cplx DiskQuadrature::integrate_monomial(int j, int k) const {
  // Angular part is exact: (1/n) sum_l e^{i(j-k)theta_l} is 1 when
  // (j-k) % n == 0 and 0 otherwise.
  const int m = j - k;
  if (m % angular_count != 0) return 0.0;
  double radial = 0.0;
  for (std::size_t i = 0; i < radial_nodes.size(); ++i) {
    radial += radial_weights[i] * std::pow(radial_nodes[i], j + k);
  }
  return radial;
}

double monomial_integral(int j, int k, double alpha) {
  require_alpha(alpha);
  if (j < 0 || k < 0) throw std::invalid_argument("monomial powers must be >= 0");
  if (j != k) return 0.0;
  return std::exp(std::lgamma(j + 1.0) + std::lgamma(2.0 + alpha) -
                  std::lgamma(j + 2.0 + alpha));
}

double inner_monomials(int j, int k, int p, int q, double alpha) {
  require_alpha(alpha);
  return monomial_integral(j + q, k + p, alpha);
}

double analytic_basis_norm(int k, double alpha) {
  return std::sqrt(monomial_integral(k, k, alpha));
}

std::vector<double> analytic_basis_norms(int count, double alpha) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = analytic_basis_norm(k, alpha);
  return out;
}

DiskQuadrature build_quadrature(const SpaceParams& params, int target_degree,
                                int min_radial, int min_angular) {
  params.validate();
  if (target_degree < 0) throw std::invalid_argument("target_degree must be >= 0");

  // Monomial z^j conj(z)^j has u-degree j <= target_degree/2; a Q-point Gauss
  // rule is exact through u-degree 2Q-1.
  int q_radial = std::max({target_degree / 4 + 2, min_radial, 2});
  int n_angular = std::max({target_degree + 1, min_angular, 4});

  DiskQuadrature quad;
  quad.alpha = params.alpha;
  quad.angular_count = n_angular;
  quad.exactness_degree = target_degree;

  std::vector<double> x, w;
  gauss_jacobi(q_radial, params.alpha, x, w);
  quad.radial_nodes.resize(x.size());
  quad.radial_weights.resize(x.size());
  const double scale =
      (1.0 + params.alpha) * std::pow(2.0, -(params.alpha + 1.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = 0.5 * (x[i] + 1.0);
    quad.radial_nodes[i] = std::sqrt(u);
    quad.radial_weights[i] = scale * w[i];
  }

  // Constructive verification against the closed form.
  double mass = 0.0;
  for (double wi : quad.radial_weights) mass += wi;
  if (std::abs(mass - 1.0) > kMassTol) {
    throw std::runtime_error("quadrature mass check failed: |sum w - 1| = " +
                             std::to_string(std::abs(mass - 1.0)));
  }
  for (int j = 0; j + 0 <= target_degree; ++j) {
    for (int k = 0; j + k <= target_degree; ++k) {
      const cplx got = quad.integrate_monomial(j, k);
      const double want = monomial_integral(j, k, params.alpha);
      if (std::abs(got - want) > kQuadExactnessTol) {
        throw std::runtime_error(
            "quadrature exactness check failed at (j,k)=(" + std::to_string(j) +
            "," + std::to_string(k) + "), residual " +
            std::to_string(std::abs(got - want)));
      }
    }
  }
  return quad;
}

std::string DiskQuadrature::to_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["radial_nodes"] = radial_nodes;
  j["radial_weights"] = radial_weights;
  j["angular_count"] = angular_count;
  j["exactness_degree"] = exactness_degree;
  return j.dump(2);
}

DiskQuadrature DiskQuadrature::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DiskQuadrature q;
  q.alpha = j.at("alpha").get<double>();
  q.radial_nodes = j.at("radial_nodes").get<std::vector<double>>();
  q.radial_weights = j.at("radial_weights").get<std::vector<double>>();
  q.angular_count = j.at("angular_count").get<int>();
  q.exactness_degree = j.at("exactness_degree").get<int>();
  return q;
}

cplx reproducing_kernel(cplx z, cplx w, double alpha) {
  require_alpha(alpha);
  if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0) {
    throw std::domain_error("reproducing_kernel requires |z| < 1 and |w| < 1");
  }
  // 1 - z*conj(w) has positive real part on the disk; the principal branch
  // never crosses the cut.
  const cplx base = 1.0 - z * std::conj(w);
  return std::pow(base, cplx(-(2.0 + alpha), 0.0));
}

MonomialCoeffs MonomialCoeffs::monomial(int p, int q, cplx coeff) {
  MonomialCoeffs c;
  c.add(p, q, coeff);
  return c;
}

MonomialCoeffs MonomialCoeffs::analytic(const std::vector<cplx>& coeffs) {
  MonomialCoeffs c;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    c.add(static_cast<int>(k), 0, coeffs[k]);
  }
  return c;
}

MonomialCoeffs& MonomialCoeffs::add(int p, int q, cplx coeff) {
  if (p < 0 || q < 0) throw std::invalid_argument("monomial powers must be >= 0");
  if (coeff != cplx(0.0)) entries[{p, q}] += coeff;
  return *this;
}

cplx MonomialCoeffs::eval(cplx z) const {
  cplx acc = 0.0;
  for (const auto& [pq, c] : entries) {
    acc += c * std::pow(z, pq.first) * std::pow(std::conj(z), pq.second);
  }
  return acc;
}

bool MonomialCoeffs::within_caps(const SpaceParams& params) const {
  for (const auto& [pq, c] : entries) {
    const int mode = pq.first - pq.second;
    const int t = std::min(pq.first, pq.second);
    if (std::abs(mode) > params.fourier_cap || t > params.radial_cap) {
      return false;
    }
  }
  return true;
}

int MonomialCoeffs::max_total_degree() const {
  int deg = 0;
  for (const auto& [pq, c] : entries) deg = std::max(deg, pq.first + pq.second);
  return deg;
}

MonomialCoeffs MonomialCoeffs::operator+(const MonomialCoeffs& other) const {
  MonomialCoeffs out = *this;
  for (const auto& [pq, c] : other.entries) out.add(pq.first, pq.second, c);
  return out;
}

MonomialCoeffs MonomialCoeffs::operator*(const MonomialCoeffs& other) const {
  MonomialCoeffs out;
  for (const auto& [pq, c] : entries) {
    for (const auto& [rs, d] : other.entries) {
      out.add(pq.first + rs.first, pq.second + rs.second, c * d);
    }
  }
  return out;
}

MonomialCoeffs MonomialCoeffs::scaled(cplx s) const {
  MonomialCoeffs out;
  for (const auto& [pq, c] : entries) out.add(pq.first, pq.second, c * s);
  return out;
}

MonomialCoeffs MonomialCoeffs::conjugated() const {
  MonomialCoeffs out;
  for (const auto& [pq, c] : entries) out.add(pq.second, pq.first, std::conj(c));
  return out;
}

cplx inner(const MonomialCoeffs& u, const MonomialCoeffs& v, double alpha) {
  cplx acc = 0.0;
  for (const auto& [pq, c] : u.entries) {
    for (const auto& [rs, d] : v.entries) {
      acc += c * std::conj(d) *
             inner_monomials(pq.first, pq.second, rs.first, rs.second, alpha);
    }
  }
  return acc;
}

MonomialCoeffs project(const MonomialCoeffs& coeffs, const SpaceParams& params) {
  params.validate();
  MonomialCoeffs out;
  for (const auto& [pq, c] : coeffs.entries) {
    const int p = pq.first, q = pq.second;
    if (p < q) continue;
    const double ratio = monomial_integral(p, p, params.alpha) /
                         monomial_integral(p - q, p - q, params.alpha);
    out.add(p - q, 0, c * ratio);
  }
  return out;
}

}  // namespace blab
