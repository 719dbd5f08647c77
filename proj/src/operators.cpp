#include "blab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace blab {

namespace {

using kernels::Exec;

Eigen::MatrixXcd symbol_moment_table(const Eigen::VectorXcd& values,
                                     const DiskQuadrature& quad, int m_min,
                                     int m_max, Exec exec) {
  return kernels::ring_mode_table(values, quad, m_min, m_max, exec);
}

// Hankel Gram at projection cap np for given symbol values.
Eigen::MatrixXcd gram_at_cap(const Eigen::VectorXcd& values, int n, int np,
                             const DiskQuadrature& quad,
                             const std::vector<double>& norms, Exec exec,
                             GramMethod method) {
  if (method == GramMethod::auto_select) {
    const double cost = static_cast<double>(values.size()) * np * n;
    method = cost <= 2e9 ? GramMethod::residual : GramMethod::fast;
  }
  const auto table_f = symbol_moment_table(values, quad, -(np - 1), n - 1, exec);
  const Eigen::MatrixXcd c =
      kernels::moment_matrix(table_f, -(np - 1), quad, np, n, norms, exec);
  if (method == GramMethod::residual) {
    return kernels::residual_gram(values, c, quad, n, norms, exec);
  }
  Eigen::VectorXcd abs2(values.size());
  for (Eigen::Index q = 0; q < values.size(); ++q) abs2(q) = std::norm(values(q));
  const auto table_abs2 =
      symbol_moment_table(abs2, quad, -(n - 1), n - 1, exec);
  const Eigen::MatrixXcd b =
      kernels::moment_matrix(table_abs2, -(n - 1), quad, n, n, norms, exec);
  return b - kernels::conj_product(c, c, exec);
}

double max_abs(const Eigen::MatrixXcd& m) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      worst = std::max(worst, std::abs(m(i, j)));
    }
  }
  return worst;
}

}  // namespace

FiniteSection toeplitz_section(const Symbol& f, const SpaceParams& params,
                               const DiskQuadrature& quad, Exec exec) {
  params.validate();
  const int n = params.n_analytic;
  const auto norms = analytic_basis_norms(n, params.alpha);
  const auto values = kernels::grid_eval(f.eval, quad, exec);
  const auto table = symbol_moment_table(values, quad, -(n - 1), n - 1, exec);

  FiniteSection s;
  s.matrix = kernels::moment_matrix(table, -(n - 1), quad, n, n, norms, exec);
  s.kind = SectionKind::toeplitz;
  s.params = params;
  s.symbol_provenance = f.provenance;
  s.domain_label = "e_0..e_" + std::to_string(n - 1);
  s.codomain_label = s.domain_label;
  s.exactness_warning = quad.exactness_degree < 2 * (n - 1);
  return s;
}

FiniteSection hankel_gram_section(const Symbol& f, const SpaceParams& params,
                                  const DiskQuadrature& quad, int proj_cap,
                                  Exec exec, GramMethod method) {
  params.validate();
  const int n = params.n_analytic;
  const auto values = kernels::grid_eval(f.eval, quad, exec);

  int np = proj_cap > 0 ? proj_cap : n + 16;
  const int np_max = proj_cap > 0 ? proj_cap : 8 * n;
  std::vector<double> norms = analytic_basis_norms(np, params.alpha);
  Eigen::MatrixXcd gram = gram_at_cap(values, n, np, quad, norms, exec, method);
  bool settled = proj_cap > 0;
  while (!settled) {
    const int np2 = std::min(2 * np, np_max);
    if (np2 <= np) break;
    norms = analytic_basis_norms(np2, params.alpha);
    Eigen::MatrixXcd refined =
        gram_at_cap(values, n, np2, quad, norms, exec, method);
    const double shift = (refined - gram).norm();
    gram = std::move(refined);
    np = np2;
    if (shift < 1e-9 * std::max(1.0, gram.norm())) settled = true;
  }

  FiniteSection s;
  s.kind = SectionKind::hankel_gram;
  s.params = params;
  s.symbol_provenance = f.provenance;
  s.domain_label = "e_0..e_" + std::to_string(n - 1);
  s.codomain_label = s.domain_label + " (Gram of H*H)";
  s.projection_cap = np;
  s.cap_warning = !settled;
  s.asymmetry = max_abs(gram - gram.adjoint());
  s.matrix = 0.5 * (gram + Eigen::MatrixXcd(gram.adjoint()));
  s.exactness_warning = quad.exactness_degree < 2 * (n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.matrix,
                                                     Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(top, 1e-30)) {
    s.psd_warning = true;
  }
  return s;
}

FiniteSection hankel_explicit_section(const Symbol& f,
                                      const SpaceParams& params) {
  params.validate_for_hankel();
  if (!f.poly) {
    throw std::invalid_argument(
        "hankel_explicit_section requires a polynomial symbol");
  }
  const double alpha = params.alpha;
  const int n = params.n_analytic;
  const auto norms = analytic_basis_norms(n, alpha);

  // Products f * e_j as monomial coefficients.
  std::vector<MonomialCoeffs> products;
  products.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    products.push_back(
        f.poly->operator*(MonomialCoeffs::monomial(j, 0, 1.0 / norms[j])));
    if (!products.back().within_caps(params)) {
      throw std::invalid_argument(
          "fourier_cap/radial_cap cannot represent f*e_" + std::to_string(j));
    }
  }

  // Per-mode complement basis by Gram-Schmidt (Cholesky of the moment Gram).
  std::vector<MonomialCoeffs> complement;
  for (int m = -params.fourier_cap; m <= params.fourier_cap; ++m) {
    const int t_min = std::max(0, -m);
    const int t_max = params.radial_cap;
    if (t_max < t_min) continue;
    const int count = t_max - t_min + 1;
    Eigen::MatrixXd gram(count, count);
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        const int ta = t_min + a, tb = t_min + b;
        gram(a, b) = monomial_integral(m + ta + tb, m + ta + tb, alpha);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "Gram-Schmidt breakdown in mode " + std::to_string(m) +
          ": moment matrix not positive definite at radial_cap " +
          std::to_string(params.radial_cap) + "; reduce the cap");
    }
    const Eigen::MatrixXd lmat = llt.matrixL();
    const double cond = lmat(count - 1, count - 1) > 0.0
                            ? std::pow(lmat(0, 0) / lmat(count - 1, count - 1), 2)
                            : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) {
      throw std::runtime_error(
          "Gram-Schmidt breakdown: condition estimate exceeds 1e12 in mode " +
          std::to_string(m) + "; reduce radial_cap");
    }
    // Rows of L^{-1} give orthonormal combinations of the monomials.
    const Eigen::MatrixXd linv =
        lmat.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(count, count));
    // First vector in a mode with m >= 0 is the analytic e_m; skip it.
    const int first_complement = m >= 0 ? 1 : 0;
    for (int r = first_complement; r < count; ++r) {
      MonomialCoeffs u;
      for (int a = 0; a <= r; ++a) {
        const int t = t_min + a;
        u.add(m + t, t, linv(r, a));
      }
      complement.push_back(u);
    }
  }

  FiniteSection s;
  s.kind = SectionKind::hankel_explicit;
  s.params = params;
  s.symbol_provenance = f.provenance;
  s.domain_label = "e_0..e_" + std::to_string(n - 1);
  s.codomain_label = "per-mode Gram-Schmidt complement basis";
  s.matrix.resize(static_cast<Eigen::Index>(complement.size()), n);
  for (int j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < complement.size(); ++r) {
      s.matrix(static_cast<Eigen::Index>(r), j) =
          inner(products[static_cast<std::size_t>(j)], complement[r], alpha);
    }
  }
  return s;
}

double operator_norm(const FiniteSection& s) {
  const auto sv = singular_values(s);
  return sv.empty() ? 0.0 : sv.front();
}

std::vector<double> singular_values(const FiniteSection& s) {
  std::vector<double> out;
  if (s.kind == SectionKind::hankel_gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.matrix,
                                                       Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    out.resize(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      out[static_cast<std::size_t>(ev.size() - 1 - i)] =
          std::sqrt(std::max(ev(i), 0.0));
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(s.matrix);
    const auto& sv = svd.singularValues();
    out.assign(sv.data(), sv.data() + sv.size());
  }
  return out;
}

cplx mobius(cplx z, cplx w) {
  if (std::abs(z) >= 1.0) throw std::domain_error("mobius requires |z| < 1");
  if (std::abs(w) > 1.0 + 1e-14) {
    throw std::domain_error("mobius requires |w| <= 1");
  }
  const cplx den = 1.0 - std::conj(z) * w;
  if (den == cplx(0.0)) throw std::domain_error("mobius pole at w = 1/conj(z)");
  return (z - w) / den;
}

namespace {

struct DefectResult {
  double defect = 0.0;
  double toeplitz = 0.0;
  double defect_half_cap = 0.0;
};

// Projection defect of grid values at cap and cap/2, computed from the
// pointwise residual (cancellation-free), plus ||P v||.
DefectResult projection_defect(const Eigen::VectorXcd& values,
                               const DiskQuadrature& quad, int cap,
                               const std::vector<double>& norms, Exec exec) {
  const auto table = kernels::ring_mode_table(values, quad, -(cap - 1), 0, exec);
  const auto moments = kernels::analytic_moments(table, -(cap - 1), quad, cap,
                                                 norms, exec);
  DefectResult r;
  r.toeplitz = moments.norm();
  r.defect = std::sqrt(
      kernels::projection_residual_norm_sq(values, moments, quad, norms, exec));
  r.defect_half_cap = std::sqrt(kernels::projection_residual_norm_sq(
      values, moments.head(cap / 2), quad, norms, exec));
  return r;
}

}  // namespace

BerezinProbe berezin_probe(const Symbol& f, cplx z, const SpaceParams& params,
                           const DiskQuadrature& quad, int proj_cap,
                           Exec exec) {
  params.validate();
  if (std::abs(z) >= 1.0) {
    throw std::domain_error("berezin probe requires |z| < 1");
  }
  const int cap = proj_cap > 0 ? proj_cap : 2 * params.n_analytic + 16;
  const auto norms = analytic_basis_norms(cap, params.alpha);

  auto base = f.eval;
  const auto pullback = kernels::grid_eval(
      [base, z](cplx w) { return base(mobius(z, w)); }, quad, exec);
  const DefectResult pull = projection_defect(pullback, quad, cap, norms, exec);

  const double alpha = params.alpha;
  const double kzz = std::sqrt(reproducing_kernel(z, z, alpha).real());
  const auto fkz = kernels::grid_eval(
      [base, z, alpha, kzz](cplx w) {
        return base(w) * reproducing_kernel(w, z, alpha) / kzz;
      },
      quad, exec);
  const DefectResult kz = projection_defect(fkz, quad, cap, norms, exec);

  BerezinProbe probe;
  probe.hankel_defect = pull.defect;
  probe.toeplitz = pull.toeplitz;
  probe.hankel_kz = kz.defect;
  probe.cap_warning = std::abs(pull.defect - pull.defect_half_cap) > 1e-4;
  return probe;
}

double berezin_hankel_defect(const Symbol& f, cplx z, const SpaceParams& params,
                             const DiskQuadrature& quad, int proj_cap) {
  return berezin_probe(f, z, params, quad, proj_cap).hankel_defect;
}

double berezin_toeplitz(const Symbol& f, cplx z, const SpaceParams& params,
                        const DiskQuadrature& quad, int proj_cap) {
  return berezin_probe(f, z, params, quad, proj_cap).toeplitz;
}

EssentialNormEstimate essential_norm_estimate(
    const Symbol& f, OperatorFamily kind, const std::vector<double>& radii,
    const std::vector<int>& caps, const SpaceParams& params,
    const DiskQuadrature& quad, const EssnormOpts& opts) {
  params.validate();
  EssentialNormEstimate est;

  // Lower scan: Berezin functional over radii x angles.
  for (double rho : radii) {
    if (!(rho > 0.0 && rho < 1.0)) {
      throw std::domain_error("estimator radii must lie in (0,1)");
    }
    double best = -1.0, best_kz = 0.0;
    cplx best_z;
    for (int k = 0; k < opts.angles; ++k) {
      const cplx z = std::polar(rho, 2.0 * std::numbers::pi * k / opts.angles);
      const BerezinProbe probe =
          berezin_probe(f, z, params, quad, opts.proj_cap, opts.exec);
      est.cap_warning = est.cap_warning || probe.cap_warning;
      const double v =
          kind == OperatorFamily::hankel ? probe.hankel_defect : probe.toeplitz;
      const double companion =
          kind == OperatorFamily::hankel ? probe.hankel_kz : 0.0;
      if (v > best) {
        best = v;
        best_z = z;
      }
      best_kz = std::max(best_kz, companion);
    }
    est.scan_lower.push_back({rho, best, best_kz});
    if (best > est.lower) {
      est.lower = best;
      est.lower_witness = best_z;
    }
  }

  // Upper scan: tail compressions of the largest-N section.
  const int n = params.n_analytic;
  est.upper = std::numeric_limits<double>::infinity();
  if (kind == OperatorFamily::hankel) {
    const FiniteSection gram =
        hankel_gram_section(f, params, quad, opts.proj_cap, opts.exec);
    for (int k : caps) {
      if (k < 0 || k >= n) {
        throw std::invalid_argument("estimator caps must satisfy 0 <= K < N");
      }
      const Eigen::MatrixXcd tail = gram.matrix.block(k, k, n - k, n - k);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(tail,
                                                         Eigen::EigenvaluesOnly);
      const double v = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
      est.scan_upper.push_back({k, v});
      if (v < est.upper) {
        est.upper = v;
        est.upper_witness = k;
      }
    }
  } else {
    const FiniteSection toep = toeplitz_section(f, params, quad, opts.exec);
    for (int k : caps) {
      if (k < 0 || k >= n) {
        throw std::invalid_argument("estimator caps must satisfy 0 <= K < N");
      }
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(toep.matrix.rightCols(n - k));
      const double v = svd.singularValues()(0);
      est.scan_upper.push_back({k, v});
      if (v < est.upper) {
        est.upper = v;
        est.upper_witness = k;
      }
    }
  }

  est.upper_tenth_root_shape = std::pow(std::max(est.lower, 0.0), 0.1);
  est.sandwich_consistent = est.lower <= est.upper + kSandwichReportTol;
  return est;
}

std::string FiniteSection::to_json() const {
  nlohmann::ordered_json j;
  switch (kind) {
    case SectionKind::toeplitz: j["kind"] = "toeplitz"; break;
    case SectionKind::hankel_gram: j["kind"] = "hankel-gram"; break;
    case SectionKind::hankel_explicit: j["kind"] = "hankel-explicit"; break;
  }
  j["N"] = params.n_analytic;
  j["alpha"] = params.alpha;
  j["symbol_provenance"] = symbol_provenance;
  j["rows"] = matrix.rows();
  j["cols"] = matrix.cols();
  j["projection_cap"] = projection_cap;
  j["asymmetry"] = asymmetry;
  j["flags"] = nlohmann::ordered_json{{"cap_warning", cap_warning},
                                      {"psd_warning", psd_warning},
                                      {"exactness_warning", exactness_warning}};
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      entries.push_back({matrix(i, c).real(), matrix(i, c).imag()});
    }
  }
  return j.dump(2);
}

std::string EssentialNormEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["lower"] = lower;
  j["upper"] = upper;
  j["lower_witness"] = {lower_witness.real(), lower_witness.imag()};
  j["upper_witness"] = upper_witness;
  j["upper_tenth_root_shape"] = upper_tenth_root_shape;
  j["sandwich_consistent"] = sandwich_consistent;
  j["cap_warning"] = cap_warning;
  auto& lo = j["scan_lower"] = nlohmann::ordered_json::array();
  for (const auto& row : scan_lower) {
    lo.push_back({{"radius", row[0]}, {"defect", row[1]}, {"kz_probe", row[2]}});
  }
  auto& up = j["scan_upper"] = nlohmann::ordered_json::array();
  for (const auto& row : scan_upper) {
    up.push_back({{"cap", row.first}, {"tail_norm", row.second}});
  }
  return j.dump(2);
}

std::string singular_values_csv(const std::vector<double>& sv) {
  std::ostringstream out;
  out << "index,sigma\n";
  char buf[64];
  for (std::size_t k = 0; k < sv.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", k, sv[k]);
    out << buf;
  }
  return out.str();
}

}  // namespace blab
