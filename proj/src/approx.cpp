#include "blab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "blab/rng.hpp"
#include "json.hpp"

namespace blab {

namespace {

using kernels::Exec;

constexpr double kSimplexSumTol = 1e-12;

Eigen::VectorXcd poly_grid_values(const std::vector<cplx>& coeffs,
                                  const DiskQuadrature& quad, Exec exec) {
  return kernels::grid_eval(
      [&coeffs](cplx z) {
        cplx acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) {
          acc = acc * z + coeffs[k];
        }
        return acc;
      },
      quad, exec);
}

Eigen::VectorXcd coeffs_in_basis(const std::vector<cplx>& coeffs, int n,
                                 double alpha) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (static_cast<int>(k) >= n) {
      throw std::invalid_argument("test vector degree exceeds basis cap");
    }
    out(static_cast<Eigen::Index>(k)) =
        coeffs[k] * analytic_basis_norm(static_cast<int>(k), alpha);
  }
  return out;
}

}  // namespace

ApproximantFamily build_family(
    const Symbol& f, int count, FamilyKind kind,
    const std::vector<std::pair<double, double>>* schedule_override,
    MollifyResolution res) {
  if (count < 1) throw std::invalid_argument("family size must be >= 1");

  std::vector<std::pair<double, double>> schedule;
  if (schedule_override) {
    schedule = *schedule_override;
    if (static_cast<int>(schedule.size()) != count) {
      throw std::invalid_argument("schedule override length must equal count");
    }
  } else {
    for (int n = 1; n <= count; ++n) {
      const double r = 1.0 - std::ldexp(1.0, -n);
      const double eps =
          kind == FamilyKind::mollified_truncation ? std::ldexp(1.0, -(n + 1)) : 0.0;
      schedule.emplace_back(r, eps);
    }
  }

  double prev_r = 0.0;
  for (const auto& [r, eps] : schedule) {
    if (!(r > 0.0 && r < 1.0)) {
      throw std::invalid_argument("schedule radii must lie in (0,1)");
    }
    if (!(r > prev_r)) {
      throw std::invalid_argument("schedule radii must increase strictly");
    }
    prev_r = r;
    if (kind == FamilyKind::mollified_truncation) {
      // The margin dist(r_n D, boundary) > eps is what makes every member
      // vanish on the circle; breaking it silently would void the
      // boundary-vanishing certificates.
      if (!(1.0 - r > eps) || !(eps > 0.0)) {
        throw std::invalid_argument(
            "schedule violates 1 - r_n > eps_n > 0 at r = " + std::to_string(r));
      }
    }
  }

  ApproximantFamily family;
  family.base = f;
  family.kind = kind;
  family.schedule = schedule;
  family.members.reserve(schedule.size());
  for (const auto& [r, eps] : schedule) {
    if (kind == FamilyKind::mollified_truncation) {
      family.members.push_back(
          mollify(truncate(f, r), MollifierSpec::make(eps), res));
    } else {
      family.members.push_back(dilate(f, r));
    }
  }
  return family;
}

void SimplexWeights::validate() const {
  double sum = 0.0;
  for (double v : a) {
    if (!(v >= 0.0)) throw std::invalid_argument("simplex weights must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    throw std::invalid_argument("simplex weights must sum to 1, got " +
                                std::to_string(sum));
  }
}

SimplexWeights SimplexWeights::uniform(int count) {
  SimplexWeights w;
  w.a.assign(static_cast<std::size_t>(count), 1.0 / count);
  return w;
}

SimplexWeights SimplexWeights::vertex(int count, int index) {
  SimplexWeights w;
  w.a.assign(static_cast<std::size_t>(count), 0.0);
  w.a[static_cast<std::size_t>(index)] = 1.0;
  return w;
}

SimplexWeights interpolate(const SimplexWeights& w1, const SimplexWeights& w2,
                           double s) {
  if (w1.a.size() != w2.a.size()) {
    throw std::invalid_argument("interpolate requires equal lengths");
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("interpolation parameter must lie in [0,1]");
  }
  SimplexWeights out;
  out.a.resize(w1.a.size());
  for (std::size_t i = 0; i < w1.a.size(); ++i) {
    out.a[i] = s * w1.a[i] + (1.0 - s) * w2.a[i];
  }
  return out;
}

std::vector<TestVector> default_test_vectors(const SpaceParams& params,
                                             std::uint64_t seed) {
  std::vector<TestVector> out;
  const double alpha = params.alpha;
  auto unit = [alpha](int k) {
    std::vector<cplx> c(static_cast<std::size_t>(k + 1), 0.0);
    c.back() = 1.0 / analytic_basis_norm(k, alpha);
    return c;
  };
  out.push_back({"e0", unit(0)});
  out.push_back({"e1", unit(1)});
  out.push_back({"e4", unit(4)});

  SplitMix64 rng(seed);
  std::vector<cplx> c(9);
  for (auto& ck : c) {
    const double re = rng.next_signed();
    const double im = rng.next_signed();
    ck = cplx(re, im);
  }
  double norm2 = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    norm2 += std::norm(c[k]) * monomial_integral(static_cast<int>(k),
                                                 static_cast<int>(k), alpha);
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& ck : c) ck *= scale;
  out.push_back({"rand8", c});
  return out;
}

FamilyWorkspace FamilyWorkspace::build(const Symbol& f,
                                       const ApproximantFamily& family,
                                       const SpaceParams& params,
                                       const DiskQuadrature& quad,
                                       int proj_cap, Exec exec) {
  params.validate();
  FamilyWorkspace ws;
  ws.params_ = params;
  const int n = params.n_analytic;
  const int np = proj_cap > 0 ? proj_cap : 2 * n + 16;
  ws.proj_cap_ = np;
  const auto norms = analytic_basis_norms(np, params.alpha);
  const int m_count = static_cast<int>(family.members.size());

  auto& values = ws.values_;
  values.reserve(static_cast<std::size_t>(m_count) + 1);
  values.push_back(kernels::grid_eval(f.eval, quad, exec));
  for (const auto& psi : family.members) {
    values.push_back(kernels::grid_eval(psi.eval, quad, exec));
  }

  // Projection coefficient matrices C_u (N_P x N).
  std::vector<Eigen::MatrixXcd> c_all;
  c_all.reserve(values.size());
  for (const auto& v : values) {
    const auto table = kernels::ring_mode_table(v, quad, -(np - 1), n - 1, exec);
    c_all.push_back(
        kernels::moment_matrix(table, -(np - 1), quad, np, n, norms, exec));
  }

  // G(u,v) = B(u,v) - C_u^H C_v for all needed pairs.
  auto pair_gram = [&](int u, int v) {
    Eigen::VectorXcd prod(values[0].size());
    const auto& vu = values[static_cast<std::size_t>(u)];
    const auto& vv = values[static_cast<std::size_t>(v)];
    for (Eigen::Index q = 0; q < prod.size(); ++q) {
      prod(q) = std::conj(vu(q)) * vv(q);
    }
    const auto table =
        kernels::ring_mode_table(prod, quad, -(n - 1), n - 1, exec);
    const Eigen::MatrixXcd b =
        kernels::moment_matrix(table, -(n - 1), quad, n, n, norms, exec);
    return Eigen::MatrixXcd(
        b - kernels::conj_product(c_all[static_cast<std::size_t>(u)],
                                  c_all[static_cast<std::size_t>(v)], exec));
  };

  ws.g_ff_ = pair_gram(0, 0);
  ws.g_f_members_.reserve(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    ws.g_f_members_.push_back(pair_gram(0, m + 1));
  }
  ws.g_members_.reserve(static_cast<std::size_t>(m_count * (m_count + 1) / 2));
  for (int m = 0; m < m_count; ++m) {
    for (int l = m; l < m_count; ++l) {
      ws.g_members_.push_back(pair_gram(m + 1, l + 1));
    }
  }
  ws.c_f_ = std::move(c_all[0]);
  ws.c_members_.assign(std::make_move_iterator(c_all.begin() + 1),
                       std::make_move_iterator(c_all.end()));
  return ws;
}

const Eigen::MatrixXcd& FamilyWorkspace::g_members(int m, int l) const {
  const int count = member_count();
  if (m > l) throw std::logic_error("g_members expects m <= l");
  // Row-major upper triangle offset.
  const int idx = m * count - m * (m - 1) / 2 + (l - m);
  return g_members_[static_cast<std::size_t>(idx)];
}

Eigen::MatrixXcd FamilyWorkspace::difference_gram(const std::vector<double>& a,
                                                  int m_sub, int n_sub) const {
  Eigen::MatrixXcd out = g_ff_.topLeftCorner(n_sub, n_sub);
  for (int m = 0; m < m_sub; ++m) {
    const auto block = g_f_members_[static_cast<std::size_t>(m)].topLeftCorner(
        n_sub, n_sub);
    out.noalias() -= a[static_cast<std::size_t>(m)] * block;
    out.noalias() -= a[static_cast<std::size_t>(m)] * block.adjoint();
  }
  for (int m = 0; m < m_sub; ++m) {
    for (int l = m; l < m_sub; ++l) {
      const auto block = g_members(m, l).topLeftCorner(n_sub, n_sub);
      const double w =
          a[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(l)];
      if (l == m) {
        out.noalias() += w * block;
      } else {
        out.noalias() += w * block;
        out.noalias() += w * block.adjoint();
      }
    }
  }
  return 0.5 * (out + Eigen::MatrixXcd(out.adjoint()));
}

Eigen::MatrixXcd FamilyWorkspace::member_gram(const std::vector<double>& a,
                                              int m_sub, int n_sub) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n_sub, n_sub);
  for (int m = 0; m < m_sub; ++m) {
    for (int l = m; l < m_sub; ++l) {
      const auto block = g_members(m, l).topLeftCorner(n_sub, n_sub);
      const double w =
          a[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(l)];
      if (l == m) {
        out.noalias() += w * block;
      } else {
        out.noalias() += w * block;
        out.noalias() += w * block.adjoint();
      }
    }
  }
  return 0.5 * (out + Eigen::MatrixXcd(out.adjoint()));
}

Eigen::MatrixXcd FamilyWorkspace::difference_toeplitz(
    const std::vector<double>& a, int m_sub, int n_sub) const {
  Eigen::MatrixXcd out = c_f_.topLeftCorner(n_sub, n_sub);
  for (int m = 0; m < m_sub; ++m) {
    out.noalias() -= a[static_cast<std::size_t>(m)] *
                     c_members_[static_cast<std::size_t>(m)].topLeftCorner(
                         n_sub, n_sub);
  }
  return out;
}

Eigen::MatrixXcd FamilyWorkspace::difference_c(const std::vector<double>& a,
                                               int m_sub) const {
  Eigen::MatrixXcd out = c_f_;
  for (int m = 0; m < m_sub; ++m) {
    out.noalias() -=
        a[static_cast<std::size_t>(m)] * c_members_[static_cast<std::size_t>(m)];
  }
  return out;
}

namespace {

// Deterministic Lanczos estimate of lambda_max for a Hermitian PSD matrix:
// fixed start vector, full reorthogonalization, early stop on Ritz
// stagnation. Used for objective values inside line searches; the gradient
// path keeps the full deterministic eigensolver.
double lanczos_lambda_max(const Eigen::MatrixXcd& mat) {
  const Eigen::Index n = mat.rows();
  const int max_iter = static_cast<int>(std::min<Eigen::Index>(n, 160));
  Eigen::MatrixXcd basis(n, max_iter);
  Eigen::VectorXd alpha(max_iter), beta(max_iter);
  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, cplx(1.0, 0.0));
  v.normalize();
  basis.col(0) = v;
  double prev = 0.0;
  int k = 0;
  for (; k < max_iter; ++k) {
    Eigen::VectorXcd w = mat * basis.col(k);
    alpha(k) = (basis.col(k).adjoint() * w)(0).real();
    w -= alpha(k) * basis.col(k);
    if (k > 0) w -= beta(k - 1) * basis.col(k - 1);
    // Full reorthogonalization keeps the recursion honest.
    for (int j = 0; j <= k; ++j) {
      w -= (basis.col(j).adjoint() * w)(0) * basis.col(j);
    }
    const double norm = w.norm();
    // Ritz value of the current tridiagonal block.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(alpha.head(k + 1), beta.head(k),
                              Eigen::EigenvaluesOnly);
    const double ritz = es.eigenvalues()(k);
    if (k > 4 && std::abs(ritz - prev) <= 1e-15 * std::max(std::abs(ritz), 1e-30)) {
      return ritz;
    }
    prev = ritz;
    if (norm <= 1e-300 || k + 1 >= max_iter) return ritz;
    beta(k) = norm;
    basis.col(k + 1) = w / norm;
  }
  return prev;
}

}  // namespace

DistanceObjective::DistanceObjective(const FamilyWorkspace& ws,
                                     OperatorFamily kind, int m_sub, int n_sub)
    : ws_(ws), kind_(kind), m_sub_(m_sub), n_sub_(n_sub) {
  if (m_sub < 1 || m_sub > ws.member_count()) {
    throw std::invalid_argument("objective member count out of range");
  }
  if (n_sub < 1 || n_sub > ws.n()) {
    throw std::invalid_argument("objective section size out of range");
  }
}

double DistanceObjective::value(const std::vector<double>& a) const {
  if (kind_ == OperatorFamily::hankel) {
    const Eigen::MatrixXcd gram = ws_.difference_gram(a, m_sub_, n_sub_);
    if (n_sub_ > 40) {
      return std::sqrt(std::max(lanczos_lambda_max(gram), 0.0));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                       Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  }
  const Eigen::MatrixXcd toep = ws_.difference_toeplitz(a, m_sub_, n_sub_);
  if (n_sub_ > 40) {
    const Eigen::MatrixXcd gram = toep.adjoint() * toep;
    return std::sqrt(std::max(lanczos_lambda_max(gram), 0.0));
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(toep);
  return svd.singularValues()(0);
}

double DistanceObjective::value_and_grad(const std::vector<double>& a,
                                         std::vector<double>& grad) const {
  grad.assign(static_cast<std::size_t>(m_sub_), 0.0);
  if (kind_ == OperatorFamily::hankel) {
    const Eigen::MatrixXcd gram = ws_.difference_gram(a, m_sub_, n_sub_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const Eigen::Index top = gram.rows() - 1;
    const double lambda = std::max(es.eigenvalues()(top), 0.0);
    const double j = std::sqrt(lambda);
    if (j < 1e-15) return j;
    const Eigen::VectorXcd x = es.eigenvectors().col(top);
    // dJ/da_m = x^H (dM/da_m) x / (2J). Only real parts of the quadratic
    // forms survive, and Re(x^H G x) = Re(x^H G^H x), so the stored
    // upper-triangle block serves both orientations.
    for (int m = 0; m < m_sub_; ++m) {
      const auto& gfm = ws_.g_f_member(m);
      double acc = -(x.adjoint() * (gfm.topLeftCorner(n_sub_, n_sub_) * x))(0)
                        .real();
      for (int l = 0; l < m_sub_; ++l) {
        const auto& gml = l >= m ? ws_.g_members(m, l) : ws_.g_members(l, m);
        acc += a[static_cast<std::size_t>(l)] *
               (x.adjoint() * (gml.topLeftCorner(n_sub_, n_sub_) * x))(0).real();
      }
      grad[static_cast<std::size_t>(m)] = acc / j;
    }
    return j;
  }
  const Eigen::MatrixXcd toep = ws_.difference_toeplitz(a, m_sub_, n_sub_);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(toep, Eigen::ComputeThinU |
                                                Eigen::ComputeThinV);
  const double sigma = svd.singularValues()(0);
  const Eigen::VectorXcd u = svd.matrixU().col(0);
  const Eigen::VectorXcd v = svd.matrixV().col(0);
  for (int m = 0; m < m_sub_; ++m) {
    const auto tm = ws_.c_member(m).topLeftCorner(n_sub_, n_sub_);
    grad[static_cast<std::size_t>(m)] = -((u.adjoint() * (tm * v))(0)).real();
  }
  return sigma;
}

namespace {

// Golden-section minimization of a convex 1-D function on [lo, hi].
double golden_min(const std::function<double(double)>& fn, double lo, double hi,
                  int evals, double* best_val) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int i = 0; i < evals; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = fn(xm);
  double best_x = xm, best = fm;
  if (f1 < best) { best = f1; best_x = x1; }
  if (f2 < best) { best = f2; best_x = x2; }
  // Endpoints matter when the minimum sits on the boundary.
  const double flo = fn(lo), fhi = fn(hi);
  if (flo < best) { best = flo; best_x = lo; }
  if (fhi < best) { best = fhi; best_x = hi; }
  if (best_val) *best_val = best;
  return best_x;
}

void renormalize(std::vector<double>& a) {
  double sum = 0.0;
  for (double& v : a) {
    if (v < 0.0 && v > -1e-14) v = 0.0;
    sum += v;
  }
  for (double& v : a) v /= sum;
}

}  // namespace

SearchResult simplex_search(const DistanceObjective& objective,
                            const SimplexWeights& start,
                            const SearchOptions& opts) {
  const int dim = objective.dimension();
  if (static_cast<int>(start.a.size()) != dim) {
    throw std::invalid_argument("start point dimension mismatch");
  }
  start.validate();

  SearchResult result;
  std::vector<double> a = start.a;
  std::vector<double> grad;
  double j = 0.0, gap = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    j = objective.value_and_grad(a, grad);
    int s_fw = 0, s_aw = -1;
    for (int m = 1; m < dim; ++m) {
      if (grad[static_cast<std::size_t>(m)] < grad[static_cast<std::size_t>(s_fw)]) s_fw = m;
    }
    for (int m = 0; m < dim; ++m) {
      if (a[static_cast<std::size_t>(m)] > 1e-14 &&
          (s_aw < 0 || grad[static_cast<std::size_t>(m)] >
                           grad[static_cast<std::size_t>(s_aw)])) {
        s_aw = m;
      }
    }
    double dot = 0.0;
    for (int m = 0; m < dim; ++m) {
      dot += grad[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(m)];
    }
    gap = dot - grad[static_cast<std::size_t>(s_fw)];
    result.trace.push_back({static_cast<double>(iter), j, gap});
    if (gap <= opts.tol) break;

    // Directional derivatives of the FW and away moves.
    const double slope_fw = grad[static_cast<std::size_t>(s_fw)] - dot;
    const double slope_aw = dot - grad[static_cast<std::size_t>(s_aw)];
    const bool away = s_aw >= 0 && slope_aw < slope_fw &&
                      a[static_cast<std::size_t>(s_aw)] < 1.0 - 1e-14;

    std::vector<double> dir(static_cast<std::size_t>(dim));
    double t_max;
    if (away) {
      for (int m = 0; m < dim; ++m) {
        dir[static_cast<std::size_t>(m)] =
            a[static_cast<std::size_t>(m)] -
            (m == s_aw ? 1.0 : 0.0);
      }
      t_max = a[static_cast<std::size_t>(s_aw)] /
              (1.0 - a[static_cast<std::size_t>(s_aw)]);
    } else {
      for (int m = 0; m < dim; ++m) {
        dir[static_cast<std::size_t>(m)] =
            (m == s_fw ? 1.0 : 0.0) - a[static_cast<std::size_t>(m)];
      }
      t_max = 1.0;
    }

    auto along = [&](double t) {
      std::vector<double> probe(static_cast<std::size_t>(dim));
      for (int m = 0; m < dim; ++m) {
        probe[static_cast<std::size_t>(m)] =
            a[static_cast<std::size_t>(m)] +
            t * dir[static_cast<std::size_t>(m)];
      }
      renormalize(probe);
      return objective.value(probe);
    };
    double best_val = j;
    const double t_star = golden_min(along, 0.0, t_max,
                                     opts.line_search_evals, &best_val);
    if (best_val >= j || t_star <= 0.0) {
      // No descent along either direction: subgradient stall.
      break;
    }
    for (int m = 0; m < dim; ++m) {
      a[static_cast<std::size_t>(m)] += t_star * dir[static_cast<std::size_t>(m)];
    }
    renormalize(a);
  }

  // Pairwise polish: exact line searches along edge directions e_m - e_l.
  for (int sweep = 0; sweep < opts.polish_sweeps; ++sweep) {
    bool improved = false;
    double current = objective.value(a);
    for (int m = 0; m < dim; ++m) {
      for (int l = 0; l < dim; ++l) {
        if (m == l) continue;
        const double t_hi = a[static_cast<std::size_t>(l)];
        if (t_hi <= 1e-16) continue;
        auto along = [&](double t) {
          std::vector<double> probe = a;
          probe[static_cast<std::size_t>(m)] += t;
          probe[static_cast<std::size_t>(l)] -= t;
          if (probe[static_cast<std::size_t>(l)] < 0.0) {
            probe[static_cast<std::size_t>(l)] = 0.0;
          }
          renormalize(probe);
          return objective.value(probe);
        };
        double best_val = current;
        const double t_star =
            golden_min(along, 0.0, t_hi, opts.line_search_evals, &best_val);
        if (best_val < current - 1e-15 && t_star > 0.0) {
          a[static_cast<std::size_t>(m)] += t_star;
          a[static_cast<std::size_t>(l)] -= t_star;
          if (a[static_cast<std::size_t>(l)] < 0.0) {
            a[static_cast<std::size_t>(l)] = 0.0;
          }
          renormalize(a);
          current = best_val;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }

  j = objective.value_and_grad(a, grad);
  double dot = 0.0, gmin = grad.empty() ? 0.0 : grad[0];
  for (int m = 0; m < dim; ++m) {
    dot += grad[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(m)];
    gmin = std::min(gmin, grad[static_cast<std::size_t>(m)]);
  }
  gap = dot - gmin;

  result.weights.a = a;
  result.value = j;
  result.dual_gap = gap;
  result.converged = gap <= opts.tol;
  return result;
}

SearchResult simplex_search(const Symbol& f, const ApproximantFamily& family,
                            OperatorFamily kind, const SpaceParams& params,
                            const DiskQuadrature& quad,
                            const SearchOptions& opts) {
  const FamilyWorkspace ws = FamilyWorkspace::build(f, family, params, quad);
  const int m = ws.member_count();
  const DistanceObjective objective(ws, kind, m, ws.n());
  SearchResult best = simplex_search(objective, SimplexWeights::uniform(m), opts);
  for (int v = 0; v < m; ++v) {
    SearchResult r = simplex_search(objective, SimplexWeights::vertex(m, v), opts);
    if (r.value < best.value) best = std::move(r);
  }
  return best;
}

double SotReport::residual(int n, const std::string& id) const {
  for (const auto& row : rows) {
    if (row.n == n && row.vector_id == id) return row.residual;
  }
  throw std::out_of_range("no SOT row for n=" + std::to_string(n) + " id=" + id);
}

SotReport sot_report(const Symbol& f, const ApproximantFamily& family,
                     const std::vector<TestVector>& vectors, OperatorKind kind,
                     const SpaceParams& params, const DiskQuadrature& quad,
                     const FamilyWorkspace* ws, Exec exec) {
  params.validate();
  SotReport report;
  report.kind = kind;
  const int n = params.n_analytic;
  const int member_count = static_cast<int>(family.members.size());

  const bool adjoint = kind == OperatorKind::hankel_adjoint ||
                       kind == OperatorKind::toeplitz_adjoint;

  FamilyWorkspace local;
  if (adjoint && !ws) {
    local = FamilyWorkspace::build(f, family, params, quad, 0, exec);
    ws = &local;
  }

  if (!adjoint) {
    const int np = ws ? ws->projection_cap() : 2 * n + 16;
    const auto norms = analytic_basis_norms(np, params.alpha);
    const Eigen::VectorXcd f_values =
        ws ? ws->f_values() : kernels::grid_eval(f.eval, quad, exec);
    std::vector<Eigen::VectorXcd> g_values;
    g_values.reserve(vectors.size());
    for (const auto& g : vectors) {
      g_values.push_back(poly_grid_values(g.coeffs, quad, exec));
    }
    for (int idx = 0; idx < member_count; ++idx) {
      const Eigen::VectorXcd psi_values =
          ws ? ws->member_values(idx)
             : kernels::grid_eval(
                   family.members[static_cast<std::size_t>(idx)].eval, quad,
                   exec);
      const Eigen::VectorXcd d = f_values - psi_values;
      for (std::size_t gi = 0; gi < vectors.size(); ++gi) {
        const Eigen::VectorXcd h = d.cwiseProduct(g_values[gi]);
        const auto table =
            kernels::ring_mode_table(h, quad, -(np - 1), 0, exec);
        const auto moments =
            kernels::analytic_moments(table, -(np - 1), quad, np, norms, exec);
        const double res =
            kind == OperatorKind::hankel
                ? std::sqrt(kernels::projection_residual_norm_sq(
                      h, moments, quad, norms, exec))
                : moments.norm();
        report.rows.push_back({idx + 1, vectors[gi].id, res});
      }
    }
    return report;
  }

  // Adjoint kinds through the Gram identities.
  for (int idx = 0; idx < member_count; ++idx) {
    std::vector<double> a(static_cast<std::size_t>(ws->member_count()), 0.0);
    a[static_cast<std::size_t>(idx)] = 1.0;
    if (kind == OperatorKind::hankel_adjoint) {
      const Eigen::MatrixXcd gram =
          ws->difference_gram(a, ws->member_count(), n);
      for (const auto& g : vectors) {
        const Eigen::VectorXcd ghat = coeffs_in_basis(g.coeffs, n, params.alpha);
        report.rows.push_back({idx + 1, g.id, (gram * ghat).norm()});
      }
    } else {
      const Eigen::MatrixXcd c = ws->difference_c(a, ws->member_count());
      for (const auto& g : vectors) {
        const Eigen::VectorXcd ghat = coeffs_in_basis(g.coeffs, n, params.alpha);
        const Eigen::VectorXcd h = c * ghat;
        report.rows.push_back({idx + 1, g.id, (c.adjoint() * h).norm()});
      }
    }
  }
  return report;
}

std::string SotReport::to_json() const {
  nlohmann::ordered_json j;
  switch (kind) {
    case OperatorKind::hankel: j["operator_kind"] = "H"; break;
    case OperatorKind::hankel_adjoint: j["operator_kind"] = "H*"; break;
    case OperatorKind::toeplitz: j["operator_kind"] = "T"; break;
    case OperatorKind::toeplitz_adjoint: j["operator_kind"] = "T*"; break;
  }
  auto& rows_json = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    rows_json.push_back({{"n", row.n},
                         {"vector", row.vector_id},
                         {"residual", row.residual}});
  }
  return j.dump(2);
}

std::string SotReport::to_csv() const {
  std::ostringstream out;
  out << "n,vector,residual\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g\n", row.n,
                  row.vector_id.c_str(), row.residual);
    out << buf;
  }
  return out.str();
}

std::string SotReport::to_text() const {
  std::ostringstream out;
  const char* kind_name = "H";
  switch (kind) {
    case OperatorKind::hankel: kind_name = "H"; break;
    case OperatorKind::hankel_adjoint: kind_name = "H*"; break;
    case OperatorKind::toeplitz: kind_name = "T"; break;
    case OperatorKind::toeplitz_adjoint: kind_name = "T*"; break;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-4s %4s %-8s %s\n", "kind", "n", "vector",
                "residual");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-4s %4d %-8s %.12e\n", kind_name, row.n,
                  row.vector_id.c_str(), row.residual);
    out << buf;
  }
  return out.str();
}

DistanceCertificate distance_certificate(
    const Symbol& f, const ApproximantFamily& family,
    const SimplexWeights& weights, OperatorFamily kind,
    const SpaceParams& params, const DiskQuadrature& quad,
    const FamilyWorkspace* ws, const EssentialNormEstimate* estimate) {
  weights.validate();
  const int member_count = static_cast<int>(family.members.size());
  if (static_cast<int>(weights.a.size()) != member_count) {
    throw std::invalid_argument("weight length must match family size");
  }

  FamilyWorkspace local;
  if (!ws) {
    local = FamilyWorkspace::build(f, family, params, quad);
    ws = &local;
  }
  const int n = ws->n();
  const DistanceObjective objective(*ws, kind, member_count, n);

  DistanceCertificate cert;
  cert.value = objective.value(weights.a);

  if (estimate) {
    cert.lower = estimate->lower;
    cert.upper = estimate->upper;
  } else {
    const std::vector<double> radii = {0.9, 0.95, 0.99, 0.995};
    std::vector<int> caps;
    for (int k = 1; k < 8; ++k) caps.push_back(k * n / 8);
    const EssentialNormEstimate est =
        essential_norm_estimate(f, kind, radii, caps, params, quad);
    cert.lower = est.lower;
    cert.upper = est.upper;
  }
  cert.gap = cert.value - cert.lower;
  cert.lower_consistent = cert.lower - kSandwichReportTol <= cert.value;

  cert.vertex_min = std::numeric_limits<double>::infinity();
  for (int m = 0; m < member_count; ++m) {
    cert.vertex_min = std::min(
        cert.vertex_min, objective.value(SimplexWeights::vertex(member_count, m).a));
  }

  // Boundary certificate for phi = sum a psi.
  {
    std::vector<Symbol> members = family.members;
    std::vector<double> a = weights.a;
    auto phi_eval = [members, a](cplx z) {
      cplx acc = 0.0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (a[m] != 0.0) acc += a[m] * members[m].eval(z);
      }
      return acc;
    };
    Symbol phi;
    phi.eval = phi_eval;
    phi.sup_bound = f.sup_bound;
    phi.provenance = "convex-combination";
    double support = 0.0;
    bool has_support = family.kind == FamilyKind::mollified_truncation;
    for (const auto& psi : family.members) {
      if (psi.vanishes_beyond) {
        support = std::max(support, *psi.vanishes_beyond);
      } else {
        has_support = false;
      }
    }
    if (has_support) phi.vanishes_beyond = support;
    cert.boundary = boundary_vanishing_check(phi, 1.0, 1e-12, 720);
  }

  // Compactness probe: sigma tails of the section of H_phi (or T_phi).
  for (int size : {n / 4, n / 2, n}) {
    if (size < 2) continue;
    std::vector<double> sv;
    if (kind == OperatorFamily::hankel) {
      const Eigen::MatrixXcd gram =
          ws->member_gram(weights.a, member_count, size);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                         Eigen::EigenvaluesOnly);
      for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;) {
        sv.push_back(std::sqrt(std::max(es.eigenvalues()(i), 0.0)));
      }
    } else {
      Eigen::MatrixXcd toep = Eigen::MatrixXcd::Zero(size, size);
      for (int m = 0; m < member_count; ++m) {
        toep.noalias() += weights.a[static_cast<std::size_t>(m)] *
                          ws->c_member(m).topLeftCorner(size, size);
      }
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(toep);
      sv.assign(svd.singularValues().data(),
                svd.singularValues().data() + svd.singularValues().size());
    }
    cert.sigma_tails.emplace_back(size, std::move(sv));
  }
  return cert;
}

std::string DistanceCertificate::sigma_csv() const {
  std::ostringstream out;
  out << "N,index,sigma\n";
  char buf[96];
  for (const auto& [size, sv] : sigma_tails) {
    for (std::size_t k = 0; k < sv.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g\n", size, k, sv[k]);
      out << buf;
    }
  }
  return out.str();
}

std::string DistanceCertificate::to_json() const {
  nlohmann::ordered_json j;
  j["J"] = value;
  j["essential_lower"] = lower;
  j["essential_upper"] = upper;
  j["gap"] = gap;
  j["vertex_min"] = vertex_min;
  j["lower_consistent"] = lower_consistent;
  j["boundary_vanishing"] = nlohmann::ordered_json{
      {"vanishes", boundary.vanishes}, {"max_abs", boundary.max_abs}};
  auto& tails = j["sigma_tails"] = nlohmann::ordered_json::array();
  for (const auto& [size, sv] : sigma_tails) {
    tails.push_back({{"N", size}, {"sigma", sv}});
  }
  return j.dump(2);
}

}  // namespace blab
