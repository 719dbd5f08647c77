#include "blab/commands.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "blab/approx.hpp"
#include "blab/kernels.hpp"
#include "blab/operators.hpp"
#include "blab/report.hpp"
#include "blab/rng.hpp"
#include "blab/space.hpp"
#include "blab/symbols.hpp"
#include "json.hpp"

namespace blab {

namespace {

constexpr double kPi = std::numbers::pi;
using kernels::Exec;

struct Pipeline {
  ExperimentConfig cfg;
  SpaceParams params;
  DiskQuadrature quad;
  Symbol symbol;
  int proj_cap = 0;
};

// Resolution floors for non-polynomial symbols; exactness alone would leave
// discontinuous symbols badly under-resolved.
constexpr int kDefaultRadialMin = 160;
constexpr int kDefaultAngularMin = 2048;

Pipeline make_pipeline(const ExperimentConfig& cfg, bool resolution_floors) {
  Pipeline p;
  p.cfg = cfg;
  p.params = SpaceParams{cfg.alpha, cfg.n, cfg.effective_fourier_cap(),
                         cfg.radial_cap};
  p.params.validate();
  p.proj_cap = cfg.proj_cap > 0 ? cfg.proj_cap : 2 * cfg.n + 16;
  const int degree =
      cfg.quad_degree > 0 ? cfg.quad_degree : 2 * (p.proj_cap + 8);
  // The kernel-reproduction check needs enough angular modes to alias the
  // kernel tail below 1e-9 at |z| = 0.8 even when no floors are requested.
  const int base_radial = resolution_floors ? kDefaultRadialMin : 48;
  const int base_angular = resolution_floors ? kDefaultAngularMin : 256;
  const int radial_min =
      cfg.quad_radial_min > 0 ? cfg.quad_radial_min : base_radial;
  const int angular_min =
      cfg.quad_angular_min > 0 ? cfg.quad_angular_min : base_angular;
  p.quad = build_quadrature(p.params, degree, radial_min, angular_min);
  p.symbol = parse_symbol_spec(cfg.symbol);
  return p;
}

FamilyKind family_kind_of(const ExperimentConfig& cfg) {
  return cfg.family_kind == "harmonic-dilation" ? FamilyKind::harmonic_dilation
                                                : FamilyKind::mollified_truncation;
}

OperatorFamily operator_kind_of(const ExperimentConfig& cfg) {
  return cfg.operator_kind == "toeplitz" ? OperatorFamily::toeplitz
                                         : OperatorFamily::hankel;
}

std::vector<TestVector> resolve_test_vectors(const ExperimentConfig& cfg,
                                             const SpaceParams& params) {
  const auto defaults = default_test_vectors(params, cfg.seed);
  std::vector<TestVector> out;
  for (const auto& name : cfg.sot_vectors) {
    bool found = false;
    for (const auto& v : defaults) {
      if (v.id == name) {
        out.push_back(v);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("unknown SOT test vector '" + name +
                        "' (known: e0, e1, e4, rand8)");
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CheckLine {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass() const { return residual <= tol; }
};

void print_checks(const std::vector<CheckLine>& checks) {
  for (const auto& c : checks) {
    std::cout << (c.pass() ? "[PASS] " : "[FAIL] ") << c.name
              << "  residual=" << format_double(c.residual)
              << "  tol=" << format_double(c.tol) << "\n";
  }
}

nlohmann::ordered_json checks_json(const std::vector<CheckLine>& checks) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    arr.push_back({{"check", c.name},
                   {"residual", c.residual},
                   {"tolerance", c.tol},
                   {"pass", c.pass()}});
  }
  return arr;
}

// Seeded random polynomial with monomial entries inside the caps.
MonomialCoeffs random_mixed_poly(SplitMix64& rng, const SpaceParams& params,
                                 int max_terms) {
  MonomialCoeffs c;
  const int pmax = std::min(params.fourier_cap, 10);
  const int qmax = std::min(params.radial_cap, 4);
  for (int t = 0; t < max_terms; ++t) {
    const int p = static_cast<int>(rng.next_u64() % (pmax + 1));
    const int q = static_cast<int>(rng.next_u64() % (qmax + 1));
    c.add(p, q, cplx(rng.next_signed(), rng.next_signed()));
  }
  return c;
}

std::vector<cplx> random_analytic_coeffs(SplitMix64& rng, int degree) {
  std::vector<cplx> c(static_cast<std::size_t>(degree) + 1);
  for (auto& ck : c) ck = cplx(rng.next_signed(), rng.next_signed());
  return c;
}

}  // namespace

int cmd_basis_check(const ExperimentConfig& cfg, const std::string& out_dir) {
  Pipeline p = make_pipeline(cfg, /*resolution_floors=*/false);
  const double alpha = p.params.alpha;
  const int n = p.params.n_analytic;
  std::vector<CheckLine> checks;

  // Quadrature exactness against the closed Gamma form.
  {
    const int deg = std::min(p.quad.exactness_degree, 40);
    double worst = 0.0;
    for (int j = 0; j <= deg; ++j) {
      for (int k = 0; j + k <= deg; ++k) {
        worst = std::max(worst, std::abs(p.quad.integrate_monomial(j, k) -
                                         monomial_integral(j, k, alpha)));
      }
    }
    checks.push_back({"quadrature-exactness", worst, kQuadExactnessTol});
  }

  // Orthonormality of e_0..e_{N-1} under the rule.
  {
    const auto& lib = test_symbol_library();
    const FiniteSection gram = toeplitz_section(lib.at("one"), p.params, p.quad);
    const Eigen::MatrixXcd resid =
        gram.matrix - Eigen::MatrixXcd::Identity(n, n);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < resid.cols(); ++j) {
      for (Eigen::Index i = 0; i < resid.rows(); ++i) {
        worst = std::max(worst, std::abs(resid(i, j)));
      }
    }
    checks.push_back({"basis-orthonormality", worst, kGramTol});
  }

  // Kernel reproduction <p, K(.,z)> = p(z).
  {
    SplitMix64 rng(cfg.seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto coeffs = random_analytic_coeffs(rng, 10);
      const auto values = kernels::grid_eval(
          [&coeffs](cplx z) {
            cplx acc = 0.0;
            for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * z + coeffs[k];
            return acc;
          },
          p.quad, Exec::parallel);
      for (double rho : {0.3, 0.6, 0.8}) {
        for (int t = 0; t < 8; ++t) {
          const cplx z = std::polar(rho, 2.0 * kPi * t / 8.0);
          cplx acc = 0.0;
          for (int ring = 0; ring < p.quad.ring_count(); ++ring) {
            for (int l = 0; l < p.quad.angular_count; ++l) {
              const cplx w = p.quad.node(ring, l);
              acc += p.quad.node_weight(ring) *
                     values(static_cast<Eigen::Index>(ring) *
                                p.quad.angular_count +
                            l) *
                     std::conj(reproducing_kernel(w, z, alpha));
            }
          }
          cplx direct = 0.0;
          for (std::size_t k = coeffs.size(); k-- > 0;) direct = direct * z + coeffs[k];
          worst = std::max(worst, std::abs(acc - direct));
        }
      }
    }
    checks.push_back({"kernel-reproduction", worst, 1e-9});
  }

  // Norm consistency: quadrature vs closed forms on mixed polynomials.
  {
    SplitMix64 rng(cfg.seed + 1);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const MonomialCoeffs poly = random_mixed_poly(rng, p.params, 6);
      const auto values = kernels::grid_eval(
          [&poly](cplx z) { return poly.eval(z); }, p.quad, Exec::parallel);
      const double quad_norm =
          std::sqrt(kernels::weighted_norm_sq(values, p.quad, Exec::parallel));
      const double exact_norm = std::sqrt(inner(poly, poly, alpha).real());
      worst = std::max(worst, std::abs(quad_norm - exact_norm));
    }
    checks.push_back({"norm-consistency", worst, 1e-11});
  }

  // Projection idempotence and self-adjointness via closed forms.
  {
    SplitMix64 rng(cfg.seed + 2);
    double worst_idem = 0.0, worst_adj = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const MonomialCoeffs u = random_mixed_poly(rng, p.params, 6);
      const MonomialCoeffs v = random_mixed_poly(rng, p.params, 6);
      const MonomialCoeffs pu = project(u, p.params);
      const MonomialCoeffs ppu = project(pu, p.params);
      for (const auto& [pq, c] : pu.entries) {
        cplx other = 0.0;
        if (auto it = ppu.entries.find(pq); it != ppu.entries.end()) {
          other = it->second;
        }
        worst_idem = std::max(worst_idem, std::abs(c - other));
      }
      const cplx lhs = inner(pu, v, alpha);
      const cplx rhs = inner(u, project(v, p.params), alpha);
      worst_adj = std::max(worst_adj, std::abs(lhs - rhs));
    }
    checks.push_back({"projection-idempotence", worst_idem, 1e-13});
    checks.push_back({"projection-self-adjointness", worst_adj, 1e-11});
  }

  print_checks(checks);
  bool all_pass = true;
  for (const auto& c : checks) all_pass = all_pass && c.pass();

  if (!out_dir.empty()) {
    RunWriter writer{out_dir};
    nlohmann::ordered_json j;
    j["alpha"] = alpha;
    j["N"] = n;
    j["checks"] = checks_json(checks);
    writer.write("basis_check.json", j.dump(2));
    writer.write("quadrature.json", p.quad.to_json());
    writer.finalize("basis-check", cfg.serialize());
  }
  return all_pass ? kExitOk : kExitNumerical;
}

int cmd_sections(const ExperimentConfig& cfg, const std::string& out_dir) {
  Pipeline p = make_pipeline(cfg, true);
  const FiniteSection toep =
      toeplitz_section(p.symbol, p.params, p.quad);
  const FiniteSection hank =
      hankel_gram_section(p.symbol, p.params, p.quad, cfg.proj_cap);

  const auto toep_sv = singular_values(toep);
  const auto hank_sv = singular_values(hank);

  std::cout << "toeplitz section: N=" << p.params.n_analytic
            << " sigma_max=" << format_double(toep_sv.empty() ? 0.0 : toep_sv[0])
            << "\n";
  std::cout << "hankel section:   N=" << p.params.n_analytic
            << " sigma_max=" << format_double(hank_sv.empty() ? 0.0 : hank_sv[0])
            << " projection_cap=" << hank.projection_cap << "\n";

  bool flagged = hank.psd_warning;
  if (!out_dir.empty()) {
    RunWriter writer{out_dir};
    writer.write("toeplitz_section.json", toep.to_json());
    writer.write("hankel_section.json", hank.to_json());
    {
      const auto values = kernels::grid_eval(p.symbol.eval, p.quad,
                                             kernels::Exec::parallel);
      std::ostringstream grid_id;
      grid_id << "a" << p.params.alpha << ":q" << p.quad.ring_count() << ":n"
              << p.quad.angular_count;
      writer.write("symbol_grid.json",
                   grid_cache_to_json(grid_id.str(),
                                      {values.data(), values.data() + values.size()}));
    }
    writer.write("toeplitz_sigma.csv", singular_values_csv(toep_sv));
    writer.write("hankel_sigma.csv", singular_values_csv(hank_sv));
    writer.finalize("sections", cfg.serialize());
  }
  return flagged ? kExitNumerical : kExitOk;
}

int cmd_essnorm(const ExperimentConfig& cfg, const std::string& out_dir) {
  Pipeline p = make_pipeline(cfg, true);
  EssnormOpts opts;
  opts.angles = cfg.estimator_angles;
  opts.proj_cap = p.proj_cap;

  const auto caps = cfg.effective_caps();
  const EssentialNormEstimate hankel = essential_norm_estimate(
      p.symbol, OperatorFamily::hankel, cfg.radii, caps, p.params, p.quad, opts);
  const EssentialNormEstimate toeplitz = essential_norm_estimate(
      p.symbol, OperatorFamily::toeplitz, cfg.radii, caps, p.params, p.quad,
      opts);

  std::cout << "hankel:   lower=" << format_double(hankel.lower)
            << " upper=" << format_double(hankel.upper) << "\n";
  std::cout << "toeplitz: lower=" << format_double(toeplitz.lower)
            << " upper=" << format_double(toeplitz.upper) << "\n";

  if (!out_dir.empty()) {
    RunWriter writer{out_dir};
    writer.write("essnorm_hankel.json", hankel.to_json());
    writer.write("essnorm_toeplitz.json", toeplitz.to_json());
    auto scan_csv = [](const EssentialNormEstimate& est) {
      std::ostringstream out;
      out << "param,value\n";
      char buf[80];
      for (const auto& row : est.scan_lower) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", row[0], row[1]);
        out << buf;
      }
      for (const auto& row : est.scan_upper) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", row.first, row.second);
        out << buf;
      }
      return out.str();
    };
    writer.write("essnorm_hankel_scan.csv", scan_csv(hankel));
    writer.write("essnorm_toeplitz_scan.csv", scan_csv(toeplitz));
    writer.finalize("essnorm", cfg.serialize());
  }
  const bool flagged = !hankel.sandwich_consistent || !toeplitz.sandwich_consistent;
  return flagged ? kExitNumerical : kExitOk;
}

int cmd_sot(const ExperimentConfig& cfg, const std::string& out_dir) {
  Pipeline p = make_pipeline(cfg, true);
  const ApproximantFamily family = build_family(
      p.symbol, cfg.family_m, family_kind_of(cfg), nullptr, MollifyResolution{});
  const auto vectors = resolve_test_vectors(cfg, p.params);
  const FamilyWorkspace ws =
      FamilyWorkspace::build(p.symbol, family, p.params, p.quad, p.proj_cap);

  std::vector<std::pair<std::string, SotReport>> reports;
  reports.emplace_back("H", sot_report(p.symbol, family, vectors,
                                       OperatorKind::hankel, p.params, p.quad,
                                       &ws));
  reports.emplace_back("Hstar", sot_report(p.symbol, family, vectors,
                                           OperatorKind::hankel_adjoint,
                                           p.params, p.quad, &ws));
  reports.emplace_back("T", sot_report(p.symbol, family, vectors,
                                       OperatorKind::toeplitz, p.params, p.quad,
                                       &ws));
  reports.emplace_back("Tstar", sot_report(p.symbol, family, vectors,
                                           OperatorKind::toeplitz_adjoint,
                                           p.params, p.quad, &ws));

  for (const auto& [name, report] : reports) {
    double first = 0.0, last = 0.0;
    for (const auto& row : report.rows) {
      if (row.n == 1) first = std::max(first, row.residual);
      if (row.n == cfg.family_m) last = std::max(last, row.residual);
    }
    std::cout << name << ": max residual at n=1: " << format_double(first)
              << ", at n=" << cfg.family_m << ": " << format_double(last)
              << "\n";
  }

  if (!out_dir.empty()) {
    RunWriter writer{out_dir};
    for (const auto& [name, report] : reports) {
      writer.write("sot_" + name + ".json", report.to_json());
      writer.write("sot_" + name + ".csv", report.to_csv());
      writer.write("sot_" + name + ".txt", report.to_text());
    }
    writer.finalize("sot", cfg.serialize());
  }
  return kExitOk;
}

int cmd_realize(const ExperimentConfig& cfg, const std::string& out_dir) {
  Pipeline p = make_pipeline(cfg, true);
  const FamilyKind fam_kind = family_kind_of(cfg);
  const OperatorFamily op_kind = operator_kind_of(cfg);
  const ApproximantFamily family =
      build_family(p.symbol, cfg.family_m, fam_kind, nullptr, MollifyResolution{});
  const FamilyWorkspace ws =
      FamilyWorkspace::build(p.symbol, family, p.params, p.quad, p.proj_cap);

  EssnormOpts eopts;
  eopts.angles = cfg.estimator_angles;
  eopts.proj_cap = p.proj_cap;
  const EssentialNormEstimate estimate =
      essential_norm_estimate(p.symbol, op_kind, cfg.radii,
                              cfg.effective_caps(), p.params, p.quad, eopts);

  const int m = cfg.family_m;
  const DistanceObjective objective(ws, op_kind, m, p.params.n_analytic);
  SearchOptions sopts;
  sopts.max_iters = cfg.search_max_iters;
  sopts.tol = cfg.search_tol;

  // Two deterministic starts: uniform, and the best vertex.
  const SearchResult run1 =
      simplex_search(objective, SimplexWeights::uniform(m), sopts);
  int best_vertex = 0;
  double best_vertex_value = std::numeric_limits<double>::infinity();
  for (int v = 0; v < m; ++v) {
    const double jv = objective.value(SimplexWeights::vertex(m, v).a);
    if (jv < best_vertex_value) {
      best_vertex_value = jv;
      best_vertex = v;
    }
  }
  const SearchResult run2 =
      simplex_search(objective, SimplexWeights::vertex(m, best_vertex), sopts);

  std::vector<std::pair<std::string, SimplexWeights>> points;
  points.emplace_back("w1", run1.weights);
  points.emplace_back("w2", run2.weights);
  for (double s : {0.25, 0.5, 0.75}) {
    std::ostringstream name;
    name << "s" << static_cast<int>(s * 100);
    points.emplace_back(name.str(),
                        interpolate(run1.weights, run2.weights, s));
  }

  std::vector<std::pair<std::string, DistanceCertificate>> certificates;
  for (const auto& [name, weights] : points) {
    certificates.emplace_back(
        name, distance_certificate(p.symbol, family, weights, op_kind, p.params,
                                   p.quad, &ws, &estimate));
  }

  // M/N sweep with warm starts along increasing M: monotone by construction.
  std::vector<int> m_values;
  for (int mm = 2; mm < m; mm += 2) m_values.push_back(mm);
  m_values.push_back(m);
  std::vector<int> n_values;
  for (int nn : {p.params.n_analytic / 4, p.params.n_analytic / 2,
                 p.params.n_analytic}) {
    if (nn >= 2) n_values.push_back(nn);
  }
  std::ostringstream sweep_csv;
  sweep_csv << "M,N,J\n";
  std::vector<std::array<double, 3>> sweep_rows;
  for (int nn : n_values) {
    SimplexWeights warm;
    for (int mm : m_values) {
      const DistanceObjective obj(ws, op_kind, mm, nn);
      SearchResult best = simplex_search(obj, SimplexWeights::uniform(mm), sopts);
      for (int v = 0; v < mm; ++v) {
        SearchResult r = simplex_search(obj, SimplexWeights::vertex(mm, v), sopts);
        if (r.value < best.value) best = std::move(r);
      }
      if (!warm.a.empty()) {
        SimplexWeights padded = warm;
        padded.a.resize(static_cast<std::size_t>(mm), 0.0);
        SearchResult r = simplex_search(obj, padded, sopts);
        if (r.value < best.value) best = std::move(r);
      }
      warm = best.weights;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", mm, nn, best.value);
      sweep_csv << buf;
      sweep_rows.push_back({static_cast<double>(mm), static_cast<double>(nn),
                            best.value});
    }
  }

  // Harmonicity residuals for dilation families (undivided 5-point stencil).
  nlohmann::ordered_json harmonicity = nlohmann::ordered_json::array();
  if (fam_kind == FamilyKind::harmonic_dilation) {
    for (std::size_t i = 0; i < family.members.size(); ++i) {
      harmonicity.push_back(
          {{"n", i + 1},
           {"max_residual",
            max_laplacian_residual(family.members[i], 1e-3, 0.8, 64)}});
    }
  }

  std::cout << "J(w1)=" << format_double(run1.value)
            << " gap=" << format_double(run1.dual_gap)
            << (run1.converged ? "" : " [not converged]") << "\n";
  std::cout << "J(w2)=" << format_double(run2.value)
            << " gap=" << format_double(run2.dual_gap)
            << (run2.converged ? "" : " [not converged]") << "\n";
  std::cout << "essential lower=" << format_double(estimate.lower)
            << " upper=" << format_double(estimate.upper) << "\n";

  bool flagged = !run1.converged || !run2.converged;
  for (const auto& [name, cert] : certificates) {
    if (!cert.lower_consistent) flagged = true;
  }

  if (!out_dir.empty()) {
    RunWriter writer{out_dir};
    writer.write("essnorm.json", estimate.to_json());
    auto search_json = [](const SearchResult& r) {
      nlohmann::ordered_json j;
      j["weights"] = r.weights.a;
      j["J"] = r.value;
      j["dual_gap"] = r.dual_gap;
      j["converged"] = r.converged;
      auto& tr = j["trace"] = nlohmann::ordered_json::array();
      for (const auto& row : r.trace) {
        tr.push_back({{"iter", static_cast<int>(row[0])},
                      {"J", row[1]},
                      {"gap", row[2]}});
      }
      return j.dump(2);
    };
    writer.write("search_w1.json", search_json(run1));
    writer.write("search_w2.json", search_json(run2));
    for (const auto& [name, cert] : certificates) {
      writer.write("certificate_" + name + ".json", cert.to_json());
    }
    writer.write("certificate_w1_sigma.csv", certificates[0].second.sigma_csv());
    writer.write("certificate_w2_sigma.csv", certificates[1].second.sigma_csv());
    writer.write("sweep.csv", sweep_csv.str());
    nlohmann::ordered_json summary;
    summary["operator_kind"] = cfg.operator_kind;
    summary["family_kind"] = cfg.family_kind;
    summary["J_w1"] = run1.value;
    summary["J_w2"] = run2.value;
    summary["essential_lower"] = estimate.lower;
    summary["essential_upper"] = estimate.upper;
    auto& interp = summary["interpolants"] = nlohmann::ordered_json::array();
    for (const auto& [name, cert] : certificates) {
      interp.push_back({{"point", name}, {"J", cert.value}});
    }
    if (!harmonicity.empty()) summary["harmonicity_residuals"] = harmonicity;
    writer.write("summary.json", summary.dump(2));
    writer.finalize("realize", cfg.serialize());
  }
  return flagged ? kExitNumerical : kExitOk;
}

}  // namespace blab
