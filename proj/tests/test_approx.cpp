#include <cmath>
#include <complex>

#include "blab/approx.hpp"
#include "blab/rng.hpp"
#include "doctest.h"

using namespace blab;

namespace {

const Symbol& lib(const std::string& name) {
  return test_symbol_library().at(name);
}

SpaceParams make_params(double alpha, int n) {
  SpaceParams p;
  p.alpha = alpha;
  p.n_analytic = n;
  p.fourier_cap = n + 8;
  p.radial_cap = 4;
  return p;
}

DiskQuadrature pipeline_quad(const SpaceParams& params, int np) {
  return build_quadrature(params, 2 * (np + 8), 96, 512);
}

}  // namespace

TEST_CASE("build_family default schedules") {
  SUBCASE("mollified truncation carries r_n + eps_n support certificates") {
    const ApproximantFamily fam =
        build_family(lib("one"), 3, FamilyKind::mollified_truncation);
    REQUIRE(fam.members.size() == 3);
    const double expected[] = {0.75, 0.875, 0.9375};
    for (int i = 0; i < 3; ++i) {
      REQUIRE(fam.members[i].vanishes_beyond.has_value());
      CHECK(*fam.members[i].vanishes_beyond ==
            doctest::Approx(expected[i]).epsilon(1e-14));
      const BoundaryCheck bc =
          boundary_vanishing_check(fam.members[i], 1.0, 1e-12, 128);
      CHECK(bc.vanishes);
      CHECK(bc.max_abs == 0.0);
    }
  }
  SUBCASE("harmonic dilation members stay harmonic with the same bound") {
    const ApproximantFamily fam =
        build_family(lib("harmonic-arg"), 2, FamilyKind::harmonic_dilation);
    REQUIRE(fam.members.size() == 2);
    CHECK(fam.schedule[0].first == doctest::Approx(0.5));
    CHECK(fam.schedule[1].first == doctest::Approx(0.75));
    for (const auto& m : fam.members) {
      CHECK(m.harmonic);
      CHECK(m.sup_bound <= lib("harmonic-arg").sup_bound);
    }
    const cplx probe(0.4, 0.2);
    CHECK(fam.members[0].eval(probe) ==
          lib("harmonic-arg").eval(0.5 * probe));
  }
  SUBCASE("schedules violating 1 - r > eps are a hard error") {
    const std::vector<std::pair<double, double>> bad = {{0.6, 0.5}};
    CHECK_THROWS_AS(
        build_family(lib("one"), 1, FamilyKind::mollified_truncation, &bad),
        std::invalid_argument);
  }
  SUBCASE("radii must increase strictly") {
    const std::vector<std::pair<double, double>> bad = {{0.5, 0.1}, {0.5, 0.05}};
    CHECK_THROWS_AS(
        build_family(lib("one"), 2, FamilyKind::mollified_truncation, &bad),
        std::invalid_argument);
  }
}

TEST_CASE("simplex weights and interpolation") {
  SimplexWeights w;
  w.a = {0.25, 0.75};
  CHECK_NOTHROW(w.validate());
  w.a = {0.5, 0.6};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w.a = {-0.1, 1.1};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);

  const SimplexWeights w1 = SimplexWeights::vertex(2, 0);
  const SimplexWeights w2 = SimplexWeights::vertex(2, 1);
  CHECK(interpolate(w1, w2, 0.0).a == w2.a);
  CHECK(interpolate(w1, w2, 1.0).a == w1.a);
  const SimplexWeights mid = interpolate(w1, w2, 0.5);
  CHECK(mid.a[0] == doctest::Approx(0.5));
  CHECK(mid.a[1] == doctest::Approx(0.5));
}

TEST_CASE("default test vectors are unit-norm") {
  const SpaceParams params = make_params(0.5, 16);
  const auto vectors = default_test_vectors(params, 42);
  REQUIRE(vectors.size() == 4);
  CHECK(vectors[3].id == "rand8");
  for (const auto& v : vectors) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < v.coeffs.size(); ++k) {
      norm2 += std::norm(v.coeffs[k]) *
               monomial_integral(static_cast<int>(k), static_cast<int>(k),
                                 params.alpha);
    }
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Seed determinism.
  const auto again = default_test_vectors(params, 42);
  CHECK(again[3].coeffs == vectors[3].coeffs);
  const auto other = default_test_vectors(params, 43);
  CHECK(other[3].coeffs != vectors[3].coeffs);
}

TEST_CASE("SOT self-residuals vanish") {
  const SpaceParams params = make_params(0.0, 12);
  const DiskQuadrature quad = pipeline_quad(params, 2 * 12 + 16);
  const std::vector<std::pair<double, double>> sched = {{0.5, 0.25}};
  ApproximantFamily fam =
      build_family(lib("sector"), 1, FamilyKind::mollified_truncation, &sched);
  // Use the single member as its own base: d = psi - psi = 0 exactly.
  fam.base = fam.members[0];
  const auto vectors = default_test_vectors(params, 1);
  for (OperatorKind kind : {OperatorKind::hankel, OperatorKind::toeplitz,
                            OperatorKind::hankel_adjoint,
                            OperatorKind::toeplitz_adjoint}) {
    const SotReport report =
        sot_report(fam.base, fam, vectors, kind, params, quad);
    for (const auto& row : report.rows) {
      CHECK(row.residual <= 1e-10);
    }
  }
}

TEST_CASE("SOT residuals shrink along the mollified family for f = 1, g = e0") {
  // The Hankel residual is a variance-type remainder: early members trade a
  // wide smooth ramp for a narrow boundary cliff, so the decay only sets in
  // once the annulus mass is small. At the default M = 6 the last residual
  // is below the first for e0.
  const SpaceParams params = make_params(0.0, 12);
  const DiskQuadrature quad = pipeline_quad(params, 2 * 12 + 16);
  const ApproximantFamily fam =
      build_family(lib("one"), 6, FamilyKind::mollified_truncation);
  const std::vector<TestVector> vectors = {default_test_vectors(params, 1)[0]};
  const FamilyWorkspace ws =
      FamilyWorkspace::build(lib("one"), fam, params, quad);
  for (OperatorKind kind : {OperatorKind::hankel, OperatorKind::toeplitz,
                            OperatorKind::hankel_adjoint,
                            OperatorKind::toeplitz_adjoint}) {
    const SotReport report =
        sot_report(lib("one"), fam, vectors, kind, params, quad, &ws);
    CHECK(report.residual(6, "e0") <= report.residual(1, "e0") + 1e-12);
  }
}

TEST_CASE("SOT residuals shrink along the dilation family for harmonic f") {
  const SpaceParams params = make_params(0.0, 12);
  const DiskQuadrature quad = pipeline_quad(params, 2 * 12 + 16);
  const ApproximantFamily fam =
      build_family(lib("harmonic-arg"), 8, FamilyKind::harmonic_dilation);
  const std::vector<TestVector> vectors = {
      default_test_vectors(params, 1)[0]};  // e0
  const SotReport report = sot_report(lib("harmonic-arg"), fam, vectors,
                                      OperatorKind::hankel, params, quad);
  CHECK(report.residual(8, "e0") < 0.05);
  CHECK(report.residual(8, "e0") <= report.residual(1, "e0"));
}

TEST_CASE("workspace difference sections match direct assembly") {
  const SpaceParams params = make_params(0.0, 10);
  const int np = 2 * 10 + 16;
  const DiskQuadrature quad = pipeline_quad(params, np);
  const Symbol& f = lib("sector");
  const ApproximantFamily fam =
      build_family(f, 3, FamilyKind::mollified_truncation);
  const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);

  const std::vector<double> a = {0.2, 0.3, 0.5};
  // Direct assembly from the combined symbol d = f - sum a psi.
  std::vector<Symbol> members = fam.members;
  Symbol d;
  d.eval = [&f, members, a](cplx z) {
    cplx acc = f.eval(z);
    for (std::size_t m = 0; m < members.size(); ++m) {
      acc -= a[m] * members[m].eval(z);
    }
    return acc;
  };
  d.sup_bound = 2.0;
  d.provenance = "difference";
  const FiniteSection direct = hankel_gram_section(d, params, quad, np,
                                                   kernels::Exec::parallel,
                                                   GramMethod::fast);
  const Eigen::MatrixXcd combined = ws.difference_gram(a, 3, 10);
  CHECK((direct.matrix - combined).cwiseAbs().maxCoeff() <= 1e-10);

  const FiniteSection direct_t = toeplitz_section(d, params, quad);
  const Eigen::MatrixXcd combined_t = ws.difference_toeplitz(a, 3, 10);
  CHECK((direct_t.matrix - combined_t).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("objective is convex along random segments") {
  const SpaceParams params = make_params(0.0, 16);
  const int np = 2 * 16 + 16;
  const DiskQuadrature quad = pipeline_quad(params, np);
  const Symbol& f = lib("sector");
  const ApproximantFamily fam =
      build_family(f, 3, FamilyKind::mollified_truncation);
  const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);

  for (OperatorFamily kind : {OperatorFamily::hankel, OperatorFamily::toeplitz}) {
    const DistanceObjective objective(ws, kind, 3, 16);
    SplitMix64 rng(kind == OperatorFamily::hankel ? 17 : 18);
    auto random_simplex = [&rng](int dim) {
      std::vector<double> a(static_cast<std::size_t>(dim));
      double sum = 0.0;
      for (double& v : a) {
        v = -std::log(1.0 - rng.next_double());
        sum += v;
      }
      for (double& v : a) v /= sum;
      return a;
    };
    for (int trial = 0; trial < 25; ++trial) {
      const auto a = random_simplex(3);
      const auto b = random_simplex(3);
      const double lambda = rng.next_double();
      std::vector<double> mix(3);
      for (int i = 0; i < 3; ++i) mix[i] = lambda * a[i] + (1 - lambda) * b[i];
      const double jmix = objective.value(mix);
      const double bound =
          lambda * objective.value(a) + (1 - lambda) * objective.value(b);
      CHECK(jmix <= bound + 1e-10);
    }
  }
}

TEST_CASE("simplex search basics") {
  const SpaceParams params = make_params(0.0, 12);
  const int np = 2 * 12 + 16;
  const DiskQuadrature quad = pipeline_quad(params, np);
  const Symbol& f = lib("sector");

  SUBCASE("family of size one returns the only vertex") {
    const std::vector<std::pair<double, double>> sched = {{0.75, 0.1}};
    const ApproximantFamily fam =
        build_family(f, 1, FamilyKind::mollified_truncation, &sched);
    const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);
    const DistanceObjective objective(ws, OperatorFamily::hankel, 1, 12);
    const SearchResult r =
        simplex_search(objective, SimplexWeights::uniform(1), SearchOptions{});
    CHECK(r.weights.a.size() == 1);
    CHECK(r.weights.a[0] == doctest::Approx(1.0));
    CHECK(r.value == doctest::Approx(objective.value({1.0})));
  }

  SUBCASE("base equal to a member drives J to zero at that vertex") {
    const ApproximantFamily fam =
        build_family(f, 3, FamilyKind::mollified_truncation);
    ApproximantFamily self = fam;
    self.base = fam.members[1];
    const FamilyWorkspace ws =
        FamilyWorkspace::build(self.base, self, params, quad, np);
    const DistanceObjective objective(ws, OperatorFamily::hankel, 3, 12);
    CHECK(objective.value({0.0, 1.0, 0.0}) <= 1e-6);
    SearchOptions opts;
    opts.tol = 1e-8;
    const SearchResult r =
        simplex_search(objective, SimplexWeights::vertex(3, 1), opts);
    CHECK(r.value <= 1e-6);
    CHECK(r.weights.a[1] >= 0.99);
  }
}

TEST_CASE("vertex domination and minimizer segment") {
  const SpaceParams params = make_params(0.0, 16);
  const int np = 2 * 16 + 16;
  const DiskQuadrature quad = pipeline_quad(params, np);
  const Symbol& f = lib("sector");
  const ApproximantFamily fam =
      build_family(f, 4, FamilyKind::mollified_truncation);
  const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);
  const DistanceObjective objective(ws, OperatorFamily::hankel, 4, 16);

  SearchOptions opts;
  opts.tol = 1e-9;
  opts.max_iters = 600;
  const SearchResult from_uniform =
      simplex_search(objective, SimplexWeights::uniform(4), opts);

  double vertex_min = std::numeric_limits<double>::infinity();
  int best_vertex = 0;
  for (int v = 0; v < 4; ++v) {
    const double jv = objective.value(SimplexWeights::vertex(4, v).a);
    if (jv < vertex_min) {
      vertex_min = jv;
      best_vertex = v;
    }
  }
  const SearchResult from_vertex =
      simplex_search(objective, SimplexWeights::vertex(4, best_vertex), opts);

  const double best = std::min(from_uniform.value, from_vertex.value);
  CHECK(best <= vertex_min + 1e-9);

  // Both runs end near the same optimal value; the whole segment between
  // them stays there (convex sublevel sets).
  CHECK(std::abs(from_uniform.value - from_vertex.value) <= 1e-6);
  for (double s : {0.25, 0.5, 0.75}) {
    const SimplexWeights mid =
        interpolate(from_uniform.weights, from_vertex.weights, s);
    CHECK(objective.value(mid.a) <= best + 1e-6);
  }
}

TEST_CASE("distance certificate for an analytic base symbol") {
  const SpaceParams params = make_params(0.0, 10);
  const int np = 2 * 10 + 16;
  const DiskQuadrature quad = pipeline_quad(params, np);
  const Symbol& f = lib("z");
  const ApproximantFamily fam =
      build_family(f, 2, FamilyKind::mollified_truncation);
  const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);
  EssentialNormEstimate est;  // analytic: both sandwich sides are zero
  est.lower = 0.0;
  est.upper = 0.0;
  const SimplexWeights w = SimplexWeights::uniform(2);
  const DistanceCertificate cert = distance_certificate(
      f, fam, w, OperatorFamily::hankel, params, quad, &ws, &est);
  CHECK(cert.value <= 0.35);
  CHECK(cert.lower_consistent);
  CHECK(cert.boundary.vanishes);
  REQUIRE(!cert.sigma_tails.empty());
}

TEST_CASE("distance certificate collapses for a compact-symbol base") {
  const SpaceParams params = make_params(0.0, 24);
  const int np = 2 * 24 + 16;
  const DiskQuadrature quad = build_quadrature(params, 2 * (np + 8), 128, 1024);
  const Symbol& f = lib("one-minus-abs2");
  const ApproximantFamily fam =
      build_family(f, 4, FamilyKind::mollified_truncation);
  const FamilyWorkspace ws = FamilyWorkspace::build(f, fam, params, quad, np);
  const DistanceObjective objective(ws, OperatorFamily::hankel, 4, 24);
  SearchOptions opts;
  const SearchResult best =
      simplex_search(objective, SimplexWeights::uniform(4), opts);
  const DistanceCertificate cert = distance_certificate(
      f, fam, best.weights, OperatorFamily::hankel, params, quad, &ws);
  CHECK(cert.value <= 0.05);
  // Berezin lower at the default radii peaks at radius 0.9 (value 0.131,
  // decaying toward the boundary as the operator is compact).
  CHECK(cert.lower <= 0.14);
  CHECK(cert.boundary.vanishes);
  // sigma tails of H_phi decay: compactness probe.
  const auto& tail = cert.sigma_tails.back().second;
  REQUIRE(tail.size() >= 8);
  CHECK(tail[tail.size() / 2] < 0.35 * tail[0] + 1e-12);
}

TEST_CASE("sot report serialization") {
  SotReport report;
  report.kind = OperatorKind::hankel;
  report.rows = {{1, "e0", 0.5}, {2, "e0", 0.25}};
  const std::string json = report.to_json();
  CHECK(json.find("\"operator_kind\": \"H\"") != std::string::npos);
  const std::string csv = report.to_csv();
  CHECK(csv.rfind("n,vector,residual\n", 0) == 0);
  CHECK(csv.find("2,e0,0.25\n") != std::string::npos);
  CHECK_THROWS_AS(report.residual(3, "e0"), std::out_of_range);
}
