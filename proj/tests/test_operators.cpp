#include <cmath>
#include <complex>

#include "blab/operators.hpp"
#include "blab/rng.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

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

// Brute-force Hankel Gram of a symbol: dense midpoint grid, no shared code
// with the library's ring-transform assembly.
std::vector<double> brute_hankel_singvals(const std::function<cplx(cplx)>& f,
                                          double alpha, int n, int np,
                                          int nu = 4000, int nth = 128) {
  const double pi2 = 2.0 * std::numbers::pi;
  std::vector<double> norms(static_cast<std::size_t>(np));
  for (int k = 0; k < np; ++k) norms[k] = analytic_basis_norm(k, alpha);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(np, n);
  for (int iu = 0; iu < nu; ++iu) {
    const double u = (iu + 0.5) / nu;
    const double r = std::sqrt(u);
    const double wu = (1.0 + alpha) * std::pow(1.0 - u, alpha) / nu;
    for (int it = 0; it < nth; ++it) {
      const cplx z = std::polar(r, pi2 * it / nth);
      const cplx fv = f(z);
      const double w = wu / nth;
      std::vector<cplx> powers(static_cast<std::size_t>(np));
      cplx acc = 1.0;
      for (int k = 0; k < np; ++k) {
        powers[k] = acc / norms[k];
        acc *= z;
      }
      for (int j = 0; j < n; ++j) {
        const cplx fj = fv * powers[j];
        for (int i = 0; i < n; ++i) {
          b(i, j) += w * fj * std::conj(fv * powers[i]);
        }
        for (int m = 0; m < np; ++m) {
          c(m, j) += w * fj * std::conj(powers[m]);
        }
      }
    }
  }
  Eigen::MatrixXcd gram = b - c.adjoint() * c;
  gram = 0.5 * (gram + Eigen::MatrixXcd(gram.adjoint()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                     Eigen::EigenvaluesOnly);
  std::vector<double> sv;
  for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;) {
    sv.push_back(std::sqrt(std::max(es.eigenvalues()(i), 0.0)));
  }
  return sv;
}

}  // namespace

TEST_CASE("Hankel oracle: brute-force sigma of conj(z) matches the closed form") {
  // Independent derivation of sigma_k = 1/sqrt((k+1)(k+2)) before the main
  // construction is trusted with it.
  const auto sv = brute_hankel_singvals(
      [](cplx z) { return std::conj(z); }, 0.0, 6, 10);
  for (int k = 0; k < 6; ++k) {
    const double want = 1.0 / std::sqrt((k + 1.0) * (k + 2.0));
    CHECK(sv[static_cast<std::size_t>(k)] ==
          doctest::Approx(want).epsilon(2e-6));
  }
}

TEST_CASE("toeplitz sections of basic symbols") {
  const SpaceParams params = make_params(0.0, 8);
  const DiskQuadrature quad = build_quadrature(params, 64);

  SUBCASE("constant symbol gives the identity") {
    const FiniteSection s = toeplitz_section(lib("one"), params, quad);
    CHECK((s.matrix - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("symbol z fills the subdiagonal with sqrt((j+1)/(j+2))") {
    const FiniteSection s = toeplitz_section(lib("z"), params, quad);
    for (int j = 0; j < 7; ++j) {
      const double want = std::sqrt((j + 1.0) / (j + 2.0));
      CHECK(std::abs(s.matrix(j + 1, j) - want) < 1e-10);
    }
    CHECK(std::abs(s.matrix(0, 0)) < 1e-12);
    CHECK(std::abs(s.matrix(0, 1)) < 1e-12);
  }
  SUBCASE("symbol |z|^2 is diagonal with (j+1)/(j+2)") {
    const FiniteSection s = toeplitz_section(lib("z-conj-z"), params, quad);
    for (int j = 0; j < 8; ++j) {
      CHECK(std::abs(s.matrix(j, j) - (j + 1.0) / (j + 2.0)) < 1e-10);
      for (int i = 0; i < 8; ++i) {
        if (i != j) CHECK(std::abs(s.matrix(i, j)) < 1e-12);
      }
    }
  }
  SUBCASE("operator norm of a scaled identity") {
    Symbol three = make_polynomial_symbol(MonomialCoeffs::monomial(0, 0, 3.0),
                                          3.0, "three");
    const FiniteSection s = toeplitz_section(three, params, quad);
    CHECK(operator_norm(s) == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("hankel gram sections") {
  const SpaceParams params = make_params(0.0, 12);
  const DiskQuadrature quad = build_quadrature(params, 2 * (2 * 12 + 16) + 8);

  SUBCASE("analytic and constant symbols give the zero operator") {
    for (const char* name : {"z", "one"}) {
      const FiniteSection s = hankel_gram_section(lib(name), params, quad);
      CHECK(operator_norm(s) <= 1e-9);
    }
  }
  SUBCASE("conj(z) singular values match 1/sqrt((k+1)(k+2))") {
    const FiniteSection s = hankel_gram_section(lib("conj-z"), params, quad);
    const auto sv = singular_values(s);
    REQUIRE(sv.size() == 12);
    for (int k = 0; k < 12; ++k) {
      const double want = 1.0 / std::sqrt((k + 1.0) * (k + 2.0));
      CHECK(std::abs(sv[static_cast<std::size_t>(k)] - want) < 1e-8);
    }
    CHECK_FALSE(s.psd_warning);
    CHECK(s.asymmetry < 1e-12);
  }
}

TEST_CASE("explicit complement construction agrees with the gram route") {
  for (const char* name : {"conj-z", "conj-z2", "z-conj-z"}) {
    const SpaceParams params = make_params(0.0, 8);
    const DiskQuadrature quad = build_quadrature(params, 2 * (2 * 8 + 16) + 12);
    const FiniteSection gram = hankel_gram_section(lib(name), params, quad);
    const FiniteSection expl = hankel_explicit_section(lib(name), params);
    const auto sv_gram = singular_values(gram);
    auto sv_expl = singular_values(expl);
    sv_expl.resize(sv_gram.size(), 0.0);
    for (std::size_t k = 0; k < sv_gram.size(); ++k) {
      CHECK(std::abs(sv_gram[k] - sv_expl[k]) < 1e-8);
    }
  }
}

TEST_CASE("explicit construction requires a polynomial symbol and sane caps") {
  const SpaceParams params = make_params(0.0, 8);
  CHECK_THROWS_AS(hankel_explicit_section(lib("sector"), params),
                  std::invalid_argument);
  SpaceParams tight = params;
  tight.fourier_cap = 5;  // below n_analytic - 1
  CHECK_THROWS_AS(hankel_explicit_section(lib("conj-z"), tight),
                  std::invalid_argument);
  SpaceParams deep = params;
  deep.radial_cap = 14;  // moment Gram conditioning blows past 1e12
  CHECK_THROWS_AS(hankel_explicit_section(lib("conj-z"), deep),
                  std::runtime_error);
}

TEST_CASE("section linearity and adjoint identity") {
  const SpaceParams params = make_params(0.5, 6);
  const DiskQuadrature quad = build_quadrature(params, 80);

  MonomialCoeffs combo;
  combo.add(0, 1, cplx(2.0, 1.0)).add(1, 1, cplx(-0.5, 0.25));
  const Symbol fg = make_polynomial_symbol(combo, 3.5, "combo");
  const FiniteSection s_fg = toeplitz_section(fg, params, quad);
  const FiniteSection s_f = toeplitz_section(lib("conj-z"), params, quad);
  const FiniteSection s_g = toeplitz_section(lib("z-conj-z"), params, quad);
  const Eigen::MatrixXcd lin =
      cplx(2.0, 1.0) * s_f.matrix + cplx(-0.5, 0.25) * s_g.matrix;
  CHECK((s_fg.matrix - lin).cwiseAbs().maxCoeff() < 1e-10);

  // toeplitz_section(conj f) equals the conjugate transpose.
  const Symbol conj_combo =
      make_polynomial_symbol(combo.conjugated(), 3.5, "conj-combo");
  const FiniteSection s_conj = toeplitz_section(conj_combo, params, quad);
  CHECK((s_conj.matrix - s_fg.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

  // Explicit Hankel sections are linear in the symbol too.
  const FiniteSection h_fg = hankel_explicit_section(fg, params);
  const FiniteSection h_f = hankel_explicit_section(lib("conj-z"), params);
  const FiniteSection h_g = hankel_explicit_section(lib("z-conj-z"), params);
  const Eigen::MatrixXcd hlin =
      cplx(2.0, 1.0) * h_f.matrix + cplx(-0.5, 0.25) * h_g.matrix;
  CHECK((h_fg.matrix - hlin).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("norm bound: sections never exceed the symbol sup bound") {
  const SpaceParams params = make_params(1.0, 16);
  const DiskQuadrature quad = build_quadrature(params, 2 * (2 * 16 + 16) + 8,
                                               64, 512);
  for (const char* name : {"sector", "one-minus-abs2", "harmonic-arg"}) {
    const Symbol& f = lib(name);
    CHECK(operator_norm(toeplitz_section(f, params, quad)) <=
          f.sup_bound * (1.0 + 1e-9));
    CHECK(operator_norm(hankel_gram_section(f, params, quad)) <=
          f.sup_bound * (1.0 + 1e-9));
  }
}

TEST_CASE("mobius transform") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const cplx z = std::polar(0.99 * rng.next_double(),
                              2.0 * std::numbers::pi * rng.next_double());
    const cplx w = std::polar(0.99 * rng.next_double(),
                              2.0 * std::numbers::pi * rng.next_double());
    CHECK(std::abs(mobius(z, mobius(z, w)) - w) < 1e-13);
    CHECK(std::abs(mobius(z, 0.0) - z) < 1e-15);
    CHECK(std::abs(mobius(z, z)) < 1e-15);
  }
  CHECK(std::abs(mobius(0.5, -0.5) - cplx(0.8)) < 1e-15);
  CHECK_THROWS_AS(mobius(cplx(1.0, 0.0), 0.0), std::domain_error);
}

TEST_CASE("berezin probes on reference symbols") {
  const SpaceParams params = make_params(0.0, 16);
  const DiskQuadrature quad = build_quadrature(params, 140, 64, 512);

  SUBCASE("analytic and constant symbols have zero defect") {
    for (const char* name : {"z", "one"}) {
      for (const cplx z : {cplx(0.0, 0.0), cplx(0.5, 0.2), cplx(-0.3, 0.6)}) {
        CHECK(berezin_hankel_defect(lib(name), z, params, quad) < 1e-9);
      }
    }
  }
  SUBCASE("toeplitz functional of the constant is 1") {
    CHECK(berezin_toeplitz(lib("one"), cplx(0.3, 0.1), params, quad) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("conj z at the origin") {
    // phi_0(w) = -w, so the defect is ||conj w|| = 1/sqrt(2).
    CHECK(berezin_hankel_defect(lib("conj-z"), 0.0, params, quad) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(berezin_toeplitz(lib("conj-z"), 0.0, params, quad) < 1e-10);
  }
  SUBCASE("sector indicator at the origin") {
    // <chi, 1> = 1/2 so ||P chi|| >= 1/2.
    CHECK(berezin_toeplitz(lib("sector"), 0.0, params, quad) >= 0.5 - 1e-6);
  }
}

TEST_CASE("essential norm estimate: analytic symbol collapses") {
  const SpaceParams params = make_params(0.0, 16);
  const DiskQuadrature quad = build_quadrature(params, 400, 128, 512);
  // The pullback of an analytic polynomial through phi_z has Taylor tail
  // ~ |z|^m; the projection cap must absorb it at the outermost radius.
  EssnormOpts opts;
  opts.proj_cap = 192;
  const EssentialNormEstimate est = essential_norm_estimate(
      lib("z"), OperatorFamily::hankel, {0.5, 0.7, 0.9}, {4, 8, 12}, params,
      quad, opts);
  CHECK(est.lower <= 1e-8);
  CHECK(est.upper <= 1e-8);
  CHECK(est.sandwich_consistent);
  CHECK_FALSE(est.cap_warning);
}

TEST_CASE("essential norm estimate: monotone tail and witnesses") {
  const SpaceParams params = make_params(0.0, 24);
  const DiskQuadrature quad = build_quadrature(params, 2 * (64 + 8), 96, 1024);
  const EssentialNormEstimate est = essential_norm_estimate(
      lib("sector"), OperatorFamily::hankel, {0.7, 0.9}, {2, 6, 10, 14, 18},
      params, quad);
  // Tail norms of nested compressions never increase.
  for (std::size_t i = 1; i < est.scan_upper.size(); ++i) {
    CHECK(est.scan_upper[i].second <= est.scan_upper[i - 1].second + 1e-12);
  }
  CHECK(est.lower > 0.1);
  CHECK(std::abs(est.lower_witness) > 0.0);
  // The sector pullback at z = t real is the lower half-disk indicator for
  // every t, so the lower scan is essentially flat across radii.
  REQUIRE(est.scan_lower.size() == 2);
  CHECK(est.scan_lower[0][1] ==
        doctest::Approx(est.scan_lower[1][1]).epsilon(1e-3));
}

TEST_CASE("toeplitz essential norm functional of the sector at the origin") {
  const SpaceParams params = make_params(0.0, 12);
  const DiskQuadrature quad = build_quadrature(params, 120, 64, 512);
  const EssentialNormEstimate est = essential_norm_estimate(
      lib("sector"), OperatorFamily::toeplitz, {0.5, 0.8}, {4, 8}, params, quad);
  CHECK(est.lower >= 0.5 - 1e-6);  // >= ||P(chi o phi)|| >= |<chi,1>|
  CHECK(est.upper <= 1.0 + 1e-9);
}

TEST_CASE("singular values of toeplitz identity and zero sections") {
  const SpaceParams params = make_params(0.0, 5);
  const DiskQuadrature quad = build_quadrature(params, 40);
  const auto sv_id = singular_values(toeplitz_section(lib("one"), params, quad));
  for (double s : sv_id) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  MonomialCoeffs zero;
  const Symbol zsym = make_polynomial_symbol(zero, 1e-30, "zero");
  const auto sv_zero = singular_values(toeplitz_section(zsym, params, quad));
  for (double s : sv_zero) CHECK(s <= 1e-14);
}

TEST_CASE("section JSON serialization carries entries row-major") {
  const SpaceParams params = make_params(0.0, 3);
  const DiskQuadrature quad = build_quadrature(params, 24);
  const FiniteSection s = toeplitz_section(lib("z"), params, quad);
  const std::string json = s.to_json();
  CHECK(json.find("\"kind\": \"toeplitz\"") != std::string::npos);
  CHECK(json.find("\"N\": 3") != std::string::npos);
  CHECK(json.find("entries") != std::string::npos);
}
