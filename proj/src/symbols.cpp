#include "blab/symbols.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace blab {

namespace {

constexpr double kPi = std::numbers::pi;

double bump_profile(double s2) {
  // exp(-1/(1-s^2)) for s^2 < 1, zero at and beyond the rim.
  if (s2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s2));
}

// Gauss-Legendre nodes/weights on (0,1) via Newton on P_n. Only used for the
// small local mollifier rule.
void gauss_legendre_01(int n, std::vector<double>& nodes,
                       std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    weights[static_cast<std::size_t>(n - 1 - i)] =
        1.0 / ((1.0 - x * x) * pp * pp);
  }
}

struct LocalRule {
  // Displacements d_k (|d_k| < 1) and weights summing to exactly the
  // leftover of the normalization; scaled so the total mass is 1.
  std::vector<cplx> displacements;
  std::vector<double> weights;
};

LocalRule make_local_rule(const MollifyResolution& res) {
  LocalRule rule;
  std::vector<double> s, gw;
  gauss_legendre_01(res.radial, s, gw);
  std::vector<double> radial_w(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    radial_w[i] = gw[i] * s[i] * bump_profile(s[i] * s[i]);
    total += radial_w[i];
  }
  rule.displacements.reserve(s.size() * static_cast<std::size_t>(res.angular));
  rule.weights.reserve(rule.displacements.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = radial_w[i] / (total * res.angular);
    for (int t = 0; t < res.angular; ++t) {
      rule.displacements.push_back(
          std::polar(s[i], 2.0 * kPi * t / res.angular));
      rule.weights.push_back(w);
    }
  }
  return rule;
}

void spot_check_bound(const Symbol& sym) {
  constexpr int kRadial = 24, kAngular = 48;
  for (int i = 1; i <= kRadial; ++i) {
    const double r = (i - 0.5) / kRadial;
    for (int t = 0; t < kAngular; ++t) {
      const cplx z = std::polar(r, 2.0 * kPi * t / kAngular);
      const double v = std::abs(sym.eval(z));
      if (!(v <= sym.sup_bound * (1.0 + 1e-12) + 1e-300)) {
        throw std::runtime_error("symbol '" + sym.provenance +
                                 "' exceeds its sup bound at |z|=" +
                                 std::to_string(r));
      }
    }
  }
}

}  // namespace

Symbol make_symbol(std::function<cplx(cplx)> eval, double sup_bound,
                   std::string provenance,
                   std::optional<double> vanishes_beyond, bool harmonic) {
  Symbol s;
  s.eval = std::move(eval);
  s.sup_bound = sup_bound;
  s.vanishes_beyond = vanishes_beyond;
  s.harmonic = harmonic;
  s.provenance = std::move(provenance);
  spot_check_bound(s);
  return s;
}

Symbol make_polynomial_symbol(const MonomialCoeffs& coeffs, double sup_bound,
                              std::string provenance, bool harmonic) {
  auto shared = std::make_shared<const MonomialCoeffs>(coeffs);
  Symbol s = make_symbol([shared](cplx z) { return shared->eval(z); },
                         sup_bound, std::move(provenance), std::nullopt,
                         harmonic);
  s.poly = shared;
  return s;
}

MollifierSpec MollifierSpec::make(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("mollifier scale must lie in (0,1)");
  }
  MollifierSpec spec;
  spec.epsilon = epsilon;
  // c = 1 / int_0^1 exp(-1/(1-u)) du, dense midpoint rule in u = s^2.
  constexpr int kN = 200000;
  double mass = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double u = (i + 0.5) / kN;
    mass += bump_profile(u);
  }
  mass /= kN;
  spec.normalization = 1.0 / mass;
  return spec;
}

Symbol truncate(const Symbol& f, double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::domain_error("truncation radius must lie in (0,1)");
  }
  Symbol out;
  auto base = f.eval;
  out.eval = [base, r](cplx z) -> cplx {
    if (std::abs(z) >= r) return 0.0;
    return base(z);
  };
  out.sup_bound = f.sup_bound;
  out.vanishes_beyond =
      f.vanishes_beyond ? std::min(*f.vanishes_beyond, r) : r;
  out.harmonic = false;
  std::ostringstream tag;
  tag << "truncate:r=" << r << "/" << f.provenance;
  out.provenance = tag.str();
  return out;
}

Symbol mollify(const Symbol& f, const MollifierSpec& spec,
               MollifyResolution res) {
  const double eps = spec.epsilon;
  auto rule = std::make_shared<const LocalRule>(make_local_rule(res));
  auto base = std::make_shared<const Symbol>(f);

  std::optional<double> support;
  if (f.vanishes_beyond && *f.vanishes_beyond + eps < 1.0) {
    support = *f.vanishes_beyond + eps;
  }

  auto eval = [base, rule, eps, support](cplx z) -> cplx {
    if (support && std::abs(z) >= *support) return 0.0;
    cplx acc = 0.0;
    const std::size_t n = rule->displacements.size();
    for (std::size_t k = 0; k < n; ++k) {
      const cplx w = z + eps * rule->displacements[k];
      // f is extended by zero outside the disk.
      if (std::abs(w) < 1.0) acc += rule->weights[k] * base->eval(w);
    }
    return acc;
  };

  Symbol out;
  out.eval = eval;
  out.sup_bound = f.sup_bound;
  out.vanishes_beyond = support;
  out.harmonic = false;
  std::ostringstream tag;
  tag << "mollify:eps=" << eps << "/" << f.provenance;
  out.provenance = tag.str();

  // Accuracy self-estimate: refined rule vs working rule on sample points.
  MollifyResolution fine{res.radial * 2, res.angular * 2};
  auto fine_rule = std::make_shared<const LocalRule>(make_local_rule(fine));
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const cplx z = std::polar(0.15 * i, 0.7 * i);
    cplx a = eval(z), b = 0.0;
    for (std::size_t k = 0; k < fine_rule->displacements.size(); ++k) {
      const cplx w = z + eps * fine_rule->displacements[k];
      if (std::abs(w) < 1.0) b += fine_rule->weights[k] * base->eval(w);
    }
    worst = std::max(worst, std::abs(a - b));
  }
  out.accuracy_warning = worst > 1e-8 * std::max(f.sup_bound, 1e-30);
  return out;
}

Symbol dilate(const Symbol& f, double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::domain_error("dilation radius must lie in (0,1)");
  }
  Symbol out;
  auto base = f.eval;
  out.eval = [base, r](cplx z) { return base(r * z); };
  out.sup_bound = f.sup_bound;
  out.harmonic = f.harmonic;
  if (f.vanishes_beyond && *f.vanishes_beyond / r <= 1.0) {
    out.vanishes_beyond = *f.vanishes_beyond / r;
  }
  std::ostringstream tag;
  tag << "dilate:r=" << r << "/" << f.provenance;
  out.provenance = tag.str();
  return out;
}

BoundaryCheck boundary_vanishing_check(const Symbol& f, double ring, double tol,
                                       int samples) {
  if (!(ring > 0.0 && ring <= 1.0)) {
    throw std::domain_error("ring radius must lie in (0,1]");
  }
  BoundaryCheck out;
  if (f.vanishes_beyond && *f.vanishes_beyond <= ring) {
    out.vanishes = true;
    out.max_abs = 0.0;
    return out;
  }
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    const cplx z = std::polar(ring, 2.0 * kPi * t / samples);
    worst = std::max(worst, std::abs(f.eval(z)));
  }
  out.max_abs = worst;
  out.vanishes = worst <= tol;
  return out;
}

double max_laplacian_residual(const Symbol& f, double h, double rmax,
                              int samples) {
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double r = rmax * i / samples;
    for (int t = 0; t < samples; ++t) {
      const cplx z = std::polar(r, 2.0 * kPi * t / samples);
      const cplx stencil = f.eval(z + h) + f.eval(z - h) + f.eval(z + cplx(0, h)) +
                           f.eval(z - cplx(0, h)) - 4.0 * f.eval(z);
      worst = std::max(worst, std::abs(stencil));
    }
  }
  return worst;
}

const std::map<std::string, Symbol>& test_symbol_library() {
  static const std::map<std::string, Symbol> lib = [] {
    std::map<std::string, Symbol> m;

    m.emplace("one", make_polynomial_symbol(MonomialCoeffs::monomial(0, 0), 1.0,
                                            "one", true));
    m.emplace("z", make_polynomial_symbol(MonomialCoeffs::monomial(1, 0), 1.0,
                                          "z", true));
    m.emplace("conj-z", make_polynomial_symbol(MonomialCoeffs::monomial(0, 1),
                                               1.0, "conj-z", true));
    m.emplace("conj-z2", make_polynomial_symbol(MonomialCoeffs::monomial(0, 2),
                                                1.0, "conj-z2", true));
    m.emplace("z-conj-z", make_polynomial_symbol(MonomialCoeffs::monomial(1, 1),
                                                 1.0, "z-conj-z", false));

    MonomialCoeffs one_minus;
    one_minus.add(0, 0, 1.0).add(1, 1, -1.0);
    Symbol oma = make_polynomial_symbol(one_minus, 1.0, "one-minus-abs2", false);
    oma.vanishes_beyond = 1.0;
    m.emplace("one-minus-abs2", oma);

    // Indicator of the open sector 0 < arg z < pi; value 0 on the edges.
    m.emplace("sector",
              make_symbol([](cplx z) -> cplx { return z.imag() > 0.0 ? 1.0 : 0.0; },
                          1.0, "sector"));

    // (2/pi) Im log((1+z)/(1-z)): harmonic, bounded by 1, jumps at +-1.
    m.emplace("harmonic-arg",
              make_symbol(
                  [](cplx z) -> cplx {
                    const cplx num = 1.0 + z, den = 1.0 - z;
                    if (std::abs(den) < 1e-14 || std::abs(num) < 1e-14) {
                      return 0.0;  // jump points: fixed measure-zero convention
                    }
                    return (2.0 / kPi) * std::arg(num / den);
                  },
                  1.0, "harmonic-arg", std::nullopt, true));

    m.emplace("re-z", make_symbol([](cplx z) -> cplx { return z.real(); }, 1.0,
                                  "re-z", std::nullopt, true));

    m.emplace("radial-osc",
              make_symbol(
                  [](cplx z) -> cplx {
                    const double r = std::abs(z);
                    if (r >= 1.0) return 0.0;
                    return std::sin(1.0 / (1.0 - r));
                  },
                  1.0, "radial-osc"));
    return m;
  }();
  return lib;
}

namespace {

double parse_param(const std::string& stage, const std::string& key) {
  const auto pos = stage.find(':');
  if (pos == std::string::npos) {
    throw std::invalid_argument("symbol transformation '" + stage +
                                "' is missing parameters");
  }
  const std::string args = stage.substr(pos + 1);
  const std::string prefix = key + "=";
  if (args.rfind(prefix, 0) != 0) {
    throw std::invalid_argument("expected '" + prefix + "...' in '" + stage +
                                "'");
  }
  std::size_t used = 0;
  const double v = std::stod(args.substr(prefix.size()), &used);
  if (used == 0) {
    throw std::invalid_argument("bad numeric parameter in '" + stage + "'");
  }
  return v;
}

}  // namespace

std::string grid_cache_to_json(const std::string& grid_id,
                               const std::vector<cplx>& values) {
  nlohmann::ordered_json j;
  j["grid_id"] = grid_id;
  auto& arr = j["values"] = nlohmann::ordered_json::array();
  for (const cplx& v : values) arr.push_back({v.real(), v.imag()});
  return j.dump();
}

std::pair<std::string, std::vector<cplx>> grid_cache_from_json(
    const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<cplx> values;
  for (const auto& pair : j.at("values")) {
    values.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return {j.at("grid_id").get<std::string>(), values};
}

Symbol parse_symbol_spec(const std::string& spec) {
  std::vector<std::string> stages;
  std::size_t start = 0;
  while (true) {
    const auto pos = spec.find('/', start);
    if (pos == std::string::npos) {
      stages.push_back(spec.substr(start));
      break;
    }
    stages.push_back(spec.substr(start, pos - start));
    start = pos + 1;
  }
  if (stages.empty() || stages.back().empty()) {
    throw std::invalid_argument("empty symbol spec");
  }
  const auto& lib = test_symbol_library();
  const auto it = lib.find(stages.back());
  if (it == lib.end()) {
    throw std::invalid_argument("unknown symbol '" + stages.back() + "'");
  }
  Symbol sym = it->second;
  for (auto stage = stages.rbegin() + 1; stage != stages.rend(); ++stage) {
    if (stage->rfind("truncate", 0) == 0) {
      sym = truncate(sym, parse_param(*stage, "r"));
    } else if (stage->rfind("mollify", 0) == 0) {
      sym = mollify(sym, MollifierSpec::make(parse_param(*stage, "eps")));
    } else if (stage->rfind("dilate", 0) == 0) {
      sym = dilate(sym, parse_param(*stage, "r"));
    } else {
      throw std::invalid_argument("unknown symbol transformation '" + *stage +
                                  "'");
    }
  }
  return sym;
}

}  // namespace blab
