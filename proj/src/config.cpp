#include "blab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace blab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + v);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("bad seed value for '" + key + "': " + v);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (kv.count(key)) {
      throw ConfigError("duplicate key '" + key + "'");
    }
    kv[key] = value;
  }

  for (const auto& [key, value] : kv) {
    if (key == "alpha") cfg.alpha = to_double(key, value);
    else if (key == "symbol") cfg.symbol = value;
    else if (key == "space.n") cfg.n = to_int(key, value);
    else if (key == "space.fourier_cap") cfg.fourier_cap = to_int(key, value);
    else if (key == "space.radial_cap") cfg.radial_cap = to_int(key, value);
    else if (key == "quad.degree") cfg.quad_degree = to_int(key, value);
    else if (key == "quad.radial_min") cfg.quad_radial_min = to_int(key, value);
    else if (key == "quad.angular_min") cfg.quad_angular_min = to_int(key, value);
    else if (key == "proj.cap") cfg.proj_cap = to_int(key, value);
    else if (key == "operator.kind") cfg.operator_kind = value;
    else if (key == "family.kind") cfg.family_kind = value;
    else if (key == "family.M") cfg.family_m = to_int(key, value);
    else if (key == "schedule.r0") cfg.schedule_r0 = to_double(key, value);
    else if (key == "schedule.ratio") cfg.schedule_ratio = to_double(key, value);
    else if (key == "estimator.radii") {
      cfg.radii.clear();
      for (const auto& item : split(value, ',')) {
        cfg.radii.push_back(to_double(key, item));
      }
    } else if (key == "estimator.caps") {
      cfg.caps.clear();
      for (const auto& item : split(value, ',')) {
        cfg.caps.push_back(to_int(key, item));
      }
    } else if (key == "estimator.angles") cfg.estimator_angles = to_int(key, value);
    else if (key == "search.max_iters") cfg.search_max_iters = to_int(key, value);
    else if (key == "search.tol") cfg.search_tol = to_double(key, value);
    else if (key == "sot.vectors") cfg.sot_vectors = split(value, ',');
    else if (key == "out.dir") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ExperimentConfig::validate() const {
  if (!(alpha > -1.0)) throw ConfigError("alpha must satisfy alpha > -1");
  if (n < 1) throw ConfigError("space.n must be >= 1");
  if (radial_cap < 0) throw ConfigError("space.radial_cap must be >= 0");
  if (operator_kind != "hankel" && operator_kind != "toeplitz") {
    throw ConfigError("operator.kind must be hankel or toeplitz");
  }
  if (family_kind != "mollified-truncation" &&
      family_kind != "harmonic-dilation") {
    throw ConfigError("family.kind must be mollified-truncation or "
                      "harmonic-dilation");
  }
  if (family_m < 1) throw ConfigError("family.M must be >= 1");
  if (!(schedule_r0 > 0.0 && schedule_r0 < 1.0)) {
    throw ConfigError("schedule.r0 must lie in (0,1)");
  }
  if (!(schedule_ratio > 0.0 && schedule_ratio < 1.0)) {
    throw ConfigError("schedule.ratio must lie in (0,1)");
  }
  for (double r : radii) {
    if (!(r > 0.0 && r < 1.0)) {
      throw ConfigError("estimator.radii entries must lie in (0,1)");
    }
  }
  for (int k : caps) {
    if (k < 0 || k >= n) {
      throw ConfigError("estimator.caps entries must satisfy 0 <= K < space.n");
    }
  }
  if (estimator_angles < 1) throw ConfigError("estimator.angles must be >= 1");
  if (search_max_iters < 1) throw ConfigError("search.max_iters must be >= 1");
  if (!(search_tol > 0.0)) throw ConfigError("search.tol must be > 0");
  if (sot_vectors.empty()) throw ConfigError("sot.vectors must be nonempty");
}

std::vector<int> ExperimentConfig::effective_caps() const {
  if (!caps.empty()) return caps;
  std::vector<int> out;
  for (int k = 1; k < 8; ++k) {
    const int cap = k * n / 8;
    if (cap > 0 && cap < n) out.push_back(cap);
  }
  if (out.empty()) out.push_back(0);
  return out;
}

int ExperimentConfig::effective_fourier_cap() const {
  return fourier_cap >= 0 ? fourier_cap : n - 1 + 8;
}

std::vector<std::pair<double, double>> ExperimentConfig::schedule(
    bool with_eps) const {
  std::vector<std::pair<double, double>> out;
  double gap = 1.0 - schedule_r0;
  for (int i = 0; i < family_m; ++i) {
    const double r = 1.0 - gap;
    out.emplace_back(r, with_eps ? gap / 2.0 : 0.0);
    gap *= schedule_ratio;
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "alpha = " << alpha << "\n";
  out << "symbol = " << symbol << "\n";
  out << "space.n = " << n << "\n";
  out << "space.fourier_cap = " << fourier_cap << "\n";
  out << "space.radial_cap = " << radial_cap << "\n";
  out << "quad.degree = " << quad_degree << "\n";
  out << "quad.radial_min = " << quad_radial_min << "\n";
  out << "quad.angular_min = " << quad_angular_min << "\n";
  out << "proj.cap = " << proj_cap << "\n";
  out << "operator.kind = " << operator_kind << "\n";
  out << "family.kind = " << family_kind << "\n";
  out << "family.M = " << family_m << "\n";
  out << "schedule.r0 = " << schedule_r0 << "\n";
  out << "schedule.ratio = " << schedule_ratio << "\n";
  out << "estimator.radii = ";
  for (std::size_t i = 0; i < radii.size(); ++i) {
    out << (i ? "," : "") << radii[i];
  }
  out << "\n";
  if (!caps.empty()) {
    out << "estimator.caps = ";
    for (std::size_t i = 0; i < caps.size(); ++i) {
      out << (i ? "," : "") << caps[i];
    }
    out << "\n";
  }
  out << "estimator.angles = " << estimator_angles << "\n";
  out << "search.max_iters = " << search_max_iters << "\n";
  out << "search.tol = " << search_tol << "\n";
  out << "sot.vectors = ";
  for (std::size_t i = 0; i < sot_vectors.size(); ++i) {
    out << (i ? "," : "") << sot_vectors[i];
  }
  out << "\n";
  if (!out_dir.empty()) out << "out.dir = " << out_dir << "\n";
  out << "seed = " << seed << "\n";
  return out.str();
}

}  // namespace blab
