#include "wbp/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wbp/errors.hpp"

namespace wbp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for '" + key + "': " + v);
  }
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::istringstream iss(v);
  std::string tok;
  while (iss >> tok) out.push_back(parse_double(tok, key));
  return out;
}

// "prob : w1 w2 ..." rows for discrete_table outcomes.
DiscreteTable::Outcome parse_outcome(const std::string& v) {
  std::size_t colon = v.find(':');
  if (colon == std::string::npos)
    throw ConfigError("config: outcome rows use 'prob : w1 w2 ...', got: " + v);
  DiscreteTable::Outcome o;
  o.prob = parse_double(trim(v.substr(0, colon)), "outcome");
  o.weights = parse_double_list(trim(v.substr(colon + 1)), "outcome");
  return o;
}

}  // namespace

OffspringLaw ExperimentConfig::law() const {
  if (family == "iid_scaled_uniform") return OffspringLaw(IidScaledUniform{b});
  if (family == "log_normal") return OffspringLaw(LogNormalWeights{b, sigma2});
  if (family == "poisson_gw") return OffspringLaw(PoissonGW{lambda});
  if (family == "discrete_table") return OffspringLaw(DiscreteTable{outcomes});
  throw ConfigError("config: unknown law family '" + family + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.r_set.clear();
  std::istringstream in(text);
  std::string line, section;
  bool saw_law = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      if (section != "law" && section != "experiment" && section != "output")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (section == "law") {
      saw_law = true;
      if (key == "family")
        cfg.family = value;
      else if (key == "b")
        cfg.b = static_cast<int>(parse_long(value, key));
      else if (key == "sigma2")
        cfg.sigma2 = parse_double(value, key);
      else if (key == "lambda")
        cfg.lambda = parse_double(value, key);
      else if (key == "outcome")
        cfg.outcomes.push_back(parse_outcome(value));
      else
        throw ConfigError("config: unknown [law] key '" + key + "'");
    } else if (section == "experiment") {
      if (key == "p")
        cfg.p = parse_double(value, key);
      else if (key == "a")
        cfg.a = parse_double(value, key);
      else if (key == "n_max")
        cfg.n_max = static_cast<int>(parse_long(value, key));
      else if (key == "horizon")
        cfg.horizon = static_cast<int>(parse_long(value, key));
      else if (key == "reps")
        cfg.reps = parse_long(value, key);
      else if (key == "cap")
        cfg.cap = static_cast<std::size_t>(parse_long(value, key));
      else if (key == "r_set")
        cfg.r_set = parse_double_list(value, key);
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, key));
      else if (key == "workers")
        cfg.workers = static_cast<int>(parse_long(value, key));
      else
        throw ConfigError("config: unknown [experiment] key '" + key + "'");
    } else if (section == "output") {
      if (key == "dir")
        cfg.out_dir = value;
      else
        throw ConfigError("config: unknown [output] key '" + key + "'");
    } else {
      throw ConfigError("config: key outside any section at line " +
                        std::to_string(lineno));
    }
  }
  if (!saw_law) throw ConfigError("config: missing [law] section");

  // Range validation happens before any simulation starts.
  if (!(cfg.p > 1.0)) throw ConfigError("config: p must be > 1");
  if (!(cfg.a > 0.0)) throw ConfigError("config: a must be > 0");
  if (cfg.n_max < 0) throw ConfigError("config: n_max must be >= 0");
  if (cfg.horizon < 2) throw ConfigError("config: horizon must be >= 2");
  if (cfg.reps < 1) throw ConfigError("config: reps must be >= 1");
  if (cfg.cap < 1) throw ConfigError("config: cap must be >= 1");
  if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
  for (double r : cfg.r_set)
    if (!(r > 0.0)) throw ConfigError("config: r_set entries must be > 0");
  try {
    (void)cfg.law();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: invalid law: ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[law]\n";
  out << "family = " << cfg.family << "\n";
  if (cfg.family == "iid_scaled_uniform" || cfg.family == "log_normal")
    out << "b = " << cfg.b << "\n";
  if (cfg.family == "log_normal")
    out << "sigma2 = " << format_full(cfg.sigma2) << "\n";
  if (cfg.family == "poisson_gw")
    out << "lambda = " << format_full(cfg.lambda) << "\n";
  for (const auto& o : cfg.outcomes) {
    out << "outcome = " << format_full(o.prob) << " :";
    for (double w : o.weights) out << " " << format_full(w);
    out << "\n";
  }
  out << "\n[experiment]\n";
  out << "p = " << format_full(cfg.p) << "\n";
  out << "a = " << format_full(cfg.a) << "\n";
  out << "n_max = " << cfg.n_max << "\n";
  out << "horizon = " << cfg.horizon << "\n";
  out << "reps = " << cfg.reps << "\n";
  out << "cap = " << cfg.cap << "\n";
  if (!cfg.r_set.empty()) {
    out << "r_set =";
    for (double r : cfg.r_set) out << " " << format_full(r);
    out << "\n";
  }
  out << "seed = " << cfg.seed << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.out_dir << "\n";
  return out.str();
}

}  // namespace wbp
