#include "steinkit/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace steinkit::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (seps.find(ch) != std::string::npos) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> entries(const std::string& text) {
  std::vector<std::string> out;
  for (auto& e : split(text, ",;"))
    if (!e.empty()) out.push_back(e);
  if (out.empty()) throw ConfigError("grid is empty");
  return out;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(what + ": expected a nonnegative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(what + ": out of range '" + s + "'");
  }
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + s + "'");
  }
}

std::vector<std::string> fields(const std::string& entry, std::size_t count, const std::string& what) {
  auto f = split(entry, ":");
  if (f.size() != count) throw ConfigError(what + " grid entry '" + entry + "' needs " + std::to_string(count) + " fields");
  return f;
}

AlphaSpec parse_alpha(const std::string& text, std::uint32_t n) {
  AlphaSpec a;
  a.text = text;
  if (text.rfind("n^", 0) == 0) {
    const std::string expo = text.substr(2);
    const double x = to_double(expo, "alpha exponent");
    a.value = std::pow(static_cast<double>(n), x);
    if (expo.find_first_not_of("0123456789") == std::string::npos) {
      BigInt v;
      mpz_ui_pow_ui(v.get_mpz_t(), n, static_cast<unsigned long>(x));
      a.exact = BigRational(v);
    }
  } else {
    try {
      a.exact = parse_rational(text);
    } catch (const std::exception&) {
      throw ConfigError("alpha: cannot parse '" + text + "'");
    }
    a.value = steinkit::to_double(*a.exact);
  }
  if (!(a.value > 0.0) || !std::isfinite(a.value)) throw ConfigError("alpha must be positive: '" + text + "'");
  return a;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "grid") {
    c.grid = value;
  } else if (key == "samples") {
    c.samples = to_u64(value, "samples");
  } else if (key == "seed") {
    c.seed = to_u64(value, "seed");
  } else if (key == "confidence") {
    c.confidence = to_double(value, "confidence");
  } else if (key == "epsilon") {
    c.epsilon = to_double(value, "epsilon");
  } else if (key == "out") {
    c.out = value;
  } else if (key == "format") {
    if (value == "csv")
      c.format = OutputFormat::csv;
    else if (value == "json")
      c.format = OutputFormat::json;
    else
      throw ConfigError("format must be csv or json, got '" + value + "'");
  } else if (key == "thresholds") {
    auto f = split(value, ",");
    if (f.size() != 3) throw ConfigError("thresholds needs n_bar,m_bar,c_bar");
    c.thresholds.n_bar = to_double(f[0], "n_bar");
    c.thresholds.m_bar = to_double(f[1], "m_bar");
    c.thresholds.c_bar = to_double(f[2], "c_bar");
  } else if (key == "threads") {
    c.threads = static_cast<unsigned>(to_u64(value, "threads"));
  } else if (key == "perturb-kerov") {
    try {
      c.kerov_perturbation = parse_rational(value);
    } catch (const std::exception&) {
      throw ConfigError("perturb-kerov: cannot parse '" + value + "'");
    }
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string line;
  for (unsigned lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
  }
}

std::string default_grid(const std::string& command) {
  if (command == "er-report") return "4:2,100:100,200:200,400:400";
  if (command == "jack-report") return "2:1,16:n^1.5,32:n^1.5,64:n^1.5";
  if (command == "hyp") return "20:5:4,100:30:10";
  if (command == "recursion") return "0.25:1,0.5:1,0.9:0.1";
  return "";
}

void validate(const ExperimentConfig& c) {
  const bool mc = c.command == "er-report" || c.command == "jack-report";
  if (mc && c.samples < 100) throw ConfigError("samples must be at least 100");
  if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw ConfigError("confidence must lie in (0,1)");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (c.command == "jack-report" && !(c.epsilon < 1.0)) throw ConfigError("jack-report needs epsilon in (0,1)");
  if (c.command != "verify" && trim(c.grid).empty()) throw ConfigError("grid is empty");
}

std::vector<ErPoint> parse_er_grid(const std::string& text) {
  std::vector<ErPoint> out;
  for (const auto& e : entries(text)) {
    auto f = fields(e, 2, "er");
    ErPoint p;
    p.n = to_u64(f[0], "n");
    if (!f[1].empty() && f[1].back() == 'n') {
      const std::string lead = f[1].substr(0, f[1].size() - 1);
      const double factor = lead.empty() ? 1.0 : to_double(lead, "m factor");
      const double m = std::round(factor * static_cast<double>(p.n));
      if (!(m >= 1.0)) throw ConfigError("m must be positive in '" + e + "'");
      p.m = static_cast<std::uint64_t>(m);
    } else {
      p.m = to_u64(f[1], "m");
    }
    try {
      ErParams check(p.n, p.m);
    } catch (const std::exception& ex) {
      throw ConfigError("er grid entry '" + e + "': " + ex.what());
    }
    out.push_back(p);
  }
  return out;
}

std::vector<JackPoint> parse_jack_grid(const std::string& text) {
  std::vector<JackPoint> out;
  for (const auto& e : entries(text)) {
    auto f = fields(e, 2, "jack");
    JackPoint p;
    const auto n = to_u64(f[0], "n");
    if (n < 2 || n > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("jack needs n >= 2 in '" + e + "'");
    p.n = static_cast<std::uint32_t>(n);
    p.alpha = parse_alpha(f[1], p.n);
    out.push_back(p);
  }
  return out;
}

std::vector<HypPoint> parse_hyp_grid(const std::string& text) {
  std::vector<HypPoint> out;
  for (const auto& e : entries(text)) {
    auto f = fields(e, 3, "hyp");
    try {
      out.push_back({HypergeometricParams(to_u64(f[0], "N"), to_u64(f[1], "m"), to_u64(f[2], "n"))});
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError("hyp grid entry '" + e + "': " + ex.what());
    }
  }
  return out;
}

std::vector<RecursionPoint> parse_recursion_grid(const std::string& text) {
  std::vector<RecursionPoint> out;
  for (const auto& e : entries(text)) {
    auto f = fields(e, 2, "recursion");
    RecursionPoint p{to_double(f[0], "q"), to_double(f[1], "c")};
    if (!(p.q > 0.0 && p.q < 1.0)) throw ConfigError("q must lie in (0,1) in '" + e + "'");
    if (!(p.c >= 0.0)) throw ConfigError("c must be nonnegative in '" + e + "'");
    out.push_back(p);
  }
  return out;
}

}  // namespace steinkit::cli
