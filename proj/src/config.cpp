#include "iekf/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace iekf {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(line, "not a number: '" + tok + "'");
  return v;
}

Eigen::VectorXd parse_vector(const std::string& value, int line) {
  const auto toks = split(value, ", \t");
  if (toks.empty()) throw ConfigError(line, "empty vector");
  Eigen::VectorXd v(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) v(i) = parse_double(toks[i], line);
  return v;
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "off" || value == "no") return false;
  throw ConfigError(line, "expected true or false, got '" + value + "'");
}

struct Entry {
  std::string value;
  int line;
};

using Setter = void (*)(Scenario&, const std::string&, int);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model",
       [](Scenario& sc, const std::string& v, int line) {
         if (v == "car") {
           sc.model = ModelKind::Car;
         } else if (v == "nav") {
           sc.model = ModelKind::Nav;
           sc.observation = ObservationKind::Landmarks;
         } else {
           throw ConfigError(line, "model must be car or nav");
         }
       }},
      {"observation",
       [](Scenario& sc, const std::string& v, int line) {
         if (v == "gps") {
           sc.observation = ObservationKind::Gps;
         } else if (v == "landmarks") {
           sc.observation = ObservationKind::Landmarks;
         } else {
           throw ConfigError(line, "observation must be gps or landmarks");
         }
       }},
      {"filters", [](Scenario& sc, const std::string& v, int) { sc.filters = split(v, ", \t"); }},
      {"seed",
       [](Scenario& sc, const std::string& v, int line) {
         std::uint64_t s = 0;
         const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
         if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
           throw ConfigError(line, "seed must be a non-negative integer");
         }
         sc.seed = s;
       }},
      {"output.name",
       [](Scenario& sc, const std::string& v, int line) {
         if (v.find_first_of("/\\") != std::string::npos) throw ConfigError(line, "output.name must be a plain name");
         sc.name = v;
       }},
      {"covariance_update",
       [](Scenario& sc, const std::string& v, int line) {
         if (v == "standard") {
           sc.covariance_update = CovarianceUpdate::Standard;
         } else if (v == "joseph") {
           sc.covariance_update = CovarianceUpdate::Joseph;
         } else {
           throw ConfigError(line, "covariance_update must be standard or joseph");
         }
       }},
      {"landmarks",
       [](Scenario& sc, const std::string& v, int line) {
         sc.landmarks = parse_landmarks(v, line);
       }},
      {"gravity",
       [](Scenario& sc, const std::string& v, int line) {
         const Eigen::VectorXd g = parse_vector(v, line);
         if (g.size() != 3) throw ConfigError(line, "gravity needs 3 components");
         sc.gravity = g;
       }},
      {"trajectory.diameter",
       [](Scenario& sc, const std::string& v, int line) { sc.diameter = parse_double(v, line); }},
      {"trajectory.duration",
       [](Scenario& sc, const std::string& v, int line) { sc.duration = parse_double(v, line); }},
      {"rates.imu", [](Scenario& sc, const std::string& v, int line) { sc.imu_rate = parse_double(v, line); }},
      {"rates.obs", [](Scenario& sc, const std::string& v, int line) { sc.obs_rate = parse_double(v, line); }},
      {"noise.inject", [](Scenario& sc, const std::string& v, int line) { sc.inject_noise = parse_bool(v, line); }},
      {"init.mode",
       [](Scenario& sc, const std::string& v, int line) {
         if (v == "fixed") {
           sc.init_mode = InitMode::Fixed;
         } else if (v == "random") {
           sc.init_mode = InitMode::Random;
         } else {
           throw ConfigError(line, "init.mode must be fixed or random");
         }
       }},
      {"init.sigma", [](Scenario& sc, const std::string& v, int line) { sc.init_sigma = parse_vector(v, line); }},
      {"tuning.Q_diag", [](Scenario& sc, const std::string& v, int line) { sc.Q_diag = parse_vector(v, line); }},
      {"tuning.N_diag", [](Scenario& sc, const std::string& v, int line) { sc.N_diag = parse_vector(v, line); }},
      {"tuning.P0_diag", [](Scenario& sc, const std::string& v, int line) { sc.P0_diag = parse_vector(v, line); }},
  };
  return table;
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> parse_landmarks(const std::string& value, int line) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& chunk : split(value, ";")) {
    if (trim(chunk).empty()) continue;
    out.push_back(parse_vector(chunk, line));
  }
  if (out.empty()) throw ConfigError(line, "empty landmark list");
  return out;
}

Scenario parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!setters().count(key)) throw ConfigError(line, "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(line, "missing value for '" + key + "'");
    if (entries.count(key)) throw ConfigError(line, "duplicate key '" + key + "'");
    entries[key] = {value, line};
  }
  for (const char* required : {"model", "init.sigma", "tuning.Q_diag", "tuning.N_diag", "tuning.P0_diag"}) {
    if (!entries.count(required)) throw ConfigError(0, std::string("missing required key '") + required + "'");
  }

  Scenario sc;
  sc.filters.clear();
  // The model goes first since it changes the defaults of other keys.
  setters().at("model")(sc, entries.at("model").value, entries.at("model").line);
  for (const auto& [key, e] : entries) {
    if (key != "model") setters().at(key)(sc, e.value, e.line);
  }
  if (sc.filters.empty()) sc.filters = {"iekf", sc.model == ModelKind::Car ? "ekf" : "mekf"};
  try {
    sc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(0, e.what());
  }
  return sc;
}

Scenario parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config '" + path + "'");
  return parse_config(in);
}

std::string format_config(const Scenario& sc) {
  std::ostringstream os;
  os << "model = " << (sc.model == ModelKind::Car ? "car" : "nav") << '\n';
  os << "observation = " << (sc.observation == ObservationKind::Gps ? "gps" : "landmarks") << '\n';
  os << "filters =";
  for (std::size_t i = 0; i < sc.filters.size(); ++i) os << (i ? ", " : " ") << sc.filters[i];
  os << '\n';
  os << "seed = " << sc.seed << '\n';
  os << "output.name = " << sc.name << '\n';
  os << "covariance_update = " << (sc.covariance_update == CovarianceUpdate::Joseph ? "joseph" : "standard") << '\n';
  if (!sc.landmarks.empty()) {
    os << "landmarks =";
    for (std::size_t i = 0; i < sc.landmarks.size(); ++i) os << (i ? "; " : " ") << join(sc.landmarks[i]);
    os << '\n';
  }
  if (sc.model == ModelKind::Nav) os << "gravity = " << join(sc.gravity) << '\n';
  os << "trajectory.diameter = " << format_double(sc.diameter) << '\n';
  os << "trajectory.duration = " << format_double(sc.duration) << '\n';
  os << "rates.imu = " << format_double(sc.imu_rate) << '\n';
  os << "rates.obs = " << format_double(sc.obs_rate) << '\n';
  os << "noise.inject = " << (sc.inject_noise ? "true" : "false") << '\n';
  os << "init.mode = " << (sc.init_mode == InitMode::Random ? "random" : "fixed") << '\n';
  os << "init.sigma = " << join(sc.init_sigma) << '\n';
  os << "tuning.Q_diag = " << join(sc.Q_diag) << '\n';
  os << "tuning.N_diag = " << join(sc.N_diag) << '\n';
  os << "tuning.P0_diag = " << join(sc.P0_diag) << '\n';
  return os.str();
}

}  // namespace iekf
