#include "tsync/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace tsync {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty())
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

template <int N>
Eigen::Matrix<double, N, 1> parse_vec(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (static_cast<int>(v.size()) != N)
    throw ConfigError(key + ": expected " + std::to_string(N) + " comma-separated values, got " +
                      std::to_string(v.size()));
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

template <int N>
Eigen::Matrix<double, N, N> parse_mat(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  using M = Eigen::Matrix<double, N, N>;
  if (v.size() == 1) return v[0] * M::Identity();
  if (static_cast<int>(v.size()) == N)
    return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data()).asDiagonal();
  if (static_cast<int>(v.size()) == N * N) return Eigen::Map<const Eigen::Matrix<double, N, N, Eigen::RowMajor>>(v.data());
  throw ConfigError(key + ": expected 1, " + std::to_string(N) + " or " + std::to_string(N * N) + " values");
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + text + "'");
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

template <typename Derived>
std::string fmt_list(const Eigen::DenseBase<Derived>& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_num(v(i));
  }
  return s;
}

template <int N>
std::string fmt_mat(const Eigen::Matrix<double, N, N>& m) {
  const Eigen::Matrix<double, N, N> d = m.diagonal().asDiagonal();
  if (m == d) return fmt_list(m.diagonal());
  const Eigen::Matrix<double, N, N, Eigen::RowMajor> rm = m;
  return fmt_list(Eigen::Map<const Eigen::Matrix<double, N * N, 1>>(rm.data()));
}

struct Field {
  std::string name;
  std::function<void(SimConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

#define TSYNC_SCALAR(NAME, MEMBER)                                                                     \
  Field {                                                                                              \
    NAME, [](SimConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_double(k, v); }, \
        [](const SimConfig& c) { return fmt_num(c.MEMBER); }                                           \
  }
#define TSYNC_VEC(NAME, MEMBER, N)                                                                      \
  Field {                                                                                               \
    NAME, [](SimConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_vec<N>(k, v); }, \
        [](const SimConfig& c) { return fmt_list(c.MEMBER); }                                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      TSYNC_SCALAR("robot.m1", robot.m1),
      TSYNC_SCALAR("robot.m2", robot.m2),
      TSYNC_SCALAR("robot.l1", robot.l1),
      TSYNC_SCALAR("robot.l2", robot.l2),
      TSYNC_SCALAR("robot.g", robot.g),
      TSYNC_SCALAR("robot.fv1", robot.fv1),
      TSYNC_SCALAR("robot.fv2", robot.fv2),

      TSYNC_SCALAR("gains.k_r", gains.k_r),
      TSYNC_SCALAR("gains.k_phi", gains.k_phi),
      TSYNC_SCALAR("gains.k_1", gains.k_1),
      TSYNC_SCALAR("gains.k_icl", gains.k_icl),
      Field{"gains.gamma1",
            [](SimConfig& c, const std::string& k, const std::string& v) { c.gains.Gamma1 = parse_mat<2>(k, v); },
            [](const SimConfig& c) { return fmt_mat<2>(c.gains.Gamma1); }},
      Field{"gains.gamma2",
            [](SimConfig& c, const std::string& k, const std::string& v) { c.gains.Gamma2 = parse_mat<7>(k, v); },
            [](const SimConfig& c) { return fmt_mat<7>(c.gains.Gamma2); }},
      TSYNC_SCALAR("gains.alpha_s4", gains.alpha_s4),
      Field{"gains.N", [](SimConfig& c, const std::string& k, const std::string& v) { c.gains.N = parse_int(k, v); },
            [](const SimConfig& c) { return std::to_string(c.gains.N); }},
      TSYNC_SCALAR("gains.delta_t", gains.delta_t),
      TSYNC_SCALAR("gains.T", gains.T),

      TSYNC_VEC("bounds.k_m", bounds.k_m, 2),
      TSYNC_VEC("bounds.k_h", bounds.k_h, 2),

      TSYNC_VEC("trajectory.center", trajectory.center, 2),
      TSYNC_VEC("trajectory.radius", trajectory.radius, 2),
      TSYNC_SCALAR("trajectory.omega", trajectory.omega),
      Field{"trajectory.file",
            [](SimConfig& c, const std::string&, const std::string& v) { c.trajectory_file = trim(v); },
            [](const SimConfig& c) { return c.trajectory_file; }},

      TSYNC_SCALAR("controller.delta_sing", controller.inverse.delta_sing),
      TSYNC_SCALAR("controller.lambda_d", controller.inverse.lambda_d),
      Field{"controller.jdot_estimate_rate",
            [](SimConfig& c, const std::string& k, const std::string& v) {
              c.controller.jdot_estimate_rate = parse_bool(k, v);
            },
            [](const SimConfig& c) { return std::string(c.controller.jdot_estimate_rate ? "true" : "false"); }},

      TSYNC_VEC("diagnostics.k_lk", diagnostics.K_LK, 3),
      TSYNC_VEC("diagnostics.omega", diagnostics.omega, 3),
      TSYNC_SCALAR("diagnostics.lambda_threshold", diagnostics.lambda_threshold),
      TSYNC_SCALAR("diagnostics.safe_epsilon1", diagnostics.safe_epsilon1),
      TSYNC_SCALAR("diagnostics.safe_beta1", diagnostics.safe_beta1),

      TSYNC_SCALAR("sim.duration", duration),
      TSYNC_SCALAR("sim.dt", dt),
      Field{"sim.plant_substeps",
            [](SimConfig& c, const std::string& k, const std::string& v) { c.plant_substeps = parse_int(k, v); },
            [](const SimConfig& c) { return std::to_string(c.plant_substeps); }},
      TSYNC_VEC("sim.zeta_j0", zeta_j0, 2),
      TSYNC_VEC("sim.zeta_y0", zeta_y0, 7),
      TSYNC_VEC("sim.p0", p0, 2),
      Field{"sim.elbow",
            [](SimConfig& c, const std::string& k, const std::string& v) {
              const std::string t = trim(v);
              if (t == "positive")
                c.elbow = Elbow::positive;
              else if (t == "negative")
                c.elbow = Elbow::negative;
              else
                throw ConfigError(k + ": expected 'positive' or 'negative', got '" + v + "'");
            },
            [](const SimConfig& c) { return std::string(c.elbow == Elbow::positive ? "positive" : "negative"); }},
      Field{"sim.seed",
            [](SimConfig& c, const std::string& k, const std::string& v) {
              const std::string t = trim(v);
              const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), c.seed);
              if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
                throw ConfigError(k + ": expected a non-negative integer, got '" + v + "'");
            },
            [](const SimConfig& c) { return std::to_string(c.seed); }},
  };
  return f;
}

#undef TSYNC_SCALAR
#undef TSYNC_VEC

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

std::string resolve_key(const std::string& key) {
  const auto& keys = config_keys();
  if (std::find(keys.begin(), keys.end(), key) != keys.end()) return key;
  if (key.find('.') == std::string::npos) {
    std::string match;
    for (const auto& k : keys) {
      if (k.substr(k.find('.') + 1) == key) {
        if (!match.empty()) throw ConfigError("ambiguous key '" + key + "': use " + match + " or " + k);
        match = k;
      }
    }
    if (!match.empty()) return match;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

KeyValues read_key_values(std::istream& in, const std::string& source_name) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source_name + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  KeyValues kv;
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw ConfigError(source_name + ": key '" + section + "' must appear inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (std::find(config_keys().begin(), config_keys().end(), full) == config_keys().end())
        throw ConfigError(source_name + ": unknown configuration key '" + full + "'");
      kv[full] = value.data();
    }
  }
  return kv;
}

KeyValues read_key_values_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return read_key_values(in, path.string());
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not KEY=VALUE");
    kv[resolve_key(trim(o.substr(0, eq)))] = o.substr(eq + 1);
  }
}

SimConfig config_from_key_values(const KeyValues& kv) {
  SimConfig cfg;
  for (const auto& f : fields()) {
    auto it = kv.find(f.name);
    if (it != kv.end()) f.set(cfg, f.name, it->second);
  }
  for (const auto& [k, v] : kv)
    if (std::find(config_keys().begin(), config_keys().end(), k) == config_keys().end())
      throw ConfigError("unknown configuration key '" + k + "'");
  cfg.validate();
  return cfg;
}

SimConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  KeyValues kv = path.empty() ? KeyValues{} : read_key_values_file(path);
  apply_overrides(kv, overrides);
  return config_from_key_values(kv);
}

SimConfig parse_config_string(const std::string& text, const std::vector<std::string>& overrides) {
  std::istringstream in(text);
  KeyValues kv = read_key_values(in, "<string>");
  apply_overrides(kv, overrides);
  return config_from_key_values(kv);
}

std::string write_config(const SimConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    const auto dot = f.name.find('.');
    const std::string section = f.name.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out += "\n";
      out += "[" + section + "]\n";
      current = section;
    }
    out += f.name.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace tsync
