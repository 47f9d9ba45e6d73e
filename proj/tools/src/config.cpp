#include "chiralq_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace chiralq::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return QuenchSpec::kInf;
  if (v == "-inf") return -QuenchSpec::kInf;
  double x = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long to_int(const std::string& key, const std::string& v) {
  long x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected on|off, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::string s = v;
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string choice(const std::string& key, const std::string& v,
                   std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = key + ": expected one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.m_z", [](RunConfig& c, auto& k, auto& v) { c.model.m_z = to_double(k, v); }},
      {"model.t_0", [](RunConfig& c, auto& k, auto& v) { c.model.t_0 = to_double(k, v); }},
      {"model.t_so", [](RunConfig& c, auto& k, auto& v) { c.model.t_so = to_double(k, v); }},
      {"model.h_4", [](RunConfig& c, auto& k, auto& v) { c.model.h_4 = to_double(k, v); }},
      {"quench.axis", [](RunConfig& c, auto& k, auto& v) { c.quench.axis = static_cast<int>(to_int(k, v)); }},
      {"quench.depth", [](RunConfig& c, auto& k, auto& v) { c.quench.depth = to_double(k, v); }},
      {"mesh.grid_step", [](RunConfig& c, auto& k, auto& v) { c.grid_step = to_double(k, v); }},
      {"mesh.level", [](RunConfig& c, auto& k, auto& v) { c.level = static_cast<int>(to_int(k, v)); }},
      {"mesh.probe_step", [](RunConfig& c, auto& k, auto& v) { c.probe_step = to_double(k, v); }},
      {"mesh.n_probe", [](RunConfig& c, auto& k, auto& v) { c.n_probe = static_cast<int>(to_int(k, v)); }},
      {"mesh.smooth_width", [](RunConfig& c, auto& k, auto& v) { c.smooth_width = to_double(k, v); }},
      {"mesh.field", [](RunConfig& c, auto& k, auto& v) { c.exact_field = choice(k, v, {"exact", "grid"}) == "exact"; }},
      {"mesh.seed", [](RunConfig& c, auto& k, auto& v) { c.triangle_seed = choice(k, v, {"patch", "triangle"}) == "triangle"; }},
      {"noise.enabled", [](RunConfig& c, auto& k, auto& v) { c.noise = to_bool(k, v); }},
      {"noise.n_lo", [](RunConfig& c, auto& k, auto& v) { c.n_lo = to_double(k, v); }},
      {"noise.n_hi", [](RunConfig& c, auto& k, auto& v) { c.n_hi = to_double(k, v); }},
      {"noise.repetitions", [](RunConfig& c, auto& k, auto& v) { c.repetitions = static_cast<int>(to_int(k, v)); }},
      {"noise.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"noise.trials", [](RunConfig& c, auto& k, auto& v) { c.trials = static_cast<int>(to_int(k, v)); }},
      {"noise.count_model", [](RunConfig& c, auto& k, auto& v) { c.poisson = choice(k, v, {"normal", "poisson"}) == "poisson"; }},
      {"noise.signal", [](RunConfig& c, auto& k, auto& v) { c.windowed_signal = choice(k, v, {"dephased", "windowed"}) == "windowed"; }},
      {"noise.window_start", [](RunConfig& c, auto& k, auto& v) { c.window_start = to_double(k, v); }},
      {"noise.window_end", [](RunConfig& c, auto& k, auto& v) { c.window_end = to_double(k, v); }},
      {"noise.n_times", [](RunConfig& c, auto& k, auto& v) { c.n_times = static_cast<int>(to_int(k, v)); }},
      {"polarization.k", [](RunConfig& c, auto& k, auto& v) {
         const auto xs = to_list(k, v);
         if (xs.size() != 3) throw ConfigError(k + ": expected three components");
         c.pol_k = Vec3(xs[0], xs[1], xs[2]);
       }},
      {"polarization.t_start", [](RunConfig& c, auto& k, auto& v) { c.t_start = to_double(k, v); }},
      {"polarization.t_end", [](RunConfig& c, auto& k, auto& v) { c.t_end = to_double(k, v); }},
      {"polarization.samples", [](RunConfig& c, auto& k, auto& v) { c.t_samples = static_cast<int>(to_int(k, v)); }},
      {"polarization.rate_fast", [](RunConfig& c, auto& k, auto& v) { c.rate_fast = to_double(k, v); }},
      {"polarization.rate_slow", [](RunConfig& c, auto& k, auto& v) { c.rate_slow = to_double(k, v); }},
      {"charges.depth", [](RunConfig& c, auto& k, auto& v) { c.charge_depth = to_double(k, v); }},
      {"charges.step", [](RunConfig& c, auto& k, auto& v) { c.charge_step = to_double(k, v); }},
      {"charges.level", [](RunConfig& c, auto& k, auto& v) { c.charge_level = static_cast<int>(to_int(k, v)); }},
      {"transition.m_lo", [](RunConfig& c, auto& k, auto& v) { c.m_lo = to_double(k, v); }},
      {"transition.m_hi", [](RunConfig& c, auto& k, auto& v) { c.m_hi = to_double(k, v); }},
      {"transition.n_scan", [](RunConfig& c, auto& k, auto& v) { c.n_scan = static_cast<int>(to_int(k, v)); }},
      {"transition.tolerance", [](RunConfig& c, auto& k, auto& v) { c.m_tolerance = to_double(k, v); }},
      {"transition.track_depths", [](RunConfig& c, auto& k, auto& v) { c.track_depths = to_list(k, v); }},
      {"transition.noisy_depths", [](RunConfig& c, auto& k, auto& v) { c.noisy_depths = to_list(k, v); }},
      {"phase.m_lo", [](RunConfig& c, auto& k, auto& v) { c.phase_lo = to_double(k, v); }},
      {"phase.m_hi", [](RunConfig& c, auto& k, auto& v) { c.phase_hi = to_double(k, v); }},
      {"phase.step", [](RunConfig& c, auto& k, auto& v) { c.phase_step = to_double(k, v); }},
      {"phase.level", [](RunConfig& c, auto& k, auto& v) { c.phase_level = static_cast<int>(to_int(k, v)); }},
      {"output.dir", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
  };
  return table;
}

nlohmann::ordered_json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key,
                   const std::string& value) {
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(n) + ": repeated key '" + key + "'");
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  try {
    quench.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("quench: ") + e.what());
  }
  const double cells = 1.0 / grid_step;
  require(grid_step > 0.0 && grid_step <= 0.5 &&
              std::abs(cells - std::round(cells)) < 1e-9 * cells,
          "mesh.grid_step: must divide 1 (units of pi) and be at most 0.5");
  require(level >= 0 && level <= 7, "mesh.level: 0..7");
  require(probe_step > 0.0 && probe_step < 0.5, "mesh.probe_step: in (0, 0.5)");
  require(n_probe >= 2, "mesh.n_probe: at least 2");
  require(smooth_width >= 0.0, "mesh.smooth_width: nonnegative");
  require(n_lo > 0.0 && n_hi >= n_lo, "noise.n_lo, noise.n_hi: 0 < n_lo <= n_hi");
  require(repetitions > 0, "noise.repetitions: positive");
  require(trials >= 100, "noise.trials: at least 100");
  require(window_end > window_start && window_start >= 0.0,
          "noise.window_start, noise.window_end: 0 <= start < end");
  require(n_times >= 1, "noise.n_times: positive");
  require(pol_k.allFinite(), "polarization.k: finite");
  require(t_end > t_start, "polarization.t_end: t-range is empty");
  require(t_samples >= 2, "polarization.samples: at least 2");
  require(rate_fast >= 0.0 && rate_slow >= 0.0, "polarization.rate_*: nonnegative");
  require(charge_depth > 0.0, "charges.depth: positive or inf");
  require(charge_step > 0.0 && charge_step <= 0.5, "charges.step: in (0, 0.5]");
  require(charge_level >= 0 && charge_level <= 6, "charges.level: 0..6");
  require(m_hi > m_lo && m_lo > 0.0, "transition.m_lo, m_hi: 0 < m_lo < m_hi");
  require(n_scan >= 2, "transition.n_scan: at least 2");
  require(m_tolerance > 0.0, "transition.tolerance: positive");
  require(track_depths.size() >= 2, "transition.track_depths: at least two");
  for (double d : track_depths) require(d > 0.0, "transition.track_depths: positive");
  require(noisy_depths.size() >= 2, "transition.noisy_depths: at least two");
  for (double d : noisy_depths) require(d > 0.0, "transition.noisy_depths: positive");
  require(phase_hi >= phase_lo && phase_step > 0.0, "phase: m_lo <= m_hi, step > 0");
  require(phase_level >= 0 && phase_level <= 6, "phase.level: 0..6");
  require(!out_dir.empty(), "output.dir: empty");
}

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json j;
  j["model.m_z"] = model.m_z;
  j["model.t_0"] = model.t_0;
  j["model.t_so"] = model.t_so;
  j["model.h_4"] = model.h_4;
  j["quench.axis"] = quench.axis;
  j["quench.depth"] = number(quench.depth);
  j["mesh.grid_step"] = grid_step;
  j["mesh.level"] = level;
  j["mesh.probe_step"] = probe_step;
  j["mesh.n_probe"] = n_probe;
  j["mesh.smooth_width"] = smooth_width;
  j["mesh.field"] = exact_field ? "exact" : "grid";
  j["mesh.seed"] = triangle_seed ? "triangle" : "patch";
  j["noise.enabled"] = noise ? "on" : "off";
  j["noise.n_lo"] = n_lo;
  j["noise.n_hi"] = n_hi;
  j["noise.repetitions"] = repetitions;
  j["noise.seed"] = seed;
  j["noise.trials"] = trials;
  j["noise.count_model"] = poisson ? "poisson" : "normal";
  j["noise.signal"] = windowed_signal ? "windowed" : "dephased";
  j["noise.window_start"] = window_start;
  j["noise.window_end"] = window_end;
  j["noise.n_times"] = n_times;
  j["polarization.k"] = {pol_k.x(), pol_k.y(), pol_k.z()};
  j["polarization.t_start"] = t_start;
  j["polarization.t_end"] = t_end;
  j["polarization.samples"] = t_samples;
  j["polarization.rate_fast"] = rate_fast;
  j["polarization.rate_slow"] = rate_slow;
  j["charges.depth"] = number(charge_depth);
  j["charges.step"] = charge_step;
  j["charges.level"] = charge_level;
  j["transition.m_lo"] = m_lo;
  j["transition.m_hi"] = m_hi;
  j["transition.n_scan"] = n_scan;
  j["transition.tolerance"] = m_tolerance;
  j["transition.track_depths"] = track_depths;
  j["transition.noisy_depths"] = noisy_depths;
  j["phase.m_lo"] = phase_lo;
  j["phase.m_hi"] = phase_hi;
  j["phase.step"] = phase_step;
  j["phase.level"] = phase_level;
  j["output.dir"] = out_dir.string();
  return j;
}

}  // namespace chiralq::cli
