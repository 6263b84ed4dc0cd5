#include "gwpi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/gw_engine.hpp"

namespace gwpi {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& text, int line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, text), line);
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text, int line) {
  // Accept integer-valued scientific notation such as 1e6.
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  const double d = to_double(key, text, line);
  if (d < 0 || d != std::floor(d) || d > 9.0e18) {
    throw ConfigError(fmt::format("{}: '{}' is not a nonnegative integer", key, text), line);
  }
  return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& text, int line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text), line);
}

void require(bool ok, const std::string& message, int line = 0) {
  if (!ok) throw ConfigError(message, line);
}

SlowlyVaryingFn make_sv(const SvChoice& choice, const char* which) {
  if (choice.kind == "constant") return SlowlyVaryingFn::constant(choice.scale);
  if (choice.kind == "logarithmic") return SlowlyVaryingFn::logarithmic(choice.scale);
  if (choice.kind == "power_corrected") {
    return SlowlyVaryingFn::power_corrected(choice.scale, choice.weight, choice.rate);
  }
  throw ConfigError(fmt::format("{}_sv: unknown kind '{}'", which, choice.kind));
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto& m = t["model"];
    m["family"] = [](RunConfig& c, const std::string& v, int line) {
      require(v == "constant_sv" || v == "analytic",
              fmt::format("family: expected constant_sv or analytic, got '{}'", v), line);
      c.model.family = v;
    };
    m["nu"] = [](RunConfig& c, const std::string& v, int l) { c.model.nu = to_double("nu", v, l); };
    m["c"] = [](RunConfig& c, const std::string& v, int l) { c.model.c = to_double("c", v, l); };
    m["delta"] = [](RunConfig& c, const std::string& v, int l) {
      c.model.delta = to_double("delta", v, l);
    };
    m["lambda"] = [](RunConfig& c, const std::string& v, int l) {
      c.model.lambda = to_double("lambda", v, l);
    };
    for (const char* which : {"offspring", "immigration"}) {
      const std::string w = which;
      auto pick = [w](RunConfig& c) -> SvChoice& {
        return w == "offspring" ? c.model.offspring_sv : c.model.immigration_sv;
      };
      m[w + "_sv"] = [pick](RunConfig& c, const std::string& v, int) { pick(c).kind = v; };
      m[w + "_scale"] = [pick, w](RunConfig& c, const std::string& v, int l) {
        pick(c).scale = to_double(w + "_scale", v, l);
      };
      m[w + "_weight"] = [pick, w](RunConfig& c, const std::string& v, int l) {
        pick(c).weight = to_double(w + "_weight", v, l);
      };
      m[w + "_rate"] = [pick, w](RunConfig& c, const std::string& v, int l) {
        pick(c).rate = to_double(w + "_rate", v, l);
      };
    }
    auto& r = t["run"];
    r["K"] = [](RunConfig& c, const std::string& v, int l) { c.K = to_uint("K", v, l); };
    r["tol"] = [](RunConfig& c, const std::string& v, int l) { c.tol = to_double("tol", v, l); };
    r["nmax"] = [](RunConfig& c, const std::string& v, int l) { c.nmax = to_uint("nmax", v, l); };
    r["seed"] = [](RunConfig& c, const std::string& v, int l) { c.seed = to_uint("seed", v, l); };
    r["workers"] = [](RunConfig& c, const std::string& v, int l) {
      c.workers = to_uint("workers", v, l);
    };
    r["reps"] = [](RunConfig& c, const std::string& v, int l) { c.reps = to_uint("reps", v, l); };
    r["horizon"] = [](RunConfig& c, const std::string& v, int l) {
      c.horizon = to_uint("horizon", v, l);
    };
    r["table_size"] = [](RunConfig& c, const std::string& v, int l) {
      c.table_size = to_uint("table_size", v, l);
    };
    r["i"] = [](RunConfig& c, const std::string& v, int l) { c.i = to_uint("i", v, l); };
    r["j"] = [](RunConfig& c, const std::string& v, int l) { c.j = to_uint("j", v, l); };
    r["n"] = [](RunConfig& c, const std::string& v, int l) { c.n = to_uint("n", v, l); };
    r["s_grid"] = [](RunConfig& c, const std::string& v, int l) { c.s_grid = parse_grid(v, l); };
    r["out"] = [](RunConfig& c, const std::string& v, int) { c.out_dir = v; };
    r["richardson"] = [](RunConfig& c, const std::string& v, int l) {
      c.richardson = to_bool("richardson", v, l);
    };
    r["functional_inverse"] = [](RunConfig& c, const std::string& v, int l) {
      c.functional_inverse = to_bool("functional_inverse", v, l);
    };
    return t;
  }();
  return table;
}

}  // namespace

ModelSpec ModelConfig::build() const {
  try {
    if (family == "constant_sv") return ModelSpec::constant_sv(nu, c, delta, lambda);
    return ModelSpec::analytic(nu, make_sv(offspring_sv, "offspring"), delta,
                               make_sv(immigration_sv, "immigration"));
  } catch (const ModelError& e) {
    throw ConfigError(fmt::format("invalid model: {}", e.what()));
  }
}

std::vector<double> RunConfig::grid() const { return s_grid.empty() ? default_s_grid() : s_grid; }

void RunConfig::validate() const {
  require(K >= 2 && K <= (std::size_t{1} << 16), fmt::format("K = {} outside [2, 65536]", K));
  require(tol > 0.0 && tol < 1.0, fmt::format("tol = {} outside (0, 1)", tol));
  require(nmax >= 1 && nmax <= kDefaultIterationCap,
          fmt::format("nmax = {} outside [1, {}]", nmax, kDefaultIterationCap));
  require(workers >= 1 && workers <= 1024, fmt::format("workers = {} outside [1, 1024]", workers));
  require(reps >= 1, "reps must be >= 1");
  require(horizon >= 1, "horizon must be >= 1");
  require(table_size >= 2, "table_size must be >= 2");
  for (double s : s_grid) require(s >= 0.0 && s < 1.0, fmt::format("s_grid value {} outside [0,1)", s));
}

std::vector<double> parse_grid(const std::string& text, int line) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    const double v = to_double("s_grid", t, line);
    require(v >= 0.0 && v < 1.0, fmt::format("s_grid value {} outside [0,1)", v), line);
    out.push_back(v);
  }
  require(!out.empty(), "s_grid is empty", line);
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string section = "model";
  std::string raw;
  int line = 0;
  int model_line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      require(text.back() == ']', fmt::format("{}: malformed section header '{}'", source, text), line);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      require(setters().count(section) > 0, fmt::format("{}: unknown section [{}]", source, section),
              line);
      continue;
    }
    const auto eq = text.find('=');
    require(eq != std::string::npos, fmt::format("{}: expected key = value, got '{}'", source, text),
            line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const auto& keys = setters().at(section);
    const auto it = keys.find(key);
    require(it != keys.end(), fmt::format("{}: unknown key '{}' in [{}]", source, key, section), line);
    require(!value.empty(), fmt::format("{}: empty value for '{}'", source, key), line);
    it->second(cfg, value, line);
    if (section == "model" && model_line == 0) model_line = line;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  try {
    (void)cfg.model.build();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()), model_line);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  RunConfig cfg = parse_config(in, path.string());
  cfg.model_path = std::filesystem::absolute(path);
  cfg.out_dir = std::filesystem::absolute(cfg.out_dir);
  return cfg;
}

}  // namespace gwpi
