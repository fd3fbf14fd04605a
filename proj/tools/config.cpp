#include "config.hpp"

#include "rslimits/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

namespace rslimits::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kCommands = {"sweep", "threshold", "fixedpoints", "amp", "oracle", "figures"};

const std::set<std::string> kKeys = {
    "command", "prior_u", "prior_v", "alpha",       "lambdas",      "lambda",           "bracket",
    "tol",     "quad_order", "damping", "se_tol",   "max_iter",     "n",                "m",
    "t_max",   "coupling", "schedule", "se_init",  "dump_instance", "num_samples", "h", "negative_control",
    "seed",    "threads",  "out"};

double number(const json &j, const char *key) {
  if (!j.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("'") + key + "' must be finite");
  return v;
}

std::int64_t integer(const json &j, const char *key) {
  if (!j.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return j.get<std::int64_t>();
}

double positive(const json &j, const char *key) {
  const double v = number(j, key);
  if (!(v > 0.0)) throw ConfigError(std::string("'") + key + "' must be > 0");
  return v;
}

std::vector<double> parse_grid(const json &j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto &v : j) out.push_back(number(v, "lambdas"));
  } else if (j.is_object()) {
    for (const auto &[k, v] : j.items())
      if (k != "start" && k != "stop" && k != "step") throw ConfigError("'lambdas' grid: unknown key '" + k + "'");
    if (!j.contains("start") || !j.contains("stop") || !j.contains("step"))
      throw ConfigError("'lambdas' grid needs start, stop and step");
    const double start = number(j["start"], "lambdas.start");
    const double stop = number(j["stop"], "lambdas.stop");
    const double step = positive(j["step"], "lambdas.step");
    if (stop < start) throw ConfigError("'lambdas' grid: stop < start");
    const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw ConfigError("'lambdas' grid has more than 10^6 points");
    for (std::int64_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    throw ConfigError("'lambdas' must be an array or {start, stop, step}");
  }
  if (out.empty()) throw ConfigError("'lambdas' is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) throw ConfigError("'lambdas' entries must be >= 0");
    if (i > 0 && !(out[i] > out[i - 1])) throw ConfigError("'lambdas' must be strictly increasing");
  }
  return out;
}

void ensure_writable(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".rslimits_write_probe";
  {
    std::ofstream os(probe);
    if (!os) throw ConfigError("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

} // namespace

std::string sha256_hex(const std::string &data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

DiscretePrior parse_prior(const json &spec) {
  if (!spec.is_object() || spec.empty()) throw ConfigError("prior spec must be a non-empty object");
  try {
    if (spec.contains("two_point")) {
      if (spec.size() != 1) throw ConfigError("'two_point' prior takes no other keys");
      return two_point_prior(number(spec["two_point"], "two_point"));
    }
    if (spec.contains("product")) {
      const auto &parts = spec["product"];
      if (spec.size() != 1 || !parts.is_array() || parts.size() != 2)
        throw ConfigError("'product' prior must be a list of two prior specs");
      return product_prior(parse_prior(parts[0]), parse_prior(parts[1]));
    }
    if (spec.contains("atoms") && spec.contains("probs")) {
      if (spec.size() != 2) throw ConfigError("atoms/probs prior takes no other keys");
      std::vector<std::vector<double>> atoms;
      std::vector<double> probs;
      if (!spec["atoms"].is_array() || !spec["probs"].is_array())
        throw ConfigError("'atoms' and 'probs' must be arrays");
      for (const auto &a : spec["atoms"]) {
        std::vector<double> pt;
        if (a.is_number()) {
          pt.push_back(number(a, "atoms"));
        } else if (a.is_array()) {
          for (const auto &x : a) pt.push_back(number(x, "atoms"));
        } else {
          throw ConfigError("each atom must be a number or a list of numbers");
        }
        atoms.push_back(std::move(pt));
      }
      for (const auto &p : spec["probs"]) probs.push_back(number(p, "probs"));
      return DiscretePrior(atoms, probs);
    }
  } catch (const DomainError &e) {
    throw ConfigError(std::string("invalid prior: ") + e.what());
  } catch (const SizeError &e) {
    throw ConfigError(std::string("invalid prior: ") + e.what());
  }
  throw ConfigError("prior spec must be {\"two_point\": p}, {\"atoms\": [...], \"probs\": [...]} or "
                    "{\"product\": [a, b]}");
}

RunConfig load_config(const json &file, const Overrides &overrides) {
  if (!file.is_object()) throw ConfigError("config must be a JSON object");
  json j = file;
  if (overrides.command) {
    if (j.contains("command") && j["command"] != *overrides.command)
      throw ConfigError("command on the command line ('" + *overrides.command + "') contradicts the config ('" +
                        j["command"].dump() + "')");
    j["command"] = *overrides.command;
  }
  if (overrides.quad_order) j["quad_order"] = *overrides.quad_order;
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (overrides.out) j["out"] = *overrides.out;
  if (overrides.threads) j["threads"] = *overrides.threads;

  for (const auto &[k, v] : j.items())
    if (!kKeys.count(k)) throw ConfigError("unknown config key '" + k + "'");

  RunConfig c;
  if (!j.contains("command") || !j["command"].is_string()) throw ConfigError("missing command");
  c.command = j["command"].get<std::string>();
  if (!kCommands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");

  if (j.contains("prior_u")) c.prior_u = parse_prior(j["prior_u"]);
  if (j.contains("prior_v")) c.prior_v = parse_prior(j["prior_v"]);
  if (c.prior_u && !c.prior_v) c.prior_v = c.prior_u;
  if (c.prior_v && !c.prior_u) c.prior_u = c.prior_v;
  if (c.command != "figures" && !c.prior_u) throw ConfigError("command '" + c.command + "' needs prior_u/prior_v");
  if (c.prior_u && c.prior_u->dim() != c.prior_v->dim()) throw ConfigError("prior_u and prior_v differ in dimension");

  if (j.contains("alpha")) c.alpha = positive(j["alpha"], "alpha");
  if (j.contains("lambda")) {
    c.lambda = number(j["lambda"], "lambda");
    if (c.lambda < 0.0) throw ConfigError("'lambda' must be >= 0");
  }
  if (j.contains("lambdas")) c.lambdas = parse_grid(j["lambdas"]);
  else c.lambdas = {c.lambda};

  if (j.contains("bracket")) {
    const auto &b = j["bracket"];
    if (!b.is_array() || b.size() != 2) throw ConfigError("'bracket' must be [lo, hi]");
    c.bracket_lo = number(b[0], "bracket");
    c.bracket_hi = number(b[1], "bracket");
    if (!(c.bracket_lo >= 0.0) || !(c.bracket_lo < c.bracket_hi)) throw ConfigError("'bracket' needs 0 <= lo < hi");
  }
  if (j.contains("tol")) c.threshold_tol = positive(j["tol"], "tol");
  if (j.contains("quad_order")) {
    const auto q = integer(j["quad_order"], "quad_order");
    if (q < 1 || q > kMaxQuadOrder) throw ConfigError("'quad_order' must be in [1, 512]");
    c.quad_order = static_cast<int>(q);
  }
  if (j.contains("damping")) {
    c.damping = number(j["damping"], "damping");
    if (!(c.damping >= 0.0 && c.damping < 1.0)) throw ConfigError("'damping' must be in [0, 1)");
  }
  if (j.contains("se_tol")) c.tol = positive(j["se_tol"], "se_tol");
  if (j.contains("max_iter")) {
    const auto v = integer(j["max_iter"], "max_iter");
    if (v < 1 || v > 100000000) throw ConfigError("'max_iter' must be in [1, 1e8]");
    c.max_iter = static_cast<int>(v);
  }

  if (c.command == "oracle") c.n = c.m = 2;
  if (j.contains("n")) {
    c.n = integer(j["n"], "n");
    if (c.n < 1) throw ConfigError("'n' must be >= 1");
    c.m = c.n;
  }
  if (j.contains("m")) {
    c.m = integer(j["m"], "m");
    if (c.m < 1) throw ConfigError("'m' must be >= 1");
  }
  if (j.contains("t_max")) {
    const auto v = integer(j["t_max"], "t_max");
    if (v < 0 || v > 1000000) throw ConfigError("'t_max' must be in [0, 1e6]");
    c.t_max = static_cast<int>(v);
  }
  if (j.contains("coupling")) {
    const auto s = j["coupling"].is_string() ? j["coupling"].get<std::string>() : std::string();
    if (s == "empirical") c.coupling = Coupling::Empirical;
    else if (s == "state_evolution") c.coupling = Coupling::StateEvolution;
    else throw ConfigError("'coupling' must be \"empirical\" or \"state_evolution\"");
  }
  if (j.contains("schedule")) {
    const auto s = j["schedule"].is_string() ? j["schedule"].get<std::string>() : std::string();
    if (s == "alternating") c.schedule = Schedule::Alternating;
    else if (s == "parallel") c.schedule = Schedule::Parallel;
    else throw ConfigError("'schedule' must be \"alternating\" or \"parallel\"");
  }
  if (j.contains("se_init")) {
    const auto &b = j["se_init"];
    if (!b.is_array() || b.size() != 2) throw ConfigError("'se_init' must be [q_u, q_v]");
    c.se_init = std::make_pair(number(b[0], "se_init"), number(b[1], "se_init"));
    if (c.se_init->first < 0.0 || c.se_init->second < 0.0) throw ConfigError("'se_init' entries must be >= 0");
  }
  if (j.contains("dump_instance")) {
    if (!j["dump_instance"].is_boolean()) throw ConfigError("'dump_instance' must be a boolean");
    c.dump_instance = j["dump_instance"].get<bool>();
  }
  if (j.contains("num_samples")) {
    c.num_samples = integer(j["num_samples"], "num_samples");
    if (c.num_samples < 1) throw ConfigError("'num_samples' must be >= 1");
  }
  if (j.contains("h")) {
    c.h = number(j["h"], "h");
    if (c.h < 0.0) throw ConfigError("'h' must be >= 0 (0 selects 1e-2 * lambda)");
  }
  if (j.contains("negative_control")) {
    if (!j["negative_control"].is_boolean()) throw ConfigError("'negative_control' must be a boolean");
    c.negative_control = j["negative_control"].get<bool>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0))
      throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    const auto v = integer(j["threads"], "threads");
    if (v < 1 || v > 1024) throw ConfigError("'threads' must be in [1, 1024]");
    c.threads = static_cast<int>(v);
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("'out' must be a path string");
    c.out = j["out"].get<std::string>();
  }
  ensure_writable(c.out);

  c.effective = j;
  json hashed = j;
  hashed.erase("out");
  hashed.erase("threads");
  c.hash = sha256_hex(hashed.dump());
  return c;
}

RunConfig load_config_file(const std::optional<std::filesystem::path> &path, const Overrides &overrides) {
  json j = json::object();
  if (path) {
    std::ifstream is(*path);
    if (!is) throw ConfigError("cannot read config " + path->string());
    try {
      j = json::parse(is);
    } catch (const json::parse_error &e) {
      throw ConfigError("config " + path->string() + " is not valid JSON: " + e.what());
    }
  }
  return load_config(j, overrides);
}

} // namespace rslimits::cli
