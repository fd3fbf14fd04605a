#pragma once

#include "rslimits/amp.hpp"
#include "rslimits/prior.hpp"
#include "rslimits/quadrature.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rslimits::cli {

/// Schema or value problem in the run configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command; ///< sweep | threshold | fixedpoints | amp | oracle | figures

  std::optional<DiscretePrior> prior_u;
  std::optional<DiscretePrior> prior_v;
  double alpha = 1.0;
  std::vector<double> lambdas; ///< strictly increasing
  double lambda = 1.0;

  // threshold
  double bracket_lo = 0.5;
  double bracket_hi = 2.0;
  double threshold_tol = 1e-4;

  // fixed-point solver
  int quad_order = kDefaultQuadOrder;
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 10000;

  // amp
  std::int64_t n = 2000;
  std::int64_t m = 2000;
  int t_max = 50;
  Coupling coupling = Coupling::Empirical;
  Schedule schedule = Schedule::Alternating;
  std::optional<std::pair<double, double>> se_init;
  bool dump_instance = false;

  // oracle
  std::int64_t num_samples = 10000;
  double h = 0.0;
  bool negative_control = true;

  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out = ".";

  /// Effective configuration (file plus flag overrides) and its sha256; the
  /// hash leaves out `out` and `threads`, which do not affect any result.
  nlohmann::json effective;
  std::string hash;
};

struct Overrides {
  std::optional<std::string> command;
  std::optional<int> quad_order;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

/// Prior from `{"two_point": p}`, `{"atoms": [[..], ..], "probs": [..]}`, or
/// `{"product": [spec, spec]}`.
DiscretePrior parse_prior(const nlohmann::json &spec);

RunConfig load_config(const nlohmann::json &file, const Overrides &overrides);
RunConfig load_config_file(const std::optional<std::filesystem::path> &path, const Overrides &overrides);

std::string sha256_hex(const std::string &data);

} // namespace rslimits::cli
