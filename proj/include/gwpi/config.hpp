#pragma once

// Run configuration: flat key = value text with [model] and [run]
// sections, '#' comments and blank lines. Unknown keys, malformed values
// and out-of-range parameters raise ConfigError carrying the line number.
//
//   [model]
//   family = constant_sv     # or analytic
//   nu = 0.5
//   c = 0.5
//   delta = 0.75
//   lambda = 0.5
//
//   [run]
//   K = 1024
//   tol = 1e-12
//   s_grid = 0, 0.5, 0.9

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gwpi/sv_models.hpp"

namespace gwpi {

struct SvChoice {
  std::string kind = "constant";  ///< constant | logarithmic | power_corrected
  double scale = 0.5;
  double weight = 1.0;
  double rate = 1.0;
};

struct ModelConfig {
  std::string family = "constant_sv";
  double nu = 0.5;
  double c = 0.5;
  double delta = 0.75;
  double lambda = 0.5;
  SvChoice offspring_sv;
  SvChoice immigration_sv;

  /// Throws ConfigError (wrapping ModelError) if the parameters are invalid.
  ModelSpec build() const;
};

struct RunConfig {
  std::filesystem::path model_path;  ///< empty for the built-in default
  ModelConfig model;
  std::filesystem::path out_dir = "gwpi_out";
  std::size_t workers = 1;
  std::uint64_t seed = 20240601;
  double tol = 1e-12;
  std::size_t nmax = 10'000;
  std::size_t K = 1024;
  std::vector<double> s_grid;  ///< empty means the default grid
  std::size_t reps = 1'000'000;
  std::size_t horizon = 20;
  std::size_t table_size = 100'000;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 1;
  bool richardson = false;
  bool functional_inverse = false;

  std::vector<double> grid() const;
  /// Range checks on the run parameters; ConfigError on failure.
  void validate() const;
};

/// Parses config text; `source` names the input in error messages.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
/// Reads and parses a file; relative out_dir is resolved against the
/// current directory.
RunConfig load_config(const std::filesystem::path& path);

/// Parses "0, 0.5, 0.9" into values in [0,1).
std::vector<double> parse_grid(const std::string& text, int line = 0);

}  // namespace gwpi
