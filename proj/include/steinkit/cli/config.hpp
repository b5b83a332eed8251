#pragma once

// Experiment configuration: defaults, then a key=value file, then flags.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steinkit/er_model.hpp"
#include "steinkit/exactnum.hpp"

namespace steinkit::cli {

/// Raised for anything that should end in exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  std::string command;  // er-report, jack-report, verify, recursion, hyp
  std::string grid;     // raw text, parsed per command
  std::uint64_t samples = 10000;
  std::uint64_t seed = 20240917;
  double confidence = 0.05;
  double epsilon = 0.4;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::csv;
  SmileyThresholds thresholds;
  unsigned threads = 0;  // 0: hardware concurrency
  std::optional<BigRational> kerov_perturbation;  // verify only, test mode
};

/// Sets one option from its textual form. Keys are the long flag names
/// without dashes; throws ConfigError on an unknown key or bad value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads key=value lines; '#' starts a comment, blank lines are skipped.
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Grid used when neither the file nor the flags give one.
std::string default_grid(const std::string& command);

/// Checks the invariants that do not depend on the grid syntax.
void validate(const ExperimentConfig& config);

struct ErPoint {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
};

struct AlphaSpec {
  std::string text;                  // as written, e.g. "3/2" or "n^1.5"
  std::optional<BigRational> exact;  // set when alpha is rational
  double value = 0.0;
};

struct JackPoint {
  std::uint32_t n = 0;
  AlphaSpec alpha;
};

struct HypPoint {
  HypergeometricParams params;
};

struct RecursionPoint {
  double q = 0.5;
  double c = 1.0;
};

// Grid entries are separated by ',' or ';' and their fields by ':'.
//   er:        n:m, where m may be written as a multiple of n ("0.5n")
//   jack:      n:alpha, alpha a rational or "n^x"
//   hyp:       N:m:n
//   recursion: q:c
std::vector<ErPoint> parse_er_grid(const std::string& text);
std::vector<JackPoint> parse_jack_grid(const std::string& text);
std::vector<HypPoint> parse_hyp_grid(const std::string& text);
std::vector<RecursionPoint> parse_recursion_grid(const std::string& text);

}  // namespace steinkit::cli
