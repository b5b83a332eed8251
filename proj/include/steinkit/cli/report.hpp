#pragma once

// Flat report rows. CSV and JSON carry the same fields in the same order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "steinkit/cli/config.hpp"

namespace steinkit::cli {

inline constexpr int kSchemaVersion = 1;

enum class Holds { none, yes, no };

struct Row {
  std::string params;
  std::string quantity;
  std::string value;
  std::string bound;
  Holds holds = Holds::none;
  bool gating = false;  // counts toward the exit code when false
};

struct Report {
  std::string command;
  std::vector<Row> rows;

  void add(std::string params, std::string quantity, std::string value, std::string bound = "",
           Holds holds = Holds::none, bool gating = false);
  /// quantity names of gating rows that do not hold, prefixed by params
  std::vector<std::string> failures() const;
};

/// Fixed-precision text for doubles so reruns are byte-identical.
std::string fmt(double x);
std::string fmt(std::uint64_t x);
inline Holds holds_of(bool ok) { return ok ? Holds::yes : Holds::no; }

void write_csv(const Report& report, std::ostream& os);
void write_json(const Report& report, std::ostream& os);
/// To config.out, or stdout when it is empty. Throws ConfigError when the file
/// cannot be opened.
void emit(const Report& report, const ExperimentConfig& config);

}  // namespace steinkit::cli
