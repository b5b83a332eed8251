#include "steinkit/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace steinkit::cli {

namespace {

const char* holds_text(Holds h) {
  switch (h) {
    case Holds::yes:
      return "true";
    case Holds::no:
      return "false";
    default:
      return "";
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void Report::add(std::string params, std::string quantity, std::string value, std::string bound, Holds holds,
                 bool gating) {
  rows.push_back({std::move(params), std::move(quantity), std::move(value), std::move(bound), holds, gating});
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (r.gating && r.holds == Holds::no) out.push_back(r.params.empty() ? r.quantity : r.params + ":" + r.quantity);
  return out;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fmt(std::uint64_t x) { return std::to_string(x); }

void write_csv(const Report& report, std::ostream& os) {
  os << "# schema=" << kSchemaVersion << " command=" << report.command << "\n";
  os << "params,quantity,value,bound,holds\n";
  for (const auto& r : report.rows)
    os << csv_field(r.params) << ',' << csv_field(r.quantity) << ',' << csv_field(r.value) << ','
       << csv_field(r.bound) << ',' << holds_text(r.holds) << '\n';
}

void write_json(const Report& report, std::ostream& os) {
  nlohmann::ordered_json doc;
  doc["schema"] = kSchemaVersion;
  doc["command"] = report.command;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["params"] = r.params;
    row["quantity"] = r.quantity;
    row["value"] = r.value;
    row["bound"] = r.bound;
    row["holds"] = holds_text(r.holds);
    doc["rows"].push_back(std::move(row));
  }
  os << doc.dump(2) << '\n';
}

void emit(const Report& report, const ExperimentConfig& config) {
  auto write = [&](std::ostream& os) {
    if (config.format == OutputFormat::json)
      write_json(report, os);
    else
      write_csv(report, os);
  };
  if (config.out.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file " + config.out);
  write(file);
}

}  // namespace steinkit::cli
