#pragma once

#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/model.hpp"

namespace qbic {

enum class OutputFormat { csv, json };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline std::optional<OutputFormat> parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  return std::nullopt;
}

/// Shortest decimal text that reads back to the same double.
inline std::string exact_decimal(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Lines of a flat "key = value" file, in file order. Blank lines and lines starting with '#' are
/// skipped.
inline std::vector<std::pair<std::string, std::string>> parse_flat_config(const std::string& text) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw DomainError("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

/// Everything that determines one CLI run. Subcommand flags live in options under their flag names.
struct RunConfig {
  std::string command;
  ModelParams params{1.0, 0.345, 0.1, 0.3};
  OutputFormat output_format = OutputFormat::csv;
  std::optional<std::string> output_path;
  /// Newton refinement tolerance override.
  std::optional<double> tol;
  /// Every run is deterministic; recorded for provenance only.
  bool seedless = true;
  std::map<std::string, std::string> options;

  bool operator==(const RunConfig&) const = default;

  std::string to_text() const {
    std::string s;
    auto line = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    if (!command.empty()) line("command", command);
    line("th", exact_decimal(params.t_h()));
    line("tp", exact_decimal(params.tp_h()));
    line("g", exact_decimal(params.g()));
    line("ed", exact_decimal(params.e_d()));
    line("format", to_string(output_format));
    if (output_path) line("out", *output_path);
    if (tol) line("tol", exact_decimal(*tol));
    line("seedless", seedless ? "true" : "false");
    for (const auto& [k, v] : options) line(k, v);
    return s;
  }

  static RunConfig from_text(const std::string& text) {
    RunConfig c;
    double th = c.params.t_h(), tp = c.params.tp_h(), g = c.params.g(), ed = c.params.e_d();
    auto number = [](const std::string& k, const std::string& v) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != v.size()) throw DomainError("config key " + k + ": not a number: " + v);
      return x;
    };
    for (const auto& [k, v] : parse_flat_config(text)) {
      if (k == "command") c.command = v;
      else if (k == "th") th = number(k, v);
      else if (k == "tp") tp = number(k, v);
      else if (k == "g") g = number(k, v);
      else if (k == "ed") ed = number(k, v);
      else if (k == "format") {
        const auto f = parse_output_format(v);
        if (!f) throw DomainError("config key format: expected csv or json, got " + v);
        c.output_format = *f;
      } else if (k == "out") c.output_path = v;
      else if (k == "tol") c.tol = number(k, v);
      else if (k == "seedless") {
        if (v != "true" && v != "false") throw DomainError("config key seedless: expected true or false");
        c.seedless = v == "true";
      } else c.options[k] = v;
    }
    c.params = ModelParams(th, tp, g, ed);
    return c;
  }
};

}  // namespace qbic
