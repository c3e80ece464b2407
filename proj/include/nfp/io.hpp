#pragma once

// Placement files and CSV output.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nfp/error.hpp"
#include "nfp/placement.hpp"

namespace nfp {

struct PlacementFile {
  std::string instance;
  std::vector<ServerId> assignment;
};

/// Format:
///   # nfp-placement 1
///   instance <name>
///   <nfi_id> <server_index>   (one line per NFI)
inline std::string serialize_placement(const std::string& instance, const std::vector<ServerId>& y) {
  std::ostringstream out;
  out << "# nfp-placement 1\n" << "instance " << instance << "\n";
  for (std::size_t v = 0; v < y.size(); ++v) out << v << ' ' << y[v] << '\n';
  return out.str();
}

inline PlacementFile parse_placement(const std::string& text) {
  PlacementFile f;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false, named = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "# nfp-placement 1") {
        if (line.rfind("# nfp-placement ", 0) == 0) throw VersionMismatch("unsupported placement version: " + line);
        throw ParseError("expected '# nfp-placement 1' header", lineno, 1);
      }
      header = true;
      continue;
    }
    if (!named) {
      if (line.rfind("instance ", 0) != 0) throw ParseError("expected 'instance <name>'", lineno, 1);
      f.instance = line.substr(9);
      named = true;
      continue;
    }
    std::istringstream fields(line);
    long long node = -1, server = -1;
    if (!(fields >> node)) throw ParseError("expected NFI id", lineno, 1);
    if (!(fields >> server)) throw ParseError("expected server index", lineno, line.find(' ') + 2);
    std::string rest;
    if (fields >> rest) throw ParseError("trailing data", lineno, line.find(rest) + 1);
    if (node < 0 || server < 0) throw ParseError("negative id", lineno, 1);
    if (static_cast<std::size_t>(node) != f.assignment.size())
      throw ParseError("NFI ids must be listed in order starting at 0", lineno, 1);
    f.assignment.push_back(static_cast<ServerId>(server));
  }
  if (!header) throw ParseError("empty placement file", lineno + 1, 1);
  if (!named) throw ParseError("missing instance line", lineno + 1, 1);
  return f;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

/// server,crossing_traffic,link_load for every server slot.
inline std::string cost_report_csv(const CostReport& r) {
  std::string out = "server,crossing_traffic,link_load\n";
  const auto n = std::max(r.crossing_traffic.size(), r.link_load.size());
  for (std::size_t s = 0; s < n; ++s) {
    out += std::to_string(s) + ',';
    out += csv_number(s < r.crossing_traffic.size() ? r.crossing_traffic[s] : 0.0) + ',';
    out += csv_number(s < r.link_load.size() ? r.link_load[s] : 0.0) + '\n';
  }
  return out;
}

}  // namespace nfp
