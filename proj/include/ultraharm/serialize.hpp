#pragma once
// File formats: deterministic JSON writers (fixed key order, floats at 17
// significant digits so doubles round-trip bit-for-bit and identical inputs
// produce byte-identical artifacts), nlohmann-based readers with schema
// validation, and a small CSV row helper.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ultraharm/operators.hpp"

namespace ultraharm {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_pair(complex_t z) {
  return "[" + format_double(z.real()) + "," + format_double(z.imag()) + "]";
}

inline std::string to_json(const GroupDescriptor& g) {
  return "{\"kind\":\"" + to_string(g.kind) + "\",\"p\":" + std::to_string(g.p) +
         ",\"d\":" + std::to_string(g.d) + ",\"level\":" + std::to_string(g.level) + "}";
}

inline std::string to_json(const GridFunction& f) {
  std::string out = "{\"group\":" + to_json(f.group) +
                    ",\"level\":" + std::to_string(f.level) + ",\"values\":[";
  for (int64_t r = 0; r < f.values.size(); ++r) {
    if (r) out += ",";
    out += format_pair(f.values[r]);
  }
  out += "]}";
  return out;
}

// Entries follow canonical enumeration order, not map order, so the output
// is reproducible across runs and platforms.
inline std::string to_json(const Symbol& s) {
  std::string out = "{\"group\":" + to_json(s.group) +
                    ",\"level\":" + std::to_string(s.level) + ",\"entries\":{";
  bool first = true;
  for (const Irrep& xi : s.irreps) {
    if (!first) out += ",";
    first = false;
    out += "\"" + xi.id + "\":[";
    const Eigen::MatrixXcd& M = s.at(xi.id);
    for (int64_t i = 0; i < M.rows(); ++i) {
      if (i) out += ",";
      out += "[";
      for (int64_t j = 0; j < M.cols(); ++j) {
        if (j) out += ",";
        out += format_pair(M(i, j));
      }
      out += "]";
    }
    out += "]";
  }
  out += "}}";
  return out;
}

// Radial profiles keyed by the decimal dual-norm value: {"1":[re,im],...}
inline std::string to_json(const RadialProfile& prof) {
  std::string out = "{";
  bool first = true;
  for (const auto& kv : prof.phi) {
    if (!first) out += ",";
    first = false;
    out += "\"" + format_double(kv.first) + "\":" + format_pair(kv.second);
  }
  out += "}";
  return out;
}

// ---------------------------------------------------------------------------
// readers

namespace detail {

inline complex_t pair_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("schema: complex value must be a [re, im] pair");
  return complex_t(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline GroupDescriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("p") || !j.contains("level"))
    throw std::runtime_error("schema: descriptor needs kind, p, level");
  GroupDescriptor g;
  g.kind = group_kind_from_string(j.at("kind").get<std::string>());
  g.p = j.at("p").get<int64_t>();
  g.d = j.value("d", 0);
  g.level = j.at("level").get<int>();
  g.validate();
  return g;
}

inline GridFunction grid_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("group") || !j.contains("values"))
    throw std::runtime_error("schema: grid function needs group and values");
  GroupDescriptor g = descriptor_from_json(j.at("group"));
  int level = j.value("level", g.level);
  if (level < 0 || level > g.level)
    throw std::runtime_error("schema: function level outside descriptor range");
  GridFunction f = make_grid(g, level);
  const nlohmann::json& vals = j.at("values");
  if (!vals.is_array() || static_cast<int64_t>(vals.size()) != f.values.size())
    throw std::runtime_error("schema: expected " + std::to_string(f.values.size()) +
                             " grid values, got " + std::to_string(vals.size()));
  for (int64_t r = 0; r < f.values.size(); ++r)
    f.values[r] = detail::pair_from_json(vals[r]);
  return f;
}

inline Symbol symbol_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("group") || !j.contains("entries"))
    throw std::runtime_error("schema: symbol needs group and entries");
  GroupDescriptor g = descriptor_from_json(j.at("group"));
  int level = j.value("level", g.level);
  Symbol s = make_symbol(g, level);
  const nlohmann::json& entries = j.at("entries");
  if (!entries.is_object()) throw std::runtime_error("schema: entries must be an object");
  for (const auto& kv : entries.items()) {
    auto it = s.entries.find(kv.key());
    if (it == s.entries.end())
      throw std::runtime_error("schema: unknown irrep id " + kv.key());
    Eigen::MatrixXcd& M = it->second;
    const nlohmann::json& rows = kv.value();
    if (!rows.is_array() || static_cast<int64_t>(rows.size()) != M.rows())
      throw std::runtime_error("schema: wrong row count for " + kv.key());
    for (int64_t i = 0; i < M.rows(); ++i) {
      const nlohmann::json& row = rows[i];
      if (!row.is_array() || static_cast<int64_t>(row.size()) != M.cols())
        throw std::runtime_error("schema: wrong column count for " + kv.key());
      for (int64_t jj = 0; jj < M.cols(); ++jj)
        M(i, jj) = detail::pair_from_json(row[jj]);
    }
  }
  return s;
}

inline RadialProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("schema: profile must map norm -> value");
  RadialProfile prof;
  for (const auto& kv : j.items()) {
    double key;
    try {
      key = std::stod(kv.key());
    } catch (const std::exception&) {
      throw std::runtime_error("schema: profile key is not a number: " + kv.key());
    }
    prof.phi[key] = detail::pair_from_json(kv.value());
  }
  return prof;
}

// ---------------------------------------------------------------------------
// file plumbing

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
}

inline GridFunction load_grid(const std::string& path) {
  return grid_from_json(parse_json_file(path));
}
inline Symbol load_symbol(const std::string& path) {
  return symbol_from_json(parse_json_file(path));
}
inline RadialProfile load_profile(const std::string& path) {
  return profile_from_json(parse_json_file(path));
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char ch : c) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    } else {
      out += c;
    }
  }
  out += "\n";
  return out;
}

}  // namespace ultraharm
