#ifndef MONOGUARD_SRC_JSON_UTIL_HPP_
#define MONOGUARD_SRC_JSON_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoguard/errors.hpp"

namespace monoguard::detail {

using json = nlohmann::json;

inline const json& Require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(path.empty() ? key : path + "." + key,
                     "missing required field");
  }
  return *it;
}

inline double AsNumber(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path, "expected a finite number");
  return d;
}

inline std::vector<double> AsNumberArray(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(AsNumber(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::string AsString(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path, "expected a string");
  return v.get<std::string>();
}

inline json ParseDocument(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInputError("failed writing " + path.string());
}


}  // namespace monoguard::detail

#endif  // MONOGUARD_SRC_JSON_UTIL_HPP_
