#pragma once

// JSON reading helpers shared by the weights and scenario formats. Errors name
// the offending field with a dotted path ("layers[1].weights").

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "neuropt/error.hpp"
#include "neuropt/linalg.hpp"

namespace neuropt::detail {

using Json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

inline Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    throw ParseError(fmt::format("{}: {}", source, e.what()));
  }
}

/// Rejects keys outside `allowed` and requires the ones in `required`.
inline void check_keys(const Json& obj, std::string_view where,
                       std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || k == it.key();
    for (auto k : optional) known = known || k == it.key();
    if (!known) throw ParseError(fmt::format("{}: unknown key '{}'", where, it.key()));
  }
  for (auto k : required) {
    if (!obj.contains(k)) throw ParseError(fmt::format("{}: missing key '{}'", where, k));
  }
}

inline std::string field(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : fmt::format("{}.{}", parent, key);
}

inline double get_number(const Json& v, std::string_view where) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", where));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(fmt::format("{}: non-finite number", where));
  return x;
}

inline long long get_integer(const Json& v, std::string_view where) {
  if (!v.is_number_integer()) throw ParseError(fmt::format("{}: expected an integer", where));
  return v.get<long long>();
}

inline std::string get_string(const Json& v, std::string_view where) {
  if (!v.is_string()) throw ParseError(fmt::format("{}: expected a string", where));
  return v.get<std::string>();
}

inline Vector get_vector(const Json& v, std::string_view where) {
  if (!v.is_array()) throw ParseError(fmt::format("{}: expected an array of numbers", where));
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = get_number(v[i], fmt::format("{}[{}]", where, i));
  }
  return out;
}

inline Vector get_vector(const Json& v, std::string_view where, Eigen::Index length) {
  Vector out = get_vector(v, where);
  if (out.size() != length) {
    throw ParseError(fmt::format("{}: expected {} entries, got {}", where, length, out.size()));
  }
  return out;
}

inline Matrix get_matrix(const Json& v, std::string_view where) {
  if (!v.is_array() || v.empty()) throw ParseError(fmt::format("{}: expected a nonempty array of rows", where));
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(get_vector(v[i], fmt::format("{}[{}]", where, i)));
  const Eigen::Index cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ParseError(fmt::format("{}[{}]: ragged row, {} entries vs {}", where, i, rows[i].size(), cols));
    }
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

// Writers: 17 significant digits so every double round-trips exactly.

inline std::string number17(double x) { return fmt::format("{:.17g}", x); }

template <typename Vec>
std::string vector17(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += number17(v[i]);
  }
  return s + "]";
}

}  // namespace neuropt::detail
