#pragma once

// JSON form of an exponent series:
//
//   { "dim": 2, "tensors": { "0": c, "1": [..], "2": [[..], [..]], ... } }
//
// Tensors are nested row-major arrays. Orders missing from "tensors" are
// zero; the highest key sets the series order. Input is symmetrized.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "interfere/moment_tensor.hpp"

namespace interfere {

class SeriesFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void flatten_nested(const nlohmann::json& j, int depth, int dim, std::vector<double>& out,
                           const std::string& where) {
  if (depth == 0) {
    if (!j.is_number()) throw SeriesFormatError(where + ": expected a number");
    out.push_back(j.get<double>());
    return;
  }
  if (!j.is_array() || int(j.size()) != dim) {
    throw SeriesFormatError(where + ": expected an array of length " + std::to_string(dim));
  }
  for (const auto& item : j) flatten_nested(item, depth - 1, dim, out, where);
}

inline nlohmann::json nest(const MomentTensor& t, int depth, std::size_t& pos) {
  if (depth == 0) return t[pos++];
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < t.dim(); ++i) arr.push_back(nest(t, depth - 1, pos));
  return arr;
}

}  // namespace detail

inline ExponentSeries series_from_json(const nlohmann::json& j,
                                       int order_bound = ExponentSeries::kDefaultOrderBound) {
  if (!j.is_object()) throw SeriesFormatError("series document must be a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw SeriesFormatError("series document needs an integer 'dim'");
  }
  const int dim = j["dim"].get<int>();
  if (dim != 2 && dim != 4) throw SeriesFormatError("'dim' must be 2 or 4");
  if (!j.contains("tensors") || !j["tensors"].is_object()) {
    throw SeriesFormatError("series document needs a 'tensors' object");
  }
  int top = 0;
  std::vector<std::pair<int, const nlohmann::json*>> items;
  for (const auto& [key, value] : j["tensors"].items()) {
    std::size_t used = 0;
    int order = -1;
    try {
      order = std::stoi(key, &used);
    } catch (const std::exception&) {
    }
    if (used != key.size() || order < 0) {
      throw SeriesFormatError("tensor key '" + key + "' is not an order");
    }
    if (order > order_bound) {
      throw SeriesFormatError("tensor order " + key + " exceeds the bound " +
                              std::to_string(order_bound));
    }
    top = std::max(top, order);
    items.emplace_back(order, &value);
  }
  ExponentSeries s(dim, top, order_bound);
  for (const auto& [order, value] : items) {
    std::vector<double> entries;
    detail::flatten_nested(*value, order, dim, entries, "tensor " + std::to_string(order));
    s.set(MomentTensor(order, dim, std::move(entries)));
  }
  return s;
}

inline ExponentSeries parse_series(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SeriesFormatError(std::string("series JSON does not parse: ") + e.what());
  }
  return series_from_json(j);
}

inline nlohmann::json to_json(const ExponentSeries& s) {
  nlohmann::json tensors = nlohmann::json::object();
  for (int n = 0; n <= s.max_order(); ++n) {
    std::size_t pos = 0;
    tensors[std::to_string(n)] = detail::nest(s[n], n, pos);
  }
  return {{"dim", s.dim()}, {"tensors", tensors}};
}

}  // namespace interfere
