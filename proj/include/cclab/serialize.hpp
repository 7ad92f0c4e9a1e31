#pragma once

#include <json.hpp>

#include "cclab/dp.hpp"
#include "cclab/inverse_control.hpp"

namespace cclab {

using Json = nlohmann::ordered_json;

inline Json to_json(const FiniteDist& d) {
  Json arr = Json::array();
  for (int i = 0; i < d.size(); ++i) arr.push_back(d(i));
  return arr;
}

inline Json to_json(const StochKernel& k) {
  Json rows = Json::array();
  for (int r = 0; r < k.input_size(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < k.output_size(); ++c) row.push_back(k(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const ExtReal& v) {
  if (v.is_inf()) return "inf";
  return v.value();
}

/// Stage-indexed arrays of values and argmin controls.
inline Json to_json(const ValueTable& vt) {
  Json values = Json::array(), emaps = Json::array(), zs = Json::array();
  for (std::size_t s = 0; s < vt.value.size(); ++s) {
    values.push_back(to_json(vt.value[s]));
    emaps.push_back(vt.argmin[s].emap);
    zs.push_back(vt.argmin[s].z);
  }
  return Json{{"stage", vt.stage}, {"value", values}, {"emap", emaps}, {"z", zs}};
}

inline Json to_json(const std::vector<ValueTable>& tables) {
  Json arr = Json::array();
  for (const auto& vt : tables) arr.push_back(to_json(vt));
  return arr;
}

inline Json to_json(const IidReport& r) {
  return Json{{"iid", r.iid},
              {"max_dependence_nats", r.max_dependence},
              {"max_marginal_tv", r.max_marginal_tv}};
}

inline Json to_json(const ChainReport& r) {
  return Json{{"mi_wz", r.mi_wz},
              {"mi_wy", r.mi_wy},
              {"sum_mi_xy", r.sum_mi_xy},
              {"capacity", r.capacity},
              {"realized_cost", r.realized_cost},
              {"realized_distortion", r.realized_distortion},
              {"weak_chain_holds", r.weak_chain_holds},
              {"max_equality_gap", r.max_equality_gap}};
}

inline Json to_json(const DetailedBalanceReport& r) {
  return Json{{"reversible", r.reversible},
              {"max_violation", r.max_violation},
              {"supplied_law_stationary", r.supplied_law_stationary},
              {"stationarity_gap", r.stationarity_gap}};
}

}  // namespace cclab
