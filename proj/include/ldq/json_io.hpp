#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <json.hpp>

#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/ratecalc.hpp"
#include "ldq/tailest.hpp"

namespace ldq {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::invalid_argument, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw Error(Errc::invalid_argument, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline int integer(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) {
    throw Error(Errc::invalid_argument, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

/// Finite numbers as-is; infinities and absent values become null.
inline json num_or_null(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

}  // namespace detail

inline json to_json(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Exponential& x) { return json{{"type", "exponential"}, {"rate", x.rate}}; },
          [](const Deterministic& x) { return json{{"type", "deterministic"}, {"value", x.value}}; },
          [](const UniformInterval& x) {
            return json{{"type", "uniform"}, {"lo", x.lo}, {"hi", x.hi}};
          },
          [](const Erlang& x) {
            return json{{"type", "erlang"}, {"shape", x.shape}, {"rate", x.rate}};
          },
          [](const TruncatedErlang& x) {
            return json{{"type", "truncated_erlang"}, {"shape", x.shape}, {"rate", x.rate},
                        {"lo", x.lo},
                        {"hi", x.hi}};
          },
          [](const Mixture& m) {
            json comps = json::array();
            for (const auto& c : m.components) {
              comps.push_back({{"weight", c.weight}, {"dist", to_json(c.dist)}});
            }
            return json{{"type", "mixture"}, {"components", comps}};
          },
      },
      d.variant());
}

inline DistributionSpec dist_from_json(const json& j) {
  const auto& t = detail::field(j, "type");
  if (!t.is_string()) throw Error(Errc::invalid_argument, "'type' must be a string");
  const auto type = t.get<std::string>();
  using detail::integer;
  using detail::number;
  if (type == "exponential") return DistributionSpec::exponential(number(j, "rate"));
  if (type == "deterministic") return DistributionSpec::deterministic(number(j, "value"));
  if (type == "uniform") return DistributionSpec::uniform(number(j, "lo"), number(j, "hi"));
  if (type == "erlang") return DistributionSpec::erlang(integer(j, "shape"), number(j, "rate"));
  if (type == "truncated_erlang") {
    return DistributionSpec::truncated_erlang(integer(j, "shape"), number(j, "rate"),
                                              number(j, "lo"), number(j, "hi"));
  }
  if (type == "mixture") {
    const auto& comps = detail::field(j, "components");
    if (!comps.is_array()) throw Error(Errc::invalid_argument, "'components' must be an array");
    std::vector<MixtureComponent> parts;
    for (const auto& c : comps) {
      parts.push_back({number(c, "weight"), dist_from_json(detail::field(c, "dist"))});
    }
    return DistributionSpec::mixture(std::move(parts));
  }
  throw Error(Errc::invalid_argument, "unknown distribution type '" + type + "'");
}

inline json to_json(const QueueModel& m) {
  json j{{"arrival", to_json(m.arrival())}};
  if (const auto& sp = m.split()) {
    j["split"] = {{"p", sp->p}, {"class1", to_json(sp->class1)}, {"class2", to_json(sp->class2)}};
  } else {
    j["service"] = to_json(m.service());
  }
  return j;
}

inline QueueModel model_from_json(const json& j) {
  auto arrival = dist_from_json(detail::field(j, "arrival"));
  if (j.contains("split")) {
    if (j.contains("service")) {
      throw Error(Errc::invalid_argument, "give either 'service' or 'split', not both");
    }
    const auto& sp = j.at("split");
    return QueueModel(std::move(arrival),
                      ClassSplit{detail::number(sp, "p"), dist_from_json(detail::field(sp, "class1")),
                                 dist_from_json(detail::field(sp, "class2"))});
  }
  return QueueModel(std::move(arrival), dist_from_json(detail::field(j, "service")));
}

inline json to_json(const DecayReport& r) {
  return {{"gamma_w", detail::num_or_null(r.gamma_w)},
          {"gamma_p", detail::num_or_null(r.gamma_p)},
          {"gamma_w2", detail::num_or_null(r.gamma_w2)},
          {"gamma_v", detail::num_or_null(r.gamma_v)},
          {"regime", regime_name(r.regime)},
          {"s_opt", detail::num_or_null(r.s_opt)},
          {"a", detail::num_or_null(r.a)},
          {"K", detail::num_or_null(r.K)},
          {"rho", r.rho},
          {"q", r.q},
          {"x_b", detail::num_or_null(r.x_b)},
          {"case", r.kase ? json(srpt_case_name(*r.kase)) : json(nullptr)}};
}

inline json to_json(const TailFit& f) {
  json ci = nullptr;
  if (f.ci) ci = json::array({f.ci->first, f.ci->second});
  return {{"rate", f.rate},
          {"stderr", f.std_error},
          {"window", json::array({f.x_lo, f.x_hi})},
          {"points", f.points},
          {"ci", ci}};
}

inline json to_json(const RateComparison& c) {
  return {{"analytic", detail::num_or_null(c.analytic)},
          {"fitted", c.fitted},
          {"stderr", c.std_error},
          {"rel_error", detail::num_or_null(c.rel_error)},
          {"z", detail::num_or_null(c.z)},
          {"tolerance", c.tolerance},
          {"pass", c.pass}};
}

}  // namespace ldq
