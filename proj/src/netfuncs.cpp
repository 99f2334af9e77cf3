#include "icann/netfuncs.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace icann {

std::string group_name(Group g) {
  switch (g) {
    case Group::PsiE: return "psi_e";
    case Group::PsiP: return "psi_p";
    case Group::PsiPe: return "psi_pe";
    case Group::G1: return "g1";
    case Group::G2: return "g2";
  }
  return "?";
}

Group group_from_name(const std::string& name) {
  for (Group g : kAllGroups)
    if (group_name(g) == name) return g;
  throw ConfigError("unknown weight group '" + name + "'");
}

std::vector<ParamInfo> parameter_layout(const WeightSet<double>& ws) {
  std::vector<ParamInfo> out;
  for_each_weight(ws, [&](const ParamInfo& info, const double&) { out.push_back(info); });
  return out;
}

std::vector<double> flatten(const WeightSet<double>& ws) {
  std::vector<double> out;
  for_each_weight(ws, [&](const ParamInfo&, const double& w) { out.push_back(w); });
  return out;
}

void unflatten(WeightSet<double>& ws, const std::vector<double>& flat) {
  std::size_t i = 0;
  for_each_weight(ws, [&](const ParamInfo&, double& w) {
    if (i >= flat.size()) throw ValidationError("flat weight vector too short");
    w = flat[i++];
  });
  if (i != flat.size()) throw ValidationError("flat weight vector too long");
}

namespace {

WeightSet<double> rescale(const WeightSet<double>& ws, double scale, double direction) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("stress scale must be positive and finite");
  WeightSet<double> out = ws;
  for_each_weight(out, [&](const ParamInfo& info, double& w) {
    if (info.stress_power != 0) w *= std::pow(scale, direction * info.stress_power);
  });
  return out;
}

// Which form a group uses, judged from the keys present.
bool has_key(const nlohmann::json& j, const std::string& key) { return j.contains(key); }

}  // namespace

WeightSet<double> to_normalized(const WeightSet<double>& ws, double scale) { return rescale(ws, scale, 1.0); }

WeightSet<double> from_normalized(const WeightSet<double>& ws, double scale) { return rescale(ws, scale, -1.0); }

nlohmann::json weights_to_json(const WeightSet<double>& ws) {
  nlohmann::json j = nlohmann::json::object();
  for_each_weight(ws, [&](const ParamInfo& info, const double& w) { j[info.name] = w; });
  return j;
}

WeightSet<double> weights_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("weights JSON must be an object");
  WeightSet<double> ws;
  ws.psi_e.full_form = has_key(j, "psi_e.w2.5");
  ws.psi_p.full_form = has_key(j, "psi_p.w2.5");
  ws.psi_pe.full_form = has_key(j, "psi_pe.w2.5");
  ws.g1.full_form = has_key(j, "g1.w2.7");
  ws.g2.full_form = has_key(j, "g2.w2.7");

  std::set<std::string> seen;
  for_each_weight(ws, [&](const ParamInfo& info, double& w) {
    auto it = j.find(info.name);
    if (it == j.end()) throw ValidationError("weights JSON is missing '" + info.name + "'");
    if (!it->is_number()) throw ValidationError("weight '" + info.name + "' is not a number");
    w = it->get<double>();
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("weight '" + info.name + "' must be finite and >= 0");
    seen.insert(info.name);
  });
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!seen.count(it.key())) throw ValidationError("unknown weight name '" + it.key() + "'");
  return ws;
}

void save_weights(const WeightSet<double>& ws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write weights file " + path);
  // nlohmann emits shortest round-trip representations.
  out << weights_to_json(ws).dump(2) << '\n';
}

WeightSet<double> load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open weights file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("weights file ") + path + ": " + e.what(), 0, e.byte);
  }
  return weights_from_json(j);
}

}  // namespace icann
