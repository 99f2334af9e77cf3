#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace icann::cli {

json default_config() {
  const TrainConfig t;
  const StepOptions s;
  const VmAfParams v;
  const TschoeglParams ts;
  return json{
      {"seed", 0},
      {"step", {{"tol_phi", s.tol_phi}, {"max_iters", s.max_iters}}},
      {"paths",
       {{"steps_per_ramp", 200},
        {"n_cycles", 1},
        {"dt", 1.0},
        {"UT", 1.3},
        {"UC", 0.8},
        {"EB", 1.3},
        {"UT-unl", 1.3},
        {"Cyc", {1.25, 0.85}}}},
      {"vm_af",
       {{"mu", v.mu},
        {"K", v.K},
        {"sigma_y0", v.sigma_y0},
        {"c", v.c},
        {"b", v.b},
        {"hardening_on", "Bpe"},
        {"recovery_driver", "Theta"}}},
      {"tschoegl", {{"mu", ts.mu}, {"K", ts.K}, {"sigma_t", ts.sigma_t}, {"sigma_c", ts.sigma_c}}},
      {"generate", {{"model", "vm_af"}, {"cases", {"UT", "EB", "UC"}}, {"noise", 0.0}}},
      {"train",
       {{"data", json::array()},
        {"resume", ""},
        {"learning_rate", t.learning_rate},
        {"max_epochs", t.max_epochs},
        {"patience", t.patience},
        {"min_rel_change", t.min_rel_change},
        {"l2_energy", t.l2_energy},
        {"l2_potential", t.l2_potential},
        {"l1_energy", t.l1_energy},
        {"l1_potential", t.l1_potential},
        {"regularize_first_layer", t.regularize_first_layer},
        {"clipnorm", t.clipnorm},
        {"gradient", gradient_mode_name(t.gradient)},
        {"fd_step", t.fd_step},
        {"f_enforce", t.f_enforce},
        {"pretrain", t.pretrain},
        {"pretrain_epochs", t.pretrain_epochs},
        {"groups", {"psi_e", "psi_p", "psi_pe", "g1", "g2"}},
        {"full_form", {"psi_e"}},
        {"init_output_max", t.init_output_max},
        {"init_inner_max", t.init_inner_max}}},
      {"simulate", {{"model", "network"}, {"weights", ""}, {"case", "UT"}, {"data", ""}}},
      {"trace",
       {{"weights", ""},
        {"potential", "g1"},
        {"mode", "2d"},
        {"plane", "12"},
        {"n_rays", 72},
        {"n_polar", 12},
        {"n_azimuth", 24},
        {"cap", 1e6},
        {"tol", 1e-10}}},
      {"verify", {{"samples", 200}}},
  };
}

namespace {

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

bool compatible(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
  if (def.is_number()) return v.is_number();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    if (def.empty()) return true;
    for (const auto& e : v)
      if (!compatible(def.front(), e)) return false;
    return true;
  }
  return def.type() == v.type();
}

}  // namespace

void merge_config(json& base, const json& overlay, const std::string& where) {
  if (!overlay.is_object()) throw ConfigError("configuration " + (where.empty() ? "root" : "'" + where + "'") + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = join(where, it.key());
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    json& target = base[it.key()];
    if (target.is_object()) {
      merge_config(target, it.value(), key);
    } else {
      if (!compatible(target, it.value())) throw ConfigError("wrong type for configuration key '" + key + "'");
      target = target.is_number_integer() ? json(static_cast<long long>(it.value().get<double>())) : it.value();
    }
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);

  // Locate the default to learn the expected type.
  const json* def = &cfg;
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (!def->is_object() || !def->contains(k)) throw ConfigError("unknown configuration key '" + path + "'");
    def = &(*def)[k];
    keys.push_back(k);
  }
  json value;
  if (def->is_string()) {
    value = text;
  } else if (def->is_array() && (def->empty() || def->front().is_string()) && (text.empty() || text.front() != '[')) {
    value = json::array();
    std::stringstream items(text);
    for (std::string item; std::getline(items, item, ',');)
      if (!item.empty()) value.push_back(item);
  } else {
    value = json::parse(text, nullptr, false);
    if (value.is_discarded()) throw ConfigError("cannot parse value for '" + path + "': " + text);
  }
  json overlay = value;
  for (auto k = keys.rbegin(); k != keys.rend(); ++k) overlay = json{{*k, overlay}};
  merge_config(cfg, overlay);
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("configuration file " + path + " is not valid JSON", 1, 1);
  return j;
}

StepOptions step_options(const json& cfg) {
  StepOptions s;
  s.tol_phi = cfg.at("step").at("tol_phi").get<double>();
  s.max_iters = cfg.at("step").at("max_iters").get<int>();
  if (!(s.tol_phi > 0.0) || s.max_iters < 1) throw ConfigError("step.tol_phi and step.max_iters must be positive");
  return s;
}

VmAfParams vm_af_params(const json& cfg) {
  const json& j = cfg.at("vm_af");
  VmAfParams p;
  p.mu = j.at("mu").get<double>();
  p.K = j.at("K").get<double>();
  p.sigma_y0 = j.at("sigma_y0").get<double>();
  p.c = j.at("c").get<double>();
  p.b = j.at("b").get<double>();
  const std::string h = j.at("hardening_on").get<std::string>();
  if (h == "Bpe")
    p.hardening_on = HardeningMeasure::ElasticHardeningStretch;
  else if (h == "Cp")
    p.hardening_on = HardeningMeasure::PlasticStretch;
  else
    throw ConfigError("vm_af.hardening_on must be 'Bpe' or 'Cp'");
  const std::string r = j.at("recovery_driver").get<std::string>();
  if (r == "Theta")
    p.recovery_driver = HardeningDriver::Theta;
  else if (r == "Gamma")
    p.recovery_driver = HardeningDriver::Gamma;
  else
    throw ConfigError("vm_af.recovery_driver must be 'Theta' or 'Gamma'");
  return p;
}

TschoeglParams tschoegl_params(const json& cfg) {
  const json& j = cfg.at("tschoegl");
  TschoeglParams p;
  p.mu = j.at("mu").get<double>();
  p.K = j.at("K").get<double>();
  p.sigma_t = j.at("sigma_t").get<double>();
  p.sigma_c = j.at("sigma_c").get<double>();
  return p;
}

PathSpec path_spec(const json& cfg, PathKind kind) {
  const json& j = cfg.at("paths");
  PathSpec s = default_path(kind);
  s.steps_per_ramp = j.at("steps_per_ramp").get<int>();
  s.n_cycles = j.at("n_cycles").get<int>();
  s.dt = j.at("dt").get<double>();
  const json& amp = j.at(path_kind_name(kind));
  if (kind == PathKind::Cyclic) {
    if (amp.size() != 2) throw ConfigError("paths.Cyc must hold [tension, compression] stretches");
    s.amplitude = amp[0].get<double>();
    s.amplitude_compression = amp[1].get<double>();
  } else {
    s.amplitude = amp.get<double>();
  }
  return s;
}

TrainConfig train_config(const json& cfg) {
  const json& j = cfg.at("train");
  TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.patience = j.at("patience").get<int>();
  t.min_rel_change = j.at("min_rel_change").get<double>();
  t.l2_energy = j.at("l2_energy").get<double>();
  t.l2_potential = j.at("l2_potential").get<double>();
  t.l1_energy = j.at("l1_energy").get<double>();
  t.l1_potential = j.at("l1_potential").get<double>();
  t.regularize_first_layer = j.at("regularize_first_layer").get<bool>();
  t.clipnorm = j.at("clipnorm").get<double>();
  t.seed = cfg.at("seed").get<std::uint64_t>();
  t.gradient = gradient_mode_from_name(j.at("gradient").get<std::string>());
  t.fd_step = j.at("fd_step").get<double>();
  t.f_enforce = j.at("f_enforce").get<double>();
  t.pretrain = j.at("pretrain").get<bool>();
  t.pretrain_epochs = j.at("pretrain_epochs").get<int>();
  t.init_output_max = j.at("init_output_max").get<double>();
  t.init_inner_max = j.at("init_inner_max").get<double>();
  t.trainable = {false, false, false, false, false};
  for (const auto& g : j.at("groups")) t.trainable[int(group_from_name(g.get<std::string>()))] = true;
  t.psi_e_full = t.psi_p_full = t.psi_pe_full = t.g1_full = t.g2_full = false;
  for (const auto& g : j.at("full_form")) {
    switch (group_from_name(g.get<std::string>())) {
      case Group::PsiE: t.psi_e_full = true; break;
      case Group::PsiP: t.psi_p_full = true; break;
      case Group::PsiPe: t.psi_pe_full = true; break;
      case Group::G1: t.g1_full = true; break;
      case Group::G2: t.g2_full = true; break;
    }
  }
  if (!(t.learning_rate > 0.0) || t.max_epochs < 0 || t.pretrain_epochs < 0 || !(t.clipnorm > 0.0) ||
      !(t.fd_step > 0.0) || !(t.f_enforce > 0.0))
    throw ConfigError("train: learning_rate, clipnorm, fd_step and f_enforce must be positive, epochs non-negative");
  t.step = step_options(cfg);
  return t;
}

}  // namespace icann::cli
