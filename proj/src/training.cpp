#include "icann/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace icann {

std::string gradient_mode_name(GradientMode m) { return m == GradientMode::Exact ? "exact" : "fd"; }

GradientMode gradient_mode_from_name(const std::string& s) {
  if (s == "fd") return GradientMode::FiniteDifference;
  if (s == "exact") return GradientMode::Exact;
  throw ConfigError("gradient mode must be 'fd' or 'exact', got '" + s + "'");
}

nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["learning_rate"] = c.learning_rate;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["min_rel_change"] = c.min_rel_change;
  j["l2_energy"] = c.l2_energy;
  j["l2_potential"] = c.l2_potential;
  j["l1_energy"] = c.l1_energy;
  j["l1_potential"] = c.l1_potential;
  j["regularize_first_layer"] = c.regularize_first_layer;
  j["clipnorm"] = c.clipnorm;
  j["seed"] = c.seed;
  j["gradient"] = gradient_mode_name(c.gradient);
  j["fd_step"] = c.fd_step;
  j["f_enforce"] = c.f_enforce;
  j["pretrain"] = c.pretrain;
  j["pretrain_epochs"] = c.pretrain_epochs;
  nlohmann::json groups = nlohmann::json::array();
  for (Group g : kAllGroups)
    if (c.trainable[int(g)]) groups.push_back(group_name(g));
  j["groups"] = groups;
  j["psi_e_full"] = c.psi_e_full;
  j["psi_p_full"] = c.psi_p_full;
  j["psi_pe_full"] = c.psi_pe_full;
  j["g1_full"] = c.g1_full;
  j["g2_full"] = c.g2_full;
  j["init_output_max"] = c.init_output_max;
  j["init_inner_max"] = c.init_inner_max;
  j["tol_phi"] = c.step.tol_phi;
  j["max_iters"] = c.step.max_iters;
  return j;
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json j;
  j["weights"] = weights_to_json(weights);
  j["normalized_weights"] = weights_to_json(normalized_weights);
  j["scale"] = scale;
  j["loss_history"] = loss_history;
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages)
    st.push_back({{"name", s.name}, {"epochs", s.epochs}, {"final_loss", s.final_loss}, {"g1_init", s.g1_init}});
  j["pretraining"] = st;
  j["events"] = events;
  j["epochs"] = epochs;
  j["early_stopped"] = early_stopped;
  j["best_loss"] = best_loss;
  j["wall_seconds"] = wall_seconds;
  return j;
}

double stress_scale(const std::vector<Dataset>& datasets) {
  double m = 0.0;
  for (const auto& ds : datasets)
    for (double s : ds.sigma11) m = std::max(m, std::fabs(s));
  return m > 0.0 ? m : 1.0;
}

std::vector<Dataset> normalize_datasets(const std::vector<Dataset>& datasets, double scale) {
  std::vector<Dataset> out = datasets;
  for (auto& ds : out) {
    for (double& s : ds.sigma11) s /= scale;
    ds.normalization = max_abs_stress(ds);
  }
  return out;
}

WeightSet<double> empty_weights(const TrainConfig& cfg) {
  WeightSet<double> w;
  w.psi_e.full_form = cfg.psi_e_full;
  w.psi_p.full_form = cfg.psi_p_full;
  w.psi_pe.full_form = cfg.psi_pe_full;
  w.g1.full_form = cfg.g1_full;
  w.g2.full_form = cfg.g2_full;
  return w;
}

namespace {

template <class T>
std::vector<T> predict_t(const NetworkModel<T>& model, const NetworkModel<double>& vmodel, const Dataset& ds,
                         const StepOptions& opt) {
  std::vector<T> out;
  out.reserve(ds.size());
  SymTensor3<T> c0;
  for (int k = 0; k < 6; ++k) c0[k] = T(ds.C[0][k]);
  const MaterialState<T> virgin;
  const StressSet<T> s0 = compute_stresses(model, corotated_kinematics(c0, virgin.Up, virgin.Upi), opt.bc);
  out.push_back(cauchy_stress(c0, s0.S).xx());
  const auto res = simulate_path(model, vmodel, ds.history(), opt);
  for (const auto& r : res) out.push_back(r.sigma.xx());
  return out;
}

bool regularized(const ParamInfo& info, const TrainConfig& cfg) {
  return info.output_layer || cfg.regularize_first_layer;
}

double l2_factor(const ParamInfo& info, const TrainConfig& cfg) {
  return is_energy_group(info.group) ? cfg.l2_energy : cfg.l2_potential;
}

double l1_factor(const ParamInfo& info, const TrainConfig& cfg) {
  return is_energy_group(info.group) ? cfg.l1_energy : cfg.l1_potential;
}

double data_term(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const StepOptions& opt) {
  if (datasets.empty()) throw ConfigError("no training datasets");
  const NetworkModel<double> model(ws);
  double total = 0.0;
  for (const auto& ds : datasets) {
    const auto pred = predict_t(model, model, ds, opt);
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred[i] - ds.sigma11[i];
      se += d * d;
    }
    total += se / double(pred.size());
  }
  return total / double(datasets.size());
}

template <int N>
void exact_chunk(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                 const std::vector<int>& active, std::size_t begin, std::vector<double>& grad, double& data) {
  using D = ad::Dual<N>;
  WeightSet<D> wd = promote<D>(ws);
  const std::size_t count = std::min<std::size_t>(N, active.size() - begin);
  {
    int flat = 0;
    std::size_t next = begin;
    for_each_weight(wd, [&](const ParamInfo&, D& w) {
      if (next < begin + count && flat == active[next]) {
        w.d[next - begin] = 1.0;
        ++next;
      }
      ++flat;
    });
  }
  const NetworkModel<D> model(std::move(wd));
  const NetworkModel<double> vmodel(ws);
  std::array<double, N> acc{};
  double total = 0.0;
  for (const auto& ds : datasets) {
    const auto pred = predict_t(model, vmodel, ds, cfg.step);
    const double inv_n = 1.0 / double(pred.size());
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred[i].v - ds.sigma11[i];
      se += d * d;
      for (std::size_t s = 0; s < count; ++s) acc[s] += 2.0 * d * pred[i].d[s] * inv_n / double(datasets.size());
    }
    total += se * inv_n;
  }
  data = total / double(datasets.size());
  for (std::size_t s = 0; s < count; ++s) grad[begin + s] = acc[s];
}

void add_regularization_gradient(const WeightSet<double>& ws, const TrainConfig& cfg, const std::vector<int>& active,
                                 std::vector<double>& grad) {
  const auto layout = parameter_layout(ws);
  const auto flat = flatten(ws);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const ParamInfo& info = layout[active[k]];
    if (!regularized(info, cfg)) continue;
    const double w = flat[active[k]];
    // One-sided derivative into the feasible set for the L1 kink at 0.
    grad[k] += 2.0 * l2_factor(info, cfg) * w + l1_factor(info, cfg);
  }
}

void check_finite(const GradientResult& g) {
  if (!std::isfinite(g.loss.total)) throw NonFiniteGradient("loss is not finite");
  for (double v : g.grad)
    if (!std::isfinite(v)) throw NonFiniteGradient("gradient component is not finite");
}

}  // namespace

std::vector<double> predict(const WeightSet<double>& ws, const Dataset& ds, const StepOptions& opt) {
  const NetworkModel<double> model(ws);
  return predict_t(model, model, ds, opt);
}

double regularization(const WeightSet<double>& ws, const TrainConfig& cfg) {
  double r = 0.0;
  for_each_weight(ws, [&](const ParamInfo& info, const double& w) {
    if (!regularized(info, cfg)) return;
    r += l2_factor(info, cfg) * w * w + l1_factor(info, cfg) * std::fabs(w);
  });
  return r;
}

LossBreakdown loss(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg) {
  LossBreakdown l;
  l.data = data_term(ws, datasets, cfg.step);
  l.regularization = regularization(ws, cfg);
  l.total = l.data + l.regularization;
  return l;
}

std::vector<int> active_parameters(const WeightSet<double>& ws, const std::array<bool, 5>& groups) {
  std::vector<int> out;
  int i = 0;
  for_each_weight(ws, [&](const ParamInfo& info, const double&) {
    if (groups[int(info.group)]) out.push_back(i);
    ++i;
  });
  return out;
}

GradientResult gradient_fd(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                           const std::vector<int>& active) {
  GradientResult out;
  out.loss = loss(ws, datasets, cfg);
  out.grad.assign(active.size(), 0.0);
  const std::vector<double> base = flatten(ws);
  const double h = cfg.fd_step;
  WeightSet<double> probe = ws;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const int i = active[k];
    std::vector<double> w = base;
    if (base[i] >= h) {
      w[i] = base[i] + h;
      unflatten(probe, w);
      const double lp = loss(probe, datasets, cfg).total;
      w[i] = base[i] - h;
      unflatten(probe, w);
      const double lm = loss(probe, datasets, cfg).total;
      out.grad[k] = (lp - lm) / (2.0 * h);
    } else {
      // Stay inside the non-negative orthant.
      w[i] = base[i] + h;
      unflatten(probe, w);
      out.grad[k] = (loss(probe, datasets, cfg).total - out.loss.total) / h;
    }
  }
  check_finite(out);
  return out;
}

GradientResult gradient_exact(const WeightSet<double>& ws, const std::vector<Dataset>& datasets,
                              const TrainConfig& cfg, const std::vector<int>& active) {
  if (datasets.empty()) throw ConfigError("no training datasets");
  GradientResult out;
  out.grad.assign(active.size(), 0.0);
  double data = 0.0;
  if (active.empty()) {
    data = data_term(ws, datasets, cfg.step);
  } else {
    for (std::size_t begin = 0; begin < active.size();) {
      const std::size_t left = active.size() - begin;
      if (left <= 8)
        exact_chunk<8>(ws, datasets, cfg, active, begin, out.grad, data), begin += 8;
      else if (left <= 16)
        exact_chunk<16>(ws, datasets, cfg, active, begin, out.grad, data), begin += 16;
      else if (left <= 24)
        exact_chunk<24>(ws, datasets, cfg, active, begin, out.grad, data), begin += 24;
      else if (left <= 32)
        exact_chunk<32>(ws, datasets, cfg, active, begin, out.grad, data), begin += 32;
      else
        exact_chunk<48>(ws, datasets, cfg, active, begin, out.grad, data), begin += 48;
    }
  }
  add_regularization_gradient(ws, cfg, active, out.grad);
  out.loss.data = data;
  out.loss.regularization = regularization(ws, cfg);
  out.loss.total = out.loss.data + out.loss.regularization;
  check_finite(out);
  return out;
}

GradientResult gradient(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                        const std::vector<int>& active) {
  return cfg.gradient == GradientMode::Exact ? gradient_exact(ws, datasets, cfg, active)
                                             : gradient_fd(ws, datasets, cfg, active);
}

std::vector<double> clip_gradient(const std::vector<double>& g, double c) {
  if (!(c > 0.0)) throw ConfigError("clipnorm must be positive");
  double n2 = 0.0;
  for (double v : g) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n == 0.0) return g;
  const double f = std::min(1.0, c / n);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * f;
  return out;
}

void adam_step(AdamState& st, std::vector<double>& w, const std::vector<double>& g, double lr) {
  if (st.m.size() != w.size()) {
    st.m.assign(w.size(), 0.0);
    st.v.assign(w.size(), 0.0);
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, double(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, double(st.t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g[i] * g[i];
    const double mh = st.m[i] / c1;
    const double vh = st.v[i] / c2;
    w[i] = std::max(0.0, w[i] - lr * mh / (std::sqrt(vh) + st.eps));
  }
}

namespace {

struct Optimized {
  WeightSet<double> best;
  double best_loss = std::numeric_limits<double>::infinity();
  int epochs = 0;
  bool early_stopped = false;
};

Optimized optimize(const WeightSet<double>& start, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                   const std::vector<int>& active, int max_epochs, std::vector<double>* history,
                   std::vector<std::string>* events) {
  Optimized out;
  out.best = start;
  WeightSet<double> w = start;
  std::vector<double> flat = flatten(w);
  std::vector<double> last_good = flat;
  bool have_good = false;
  AdamState adam;
  double lr = cfg.learning_rate;
  int since_improvement = 0;

  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    GradientResult gr;
    try {
      gr = gradient(w, datasets, cfg, active);
    } catch (const NumericalError& e) {
      // The last update produced weights the integrator cannot handle:
      // return to the previous weights and take smaller steps.
      if (!have_good || lr < 1e-6 * cfg.learning_rate) throw;
      flat = last_good;
      unflatten(w, flat);
      lr *= 0.5;
      if (events)
        events->push_back("epoch " + std::to_string(epoch) + ": " + e.what() + "; step reverted, learning rate " +
                          std::to_string(lr));
      out.epochs = epoch + 1;
      continue;
    }
    out.epochs = epoch + 1;
    if (history) history->push_back(gr.loss.total);
    if (gr.loss.total < out.best_loss - cfg.min_rel_change * std::fabs(out.best_loss) ||
        !std::isfinite(out.best_loss)) {
      out.best_loss = gr.loss.total;
      out.best = w;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      out.early_stopped = true;
      break;
    }
    last_good = flat;
    have_good = true;
    if (active.empty()) break;
    const std::vector<double> g = clip_gradient(gr.grad, cfg.clipnorm);
    std::vector<double> sub(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) sub[k] = flat[active[k]];
    adam_step(adam, sub, g, lr);
    for (std::size_t k = 0; k < active.size(); ++k) flat[active[k]] = sub[k];
    unflatten(w, flat);
  }
  return out;
}

// Fills one group with seeded random values (output layer and inner layer ranges).
void randomize_group(WeightSet<double>& w, Group group, std::mt19937_64& rng, const TrainConfig& cfg) {
  std::uniform_real_distribution<double> out_dist(0.0, cfg.init_output_max);
  std::uniform_real_distribution<double> in_dist(0.0, cfg.init_inner_max);
  for_each_weight(w, [&](const ParamInfo& info, double& v) {
    if (info.group != group) return;
    v = info.output_layer ? out_dist(rng) : in_dist(rng);
  });
}

// Largest J2~ of the relative stress along the data under the current model.
double max_trial_j2s(const WeightSet<double>& w, const std::vector<Dataset>& datasets, const StepOptions& opt) {
  const NetworkModel<double> model(w);
  double m = 0.0;
  for (const auto& ds : datasets) {
    const auto res = simulate_path(model, ds.history(), opt);
    for (const auto& r : res) {
      const Sym3 d = dev(r.stresses.Gamma);
      m = std::max(m, 1.5 * contract(d, d));
    }
  }
  return m;
}

// Yield stage start: only the J2~ channel active, placing plastic onset at
// f_enforce times the largest J2~ seen in the data.
double enforce_plasticity(WeightSet<double>& w, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                          std::mt19937_64& rng) {
  randomize_group(w, Group::G1, rng, cfg);
  for (int k = 0; k < w.g1.w2_count(); ++k) w.g1.w2[k] = 0.0;
  const double j2max = max_trial_j2s(w, datasets, cfg.step);
  const double value = j2max > 0.0 ? 1.0 / (cfg.f_enforce * j2max) : 1.0;
  w.g1.w2[w.g1.full_form ? 6 : 4] = value;
  return value;
}

std::array<bool, 5> only(std::initializer_list<Group> groups, const std::array<bool, 5>& allowed) {
  std::array<bool, 5> m{};
  for (Group g : groups) m[int(g)] = allowed[int(g)];
  return m;
}

}  // namespace

WeightSet<double> pretrain(const std::vector<Dataset>& datasets, const TrainConfig& cfg, TrainReport* report) {
  if (datasets.empty()) throw ConfigError("no training datasets");
  std::mt19937_64 rng(cfg.seed);
  WeightSet<double> w = empty_weights(cfg);

  struct Stage {
    const char* name;
    std::initializer_list<Group> groups;
  };
  const Stage stages[] = {{"elastic", {Group::PsiE}},
                          {"yield", {Group::G1}},
                          {"linear hardening", {Group::PsiP}},
                          {"nonlinear hardening", {Group::PsiPe, Group::G2}}};
  for (const Stage& st : stages) {
    const std::array<bool, 5> mask = only(st.groups, cfg.trainable);
    bool any = false;
    for (bool b : mask) any = any || b;
    if (!any) continue;
    StageRecord rec;
    rec.name = st.name;
    for (Group g : st.groups) {
      if (!mask[int(g)]) continue;
      if (g == Group::G1)
        rec.g1_init = enforce_plasticity(w, datasets, cfg, rng);
      else
        randomize_group(w, g, rng, cfg);
    }
    const Optimized o = optimize(w, datasets, cfg, active_parameters(w, mask), cfg.pretrain_epochs, nullptr,
                                 report ? &report->events : nullptr);
    w = o.best;
    rec.epochs = o.epochs;
    rec.final_loss = o.best_loss;
    if (report) report->stages.push_back(rec);
  }
  return w;
}

TrainReport train(const std::vector<Dataset>& raw, const TrainConfig& cfg, const WeightSet<double>* resume) {
  if (raw.empty()) throw ConfigError("no training datasets");
  if (cfg.patience < 1) throw ConfigError("patience must be at least 1");
  for (double f : {cfg.l2_energy, cfg.l2_potential, cfg.l1_energy, cfg.l1_potential})
    if (f < 0.0) throw ConfigError("regularization factors must be non-negative");
  for (const auto& ds : raw) ds.validate();

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  rep.scale = stress_scale(raw);
  const std::vector<Dataset> data = normalize_datasets(raw, rep.scale);

  WeightSet<double> w;
  if (resume) {
    w = to_normalized(*resume, rep.scale);
  } else if (cfg.pretrain) {
    w = pretrain(data, cfg, &rep);
  } else {
    std::mt19937_64 rng(cfg.seed);
    w = empty_weights(cfg);
    for (Group g : kAllGroups) {
      if (!cfg.trainable[int(g)]) continue;
      if (g == Group::G1)
        enforce_plasticity(w, data, cfg, rng);
      else
        randomize_group(w, g, rng, cfg);
    }
  }

  const Optimized o =
      optimize(w, data, cfg, active_parameters(w, cfg.trainable), cfg.max_epochs, &rep.loss_history, &rep.events);
  rep.normalized_weights = o.best;
  rep.weights = from_normalized(o.best, rep.scale);
  rep.epochs = o.epochs;
  rep.early_stopped = o.early_stopped;
  rep.best_loss = o.best_loss;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace icann
