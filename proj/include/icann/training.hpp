#pragma once

// Model discovery: loss, gradients, clipped ADAM with non-negativity
// projection, staged pretraining and early stopping.
//
// Training works on normalized weights: every stress is divided by the global
// max |sigma11| of the training data, and the weights are expressed in those
// units (see to_normalized). Reported weights are converted back.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "icann/integrator.hpp"
#include "icann/models.hpp"
#include "icann/netfuncs.hpp"
#include "icann/refmodels.hpp"

namespace icann {

enum class GradientMode { FiniteDifference, Exact };
std::string gradient_mode_name(GradientMode m);
GradientMode gradient_mode_from_name(const std::string& s);

struct TrainConfig {
  double learning_rate = 0.01;
  int max_epochs = 5000;
  int patience = 50;
  double min_rel_change = 1e-9;
  double l2_energy = 0.001;
  double l2_potential = 0.0001;
  double l1_energy = 0.0;
  double l1_potential = 0.0;
  bool regularize_first_layer = false;
  double clipnorm = 0.01;
  std::uint64_t seed = 0;
  GradientMode gradient = GradientMode::FiniteDifference;
  double fd_step = 1e-6;
  double f_enforce = 0.5;
  bool pretrain = true;
  int pretrain_epochs = 300;
  // Groups that may become non-zero, indexed by Group.
  std::array<bool, 5> trainable{true, true, true, true, true};
  // Network forms of the trained model.
  bool psi_e_full = true;
  bool psi_p_full = false;
  bool psi_pe_full = false;
  bool g1_full = false;
  bool g2_full = false;
  // Initialization ranges for freshly unfrozen groups (normalized units).
  double init_output_max = 0.2;
  double init_inner_max = 0.5;
  StepOptions step;
};

nlohmann::json config_to_json(const TrainConfig& cfg);

struct LossBreakdown {
  double total = 0.0;
  double data = 0.0;
  double regularization = 0.0;
};

struct GradientResult {
  LossBreakdown loss;
  std::vector<double> grad;  // one entry per active parameter
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct StageRecord {
  std::string name;
  int epochs = 0;
  double final_loss = 0.0;
  double g1_init = 0.0;  // J2~ weight placed by the plasticity enforcement (yield stage)
};

struct TrainReport {
  WeightSet<double> weights;             // physical units
  WeightSet<double> normalized_weights;  // training units
  double scale = 1.0;                    // stress normalization factor
  std::vector<double> loss_history;      // main training, loss at the start of each epoch
  std::vector<StageRecord> stages;
  std::vector<std::string> events;
  int epochs = 0;
  bool early_stopped = false;
  double best_loss = 0.0;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Global max |sigma11| over all records (1 when all vanish).
double stress_scale(const std::vector<Dataset>& datasets);
std::vector<Dataset> normalize_datasets(const std::vector<Dataset>& datasets, double scale);

/// Weight-space template with the configured network forms, all zero.
WeightSet<double> empty_weights(const TrainConfig& cfg);

/// Predicted sigma11 for every record of a dataset (record 0 from the virgin state).
std::vector<double> predict(const WeightSet<double>& ws, const Dataset& ds, const StepOptions& opt = {});

double regularization(const WeightSet<double>& ws, const TrainConfig& cfg);

/// Mean squared error per experiment, averaged over experiments, plus regularization.
/// Weights and stresses are in the same (normalized) units.
LossBreakdown loss(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg);

/// Flat indices of parameters belonging to the given groups.
std::vector<int> active_parameters(const WeightSet<double>& ws, const std::array<bool, 5>& groups);

/// Loss and its gradient with respect to the active parameters.
GradientResult gradient(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                        const std::vector<int>& active);
GradientResult gradient_fd(const WeightSet<double>& ws, const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                           const std::vector<int>& active);
GradientResult gradient_exact(const WeightSet<double>& ws, const std::vector<Dataset>& datasets,
                              const TrainConfig& cfg, const std::vector<int>& active);

/// G min(1, c / |G|) with |G| the Euclidean norm.
std::vector<double> clip_gradient(const std::vector<double>& g, double c);

/// Bias-corrected ADAM update followed by w <- max(w, 0).
void adam_step(AdamState& state, std::vector<double>& w, const std::vector<double>& g, double lr);

/// Staged pretraining on normalized datasets; returns normalized weights.
WeightSet<double> pretrain(const std::vector<Dataset>& datasets, const TrainConfig& cfg, TrainReport* report = nullptr);

/// Full pipeline on raw (unnormalized) datasets. With `resume` (physical
/// units) pretraining is skipped.
TrainReport train(const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                  const WeightSet<double>* resume = nullptr);

}  // namespace icann
