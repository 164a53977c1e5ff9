#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfim/data.hpp"
#include "rfim/network.hpp"

namespace rfim {

enum class Method { GD, WhiteGD, NGD, WhiteNGD, SGD, ADAM, RNGD };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
bool is_logistic_method(Method m);

// Dataset selection. source "mnist" reads the IDX pair from the dataset
// directory (RFIM_DATA_DIR, default ./data); "synth" draws two blobs;
// "synth_classes" draws one blob per output class; "auto" prefers mnist when
// the files exist and falls back to the matching synthetic source.
struct DataConfig {
  std::string source = "auto";
  int class_a = 3;
  int class_b = 5;
  double train_fraction = 0.5;
  std::size_t train_cap = 0;  // keep at most this many training samples (0 = all)
  std::size_t synth_n = 4000;
  std::size_t synth_dim = 50;
  double synth_separation = 3.0;
};

struct ExperimentConfig {
  Method method = Method::GD;
  std::string model = "logistic";  // "logistic" | "mlp"
  std::vector<std::size_t> layer_sizes = {784, 32, 32, 10};
  double omega = 0.1;

  DataConfig data;

  std::vector<double> gamma_grid = {1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> momentum_grid = {0.0, 0.8};
  double gamma = 0.1;
  double momentum = 0.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 0;  // 0 = full batch
  long refresh_period = 100;   // T
  double lambda = 0.995;
  double eps_rel = 1e-2;
  std::uint64_t seed = 0;

  void validate() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RunRecord {
  std::vector<double> costs;         // per-iteration training cost
  std::vector<double> train_errors;  // per-epoch 0-1 error on the training set
  std::vector<double> epoch_seconds;
  std::string config_echo;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::size_t diverged_at = 0;
  std::size_t clamp_events = 0;

  double final_cost() const { return costs.empty() ? 0.0 : costs.back(); }
  double final_error() const { return train_errors.empty() ? 1.0 : train_errors.back(); }
};

RunRecord run(const ExperimentConfig& cfg);

struct GridCell {
  double gamma = 0.0;
  double momentum = 0.0;
  bool valid = false;
  double final_error = 1.0;
  double final_cost = 0.0;
  RunRecord averaged;  // pointwise mean over repeats (first diverged run when invalid)
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
  bool has_best = false;

  const GridCell& best_cell() const;
};

// Averages `repeats` seeded runs per grid cell (seeds cfg.seed, cfg.seed+1, …)
// and selects the valid cell with the lowest final training error; ties go to
// the smallest gamma, then the smallest momentum. Diverged cells are flagged
// and excluded from selection.
GridResult run_grid(const ExperimentConfig& cfg, std::size_t repeats);

struct TauSharp {
  double mean = 0.0;
  double stddev = 0.0;
};

// Statistics of the cost trace over its final ceil(tau * total_iterations)
// entries. Throws when the trace is shorter than that window.
TauSharp tau_sharp_ratio(const RunRecord& record, double tau, std::size_t total_iterations);

// CSV `iteration,cost,smoothed_cost`; the smoothed column averages
// non-overlapping windows and repeats the value across each window.
void emit_curves(const RunRecord& record, const std::string& path,
                 std::size_t smooth_window = 10);

struct PropertyResult {
  std::string name;
  bool pass = false;
  double err = 0.0;
  double tol = 0.0;
};

// Property suites: "oracles", "invariance", "rank", "whitening", or "all".
std::vector<PropertyResult> verify(const std::string& suite);

std::string dataset_directory();
bool mnist_available();

struct TrainingSet {
  std::vector<Vector> xs;
  std::vector<int> labels;
  std::string source;  // what was actually used after "auto" resolution
};

// Training split for one run. The split (and any synthetic draw) depends on
// the seed, so grid repeats see resampled data.
TrainingSet resolve_training_set(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace rfim
