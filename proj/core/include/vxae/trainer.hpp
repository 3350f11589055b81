#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vxae/checkpoint.hpp"
#include "vxae/dataset.hpp"
#include "vxae/metrics.hpp"
#include "vxae/model.hpp"

namespace vxae {

struct TrainConfig {
  std::string model = "residual";  // "baseline" or "residual[:preset]"
  std::filesystem::path data_root;
  int epochs = 6;
  int batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  // Evaluate on the test split every this many steps; 0 evaluates at each epoch end.
  int eval_every = 0;
  // Limits evaluation to the first N test samples; 0 uses the whole split.
  int eval_samples = 0;
  // Stops after this many optimizer steps in total (counting resumed ones); 0 runs all epochs.
  std::uint64_t max_steps = 0;
  // Epoch checkpoints, metrics.csv and timing.csv go here when set.
  std::filesystem::path checkpoint_dir;
  // Writes the wall_seconds column of metrics.csv as 0 so reruns produce identical
  // files; real timings go to timing.csv.
  bool determinism = true;
  int dim = 64;
  double test_fraction = 0.2;
  // Prints each record as a JSON line on stdout.
  bool json_stdout = false;

  void validate() const;
};

struct TrainHooks {
  std::function<void(const MetricsRecord&)> on_record;
};

struct TrainResult {
  Checkpoint checkpoint;  // final state, includes optimizer moments
  std::vector<MetricsRecord> metrics;
  double final_eval_mse = 0.0;  // NaN when the test split is empty
  std::uint64_t steps = 0;
  double wall_seconds = 0.0;
  std::size_t skipped_files = 0;
};

// Mean over samples of the per-sample MSE, eval mode, no parameter or statistic
// changes. `max_samples` of 0 uses the whole split.
double evaluate(Autoencoder<float>& model, const Dataset& data, Split split, int batch_size = 16,
                int max_samples = 0);
double evaluate(const Checkpoint& ckpt, const Dataset& data, Split split, int batch_size = 16);

std::uint64_t steps_per_epoch(std::size_t train_samples, int batch_size);
// Training order for one epoch, a pure function of (ids, seed, epoch).
std::vector<std::size_t> epoch_order(const std::vector<std::size_t>& train_ids, std::uint64_t seed, int epoch);

// Throws DataError when the train split is empty and NumericError on a non-finite loss.
// With `resume`, continues from its step with its parameters and optimizer state.
TrainResult train(const TrainConfig& config, const Dataset& data, const TrainHooks& hooks = {},
                  const Checkpoint* resume = nullptr);
// Builds the dataset from config.data_root first.
TrainResult train(const TrainConfig& config, const TrainHooks& hooks = {});

Dataset load_dataset(const TrainConfig& config);

struct CompareRow {
  std::uint64_t step = 0;
  double mse_a = 0.0;
  double mse_b = 0.0;
  double wall_a = 0.0;
  double wall_b = 0.0;
};

struct CompareReport {
  std::string name_a, name_b;
  std::int64_t params_a = 0, params_b = 0;
  TrainResult a, b;
  std::vector<CompareRow> rows;  // train loss per step, aligned
  // wall_a / wall_b for the whole run. Above 1 means B trained faster.
  double wall_ratio = 0.0;
};

// Trains both configurations on the same data in the same order.
CompareReport compare(const TrainConfig& a, const TrainConfig& b, const Dataset& data);

inline constexpr const char* kCompareCsvHeader = "step,mse_a,mse_b,wall_a,wall_b";
std::string compare_to_csv(const CompareReport& report, bool zero_wall_clock);
std::string compare_summary_json(const CompareReport& report);

}  // namespace vxae
