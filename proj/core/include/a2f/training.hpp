#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace a2f {

// Optimizer and schedule shared by every stage: Adam with a constant rate
// for `warm_epochs`, then multiplied by (1 - 1/decay_epochs) after every
// further epoch.
struct TrainOptions {
  int epochs = 1;
  std::int64_t batch_size = 128;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int warm_epochs = 10;
  int decay_epochs = 10;
  std::uint64_t seed = 0;
  // Stop after this many optimizer steps (<= 0: no cap).
  std::int64_t max_steps = 0;
  // Checkpoint written after every epoch when set.
  std::optional<std::filesystem::path> checkpoint_path;

  void validate() const;

  // Paper-scale schedules.
  static TrainOptions celeba();
  static TrainOptions lfwa();
  static TrainOptions paired();
};

// Learning rate used during (0-based) `epoch`.
double learning_rate_at(const TrainOptions& options, int epoch);

torch::optim::Adam make_adam(std::vector<torch::Tensor> params, const TrainOptions& options);
void set_learning_rate(torch::optim::Optimizer& optimizer, double lr);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  std::int64_t steps = 0;
  std::map<std::string, double> losses;  // epoch means
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::int64_t total_steps = 0;

  [[nodiscard]] std::string to_jsonl() const;
  void write(const std::filesystem::path& path) const;
};

// Called after every optimizer step with the step index (1-based) and the
// step's loss components. Returning false stops training.
using StepCallback = std::function<bool(std::int64_t, const std::map<std::string, double>&)>;

// Shuffled mini-batch index lists for one epoch; the last batch may be short.
std::vector<torch::Tensor> epoch_batches(std::int64_t count, std::int64_t batch_size,
                                         torch::Generator& generator);

// Throws TrainingDiverged with the offending component named.
void check_finite_losses(const std::map<std::string, double>& losses, int epoch, std::int64_t step);

torch::Generator make_generator(std::uint64_t seed);

}  // namespace a2f
