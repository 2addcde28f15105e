#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "a2f/metrics.hpp"

namespace a2f {

inline constexpr const char* kInceptionScoreMetric = "Inception Score";
inline constexpr const char* kAttributeL2Metric = "Attribute L2";

// Quantitative comparison table: one row per (metric, dataset), one column
// per method, cells "mean ± std".
class EvaluationReport {
 public:
  void set(const std::string& metric, const std::string& dataset, const std::string& method, MeanStd value);
  [[nodiscard]] std::optional<MeanStd> get(const std::string& metric, const std::string& dataset,
                                           const std::string& method) const;
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  [[nodiscard]] const std::vector<std::string>& methods() const { return methods_; }
  [[nodiscard]] const std::vector<std::string>& notes() const { return notes_; }

  // Markdown-style table. Metrics are grouped, datasets keep insertion order.
  [[nodiscard]] std::string to_text(int precision = 3) const;
  [[nodiscard]] std::string to_json() const;
  static EvaluationReport from_json(const std::string& json);

  bool operator==(const EvaluationReport&) const = default;

 private:
  struct Row {
    std::string metric;
    std::string dataset;
    std::map<std::string, MeanStd> cells;
    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows_;
  std::vector<std::string> methods_;
  std::vector<std::string> notes_;
};

class AttributeScorer;
class PosteriorClassifier;

struct EvaluationInputs {
  torch::Tensor synth;  // N x 3 x 64 x 64 in [-1,1]
  torch::Tensor ref;    // N x 3 x 64 x 64 in [-1,1]
  std::string dataset = "CelebA";
  std::string method = "Attribute2Sketch2Face";
  int splits = 10;
};

// Inception Score of the synthesized set and Attribute L2 between predicted
// attributes of matched synth/ref images. The predictor and classifier used
// are recorded as notes.
EvaluationReport evaluate_run(const EvaluationInputs& inputs, const AttributeScorer& predictor,
                              const PosteriorClassifier& classifier);

}  // namespace a2f
