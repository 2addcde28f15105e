#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace a2f {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  bool operator==(const MeanStd&) const = default;
};

// Rows of N x K class posteriors. For each of `splits` contiguous chunks:
// exp(mean_x KL(p(y|x) || p(y))) with p(y) the chunk marginal. Returns the
// mean and population standard deviation over the chunks.
MeanStd inception_score(const torch::Tensor& posteriors, int splits = 10);

// Euclidean norm of the difference.
double attribute_l2(std::span<const double> ref, std::span<const double> synth);
// Per-row norms of N x A predictions, summarised as mean / population std.
MeanStd attribute_l2(const torch::Tensor& ref, const torch::Tensor& synth);

// Maps images (N x 3 x 64 x 64 in [-1,1]) to class posteriors (N x K).
class PosteriorClassifier {
 public:
  virtual ~PosteriorClassifier() = default;
  [[nodiscard]] virtual torch::Tensor posteriors(const torch::Tensor& images) const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
};

// Maps images to per-attribute probabilities (N x A in [0,1]).
class AttributeScorer {
 public:
  virtual ~AttributeScorer() = default;
  [[nodiscard]] virtual torch::Tensor scores(const torch::Tensor& images) const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
};

// Classes are the 2^m on/off patterns of m chosen attributes; each pattern's
// probability is the product of the independent attribute probabilities.
class PatternClassifier final : public PosteriorClassifier {
 public:
  PatternClassifier(std::shared_ptr<const AttributeScorer> scorer, std::vector<std::size_t> attribute_indices);
  [[nodiscard]] torch::Tensor posteriors(const torch::Tensor& images) const override;
  [[nodiscard]] std::string describe() const override;
  // Same mapping applied to precomputed N x A probabilities.
  [[nodiscard]] torch::Tensor posteriors_from_scores(const torch::Tensor& scores) const;

 private:
  std::shared_ptr<const AttributeScorer> scorer_;
  std::vector<std::size_t> indices_;
};

}  // namespace a2f
