#include "a2f/metrics.hpp"

#include <cmath>

#include "a2f/errors.hpp"

namespace a2f {

namespace {

MeanStd summarize(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace

MeanStd inception_score(const torch::Tensor& posteriors, int splits) {
  if (posteriors.dim() != 2) throw ShapeError("inception_score: posteriors must be N x K");
  if (splits < 1) throw Error("inception_score: splits must be >= 1");
  const auto p = posteriors.to(torch::kFloat64).contiguous();
  const auto n = p.size(0);
  if (n < splits) {
    throw DataError("inception_score: " + std::to_string(n) + " images for " + std::to_string(splits) + " splits");
  }
  if (!torch::isfinite(p).all().item<bool>() || (p < 0).any().item<bool>()) {
    throw DataError("inception_score: posteriors must be finite and non-negative");
  }
  if ((p.sum(1) - 1.0).abs().max().item<double>() > 1e-6) {
    throw DataError("inception_score: posterior rows must sum to 1");
  }
  std::vector<double> scores;
  for (int s = 0; s < splits; ++s) {
    const auto begin = n * s / splits;
    const auto end = n * (s + 1) / splits;
    const auto part = p.slice(0, begin, end);
    const auto marginal = part.mean(0, true);
    // 0 log 0 = 0
    const auto ratio = torch::where(part > 0, part / marginal, torch::ones_like(part));
    const auto kl = (part * torch::log(ratio)).sum(1);
    scores.push_back(std::exp(kl.mean().item<double>()));
  }
  return summarize(scores);
}

double attribute_l2(std::span<const double> ref, std::span<const double> synth) {
  if (ref.size() != synth.size()) throw ShapeError("attribute_l2: length mismatch");
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) sum += (ref[i] - synth[i]) * (ref[i] - synth[i]);
  return std::sqrt(sum);
}

MeanStd attribute_l2(const torch::Tensor& ref, const torch::Tensor& synth) {
  if (ref.dim() != 2 || !ref.sizes().equals(synth.sizes())) throw ShapeError("attribute_l2: shape mismatch");
  if (ref.size(0) == 0) throw DataError("attribute_l2: empty sets");
  const auto norms = (ref.to(torch::kFloat64) - synth.to(torch::kFloat64)).pow(2).sum(1).sqrt().contiguous();
  return summarize(std::vector<double>(norms.data_ptr<double>(), norms.data_ptr<double>() + norms.numel()));
}

PatternClassifier::PatternClassifier(std::shared_ptr<const AttributeScorer> scorer,
                                     std::vector<std::size_t> attribute_indices)
    : scorer_(std::move(scorer)), indices_(std::move(attribute_indices)) {
  if (indices_.empty() || indices_.size() > 16) {
    throw ConfigError("pattern classifier needs between 1 and 16 attributes");
  }
}

torch::Tensor PatternClassifier::posteriors_from_scores(const torch::Tensor& scores) const {
  const auto s = scores.to(torch::kFloat64);
  const auto m = static_cast<std::int64_t>(indices_.size());
  const std::int64_t classes = std::int64_t{1} << m;
  auto out = torch::ones({s.size(0), classes}, s.options());
  for (std::int64_t c = 0; c < classes; ++c) {
    for (std::int64_t j = 0; j < m; ++j) {
      const auto pj = s.select(1, static_cast<std::int64_t>(indices_[j]));
      const auto factor = ((c >> j) & 1) ? pj : 1.0 - pj;
      out.select(1, c).mul_(factor);
    }
  }
  return out / out.sum(1, true);
}

torch::Tensor PatternClassifier::posteriors(const torch::Tensor& images) const {
  return posteriors_from_scores(scorer_->scores(images));
}

std::string PatternClassifier::describe() const {
  return "attribute-pattern(" + std::to_string(indices_.size()) + " attributes, " +
         std::to_string(1 << indices_.size()) + " classes) over " + scorer_->describe();
}

}  // namespace a2f
