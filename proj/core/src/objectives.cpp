#include "a2f/objectives.hpp"

#include <cmath>

#include "a2f/errors.hpp"
#include "a2f/perceptual.hpp"

namespace a2f {

namespace {

void require_finite(const torch::Tensor& t, const char* what) {
  if (!torch::isfinite(t).all().item<bool>()) {
    throw Error(std::string(what) + ": non-finite input");
  }
}

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (!a.sizes().equals(b.sizes())) {
    throw ShapeError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda_kl_sketch, lambda_kl_noise, lambda_l1, lambda_perp}) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("loss weights must be finite and >= 0");
  }
  if (!(prob_eps > 0.0 && prob_eps < 0.5)) throw ConfigError("prob_eps must lie in (0, 0.5)");
}

torch::Tensor kl_standard_normal(const GaussianPosterior& q) {
  require_same_shape(q.mean, q.log_variance, "kl_standard_normal");
  require_finite(q.mean, "kl_standard_normal mean");
  require_finite(q.log_variance, "kl_standard_normal log_variance");
  const auto lv = q.log_variance.clamp(kLogVarianceMin, kLogVarianceMax);
  auto per_dim = 0.5 * (lv.exp() + q.mean.pow(2) - 1.0 - lv);
  auto per_sample = per_dim.sum(-1);
  return per_sample.dim() == 0 ? per_sample : per_sample.mean();
}

torch::Tensor reparameterize(const GaussianPosterior& q, const torch::Tensor& eps) {
  require_same_shape(q.mean, q.log_variance, "reparameterize");
  require_same_shape(q.mean, eps, "reparameterize eps");
  const auto lv = q.log_variance.clamp(kLogVarianceMin, kLogVarianceMax);
  return q.mean + (0.5 * lv).exp() * eps;
}

torch::Tensor generator_adversarial_loss(const torch::Tensor& fake_scores, double eps) {
  if (torch::isnan(fake_scores).any().item<bool>()) {
    throw Error("generator_adversarial_loss: NaN score");
  }
  return -fake_scores.clamp(eps, 1.0).log().mean();
}

torch::Tensor discriminator_adversarial_loss(const torch::Tensor& real_scores,
                                             const torch::Tensor& fake_scores, double eps) {
  if (torch::isnan(real_scores).any().item<bool>() || torch::isnan(fake_scores).any().item<bool>()) {
    throw Error("discriminator_adversarial_loss: NaN score");
  }
  const auto real_term = real_scores.clamp(eps, 1.0).log().mean();
  const auto fake_term = (1.0 - fake_scores).clamp(eps, 1.0).log().mean();
  return -real_term - fake_term;
}

torch::Tensor l1_loss(const torch::Tensor& x, const torch::Tensor& y) {
  require_same_shape(x, y, "l1_loss");
  return (x - y).abs().mean();
}

torch::Tensor perceptual_loss(const torch::Tensor& x, const torch::Tensor& y,
                              const FeatureExtractor& extractor) {
  require_same_shape(x, y, "perceptual_loss");
  return a2f::l1_loss(extractor.features(x), extractor.features(y));
}

torch::Tensor composite_loss(const torch::Tensor& adv, const torch::Tensor& l1,
                             const torch::Tensor& perp, const LossWeights& w) {
  return adv + w.lambda_l1 * l1 + w.lambda_perp * perp;
}

double composite_loss(double adv, double l1, double perp, const LossWeights& w) {
  return adv + w.lambda_l1 * l1 + w.lambda_perp * perp;
}

}  // namespace a2f
