#pragma once

#include <torch/torch.h>

namespace a2f {

inline constexpr double kLogVarianceMin = -20.0;
inline constexpr double kLogVarianceMax = 20.0;
inline constexpr double kProbabilityEpsilon = 1e-7;

// Diagonal Gaussian q(z|.) with mean and log-variance of equal shape
// (D or B x D). log_variance is clamped to [-20, 20] wherever it is
// exponentiated.
struct GaussianPosterior {
  torch::Tensor mean;
  torch::Tensor log_variance;
};

struct LossWeights {
  double lambda_kl_sketch = 1.0;  // weight of KL(q_sketch || N(0, I)); 1 in the CVAE bound
  double lambda_kl_noise = 1.0;
  double lambda_l1 = 100.0;
  double lambda_perp = 10.0;
  double prob_eps = kProbabilityEpsilon;

  void validate() const;
};

// 0.5 * sum_i (sigma_i^2 + mu_i^2 - 1 - log sigma_i^2), summed over the last
// dimension and averaged over any leading batch dimension.
torch::Tensor kl_standard_normal(const GaussianPosterior& q);

// z = mu + exp(0.5 * log sigma^2) * eps.
torch::Tensor reparameterize(const GaussianPosterior& q, const torch::Tensor& eps);

// -mean log D(G(x)) over all patches and samples.
torch::Tensor generator_adversarial_loss(const torch::Tensor& fake_scores,
                                         double eps = kProbabilityEpsilon);

// -mean log D(real) - mean log(1 - D(fake)).
torch::Tensor discriminator_adversarial_loss(const torch::Tensor& real_scores,
                                             const torch::Tensor& fake_scores,
                                             double eps = kProbabilityEpsilon);

// Mean absolute difference; shapes must match exactly.
torch::Tensor l1_loss(const torch::Tensor& x, const torch::Tensor& y);

class FeatureExtractor;

// l1_loss between frozen features of x and y.
torch::Tensor perceptual_loss(const torch::Tensor& x, const torch::Tensor& y,
                              const FeatureExtractor& extractor);

// adv + lambda_l1 * l1 + lambda_perp * perp.
torch::Tensor composite_loss(const torch::Tensor& adv, const torch::Tensor& l1,
                             const torch::Tensor& perp, const LossWeights& w);
double composite_loss(double adv, double l1, double perp, const LossWeights& w);

}  // namespace a2f
