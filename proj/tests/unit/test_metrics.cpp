#include "testing.hpp"

#include <cmath>

#include "a2f/errors.hpp"
#include "a2f/metrics.hpp"
#include "a2f/report.hpp"

using namespace a2f;

namespace {

// Scores each image by its mean intensity, for every attribute.
class MeanScorer final : public AttributeScorer {
 public:
  explicit MeanScorer(int attrs) : attrs_(attrs) {}
  [[nodiscard]] torch::Tensor scores(const torch::Tensor& images) const override {
    auto m = (images.mean({1, 2, 3}) + 1) / 2;
    return m.unsqueeze(1).expand({images.size(0), attrs_}).contiguous();
  }
  [[nodiscard]] std::string describe() const override { return "mean"; }

 private:
  int attrs_;
};

// Independent Inception Score: plain loops in long double.
double is_oracle(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  const std::size_t k = p[0].size();
  std::vector<long double> marginal(k, 0.0L);
  for (const auto& row : p)
    for (std::size_t j = 0; j < k; ++j) marginal[j] += row[j] / static_cast<long double>(n);
  long double kl = 0.0L;
  for (const auto& row : p)
    for (std::size_t j = 0; j < k; ++j)
      if (row[j] > 0) kl += row[j] * (std::log(static_cast<long double>(row[j])) - std::log(marginal[j]));
  return static_cast<double>(std::exp(kl / static_cast<long double>(n)));
}

}  // namespace

TEST_CASE("Inception Score fixtures") {
  const auto uniform = torch::full({40, 8}, 1.0 / 8.0, torch::kFloat64);
  const auto u = inception_score(uniform, 10);
  CHECK(std::abs(u.mean - 1.0) < 1e-6);
  CHECK(u.std < 1e-6);

  const auto one_hot = torch::eye(8, torch::kFloat64).repeat({5, 1});
  const auto o = inception_score(one_hot, 5);
  CHECK(std::abs(o.mean - 8.0) < 1e-6);
  CHECK(o.std < 1e-6);
}

TEST_CASE("Inception Score matches a loop oracle on a single split") {
  auto g = torch::make_generator<at::CPUGeneratorImpl>(9);
  auto raw = torch::rand({12, 5}, g, torch::kFloat64) + 0.05;
  auto p = raw / raw.sum(1, true);
  std::vector<std::vector<double>> rows(12, std::vector<double>(5));
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 5; ++j) rows[i][j] = p[i][j].item<double>();
  CHECK(inception_score(p, 1).mean == doctest::Approx(is_oracle(rows)).epsilon(1e-12));
}

TEST_CASE("Inception Score validates its input") {
  CHECK_THROWS_AS(inception_score(torch::full({4, 2}, 0.7, torch::kFloat64), 1), DataError);
  CHECK_THROWS_AS(inception_score(torch::full({4, 2}, 0.5, torch::kFloat64), 5), DataError);
  auto neg = torch::tensor({{1.5, -0.5}}, torch::kFloat64);
  CHECK_THROWS_AS(inception_score(neg, 1), DataError);
}

TEST_CASE("attribute L2") {
  std::vector<double> a(23, 0.0);
  std::vector<double> b(23, 1.0);
  CHECK(attribute_l2(a, a) == 0.0);
  CHECK(std::abs(attribute_l2(a, b) - std::sqrt(23.0)) < 1e-9);
  CHECK_THROWS(attribute_l2(std::span<const double>(a).first(3), b));
  const auto r = attribute_l2(torch::zeros({4, 23}, torch::kFloat64), torch::ones({4, 23}, torch::kFloat64));
  CHECK(std::abs(r.mean - std::sqrt(23.0)) < 1e-9);
  CHECK(r.std < 1e-12);
}

TEST_CASE("pattern classifier yields a distribution over sign patterns") {
  PatternClassifier c(std::make_shared<MeanScorer>(4), {0, 2});
  const auto p = c.posteriors_from_scores(torch::tensor({{0.8, 0.0, 0.3, 0.0}}, torch::kFloat64));
  REQUIRE(p.sizes() == torch::IntArrayRef({1, 4}));
  CHECK(p[0][0].item<double>() == doctest::Approx(0.2 * 0.7));
  CHECK(p[0][1].item<double>() == doctest::Approx(0.8 * 0.7));
  CHECK(p[0][2].item<double>() == doctest::Approx(0.2 * 0.3));
  CHECK(p[0][3].item<double>() == doctest::Approx(0.8 * 0.3));
  const auto images = torch::rand({5, 3, 8, 8}) * 2 - 1;
  CHECK(torch::allclose(c.posteriors(images).sum(1), torch::ones({5}, torch::kFloat64)));
}

TEST_CASE("report renders the metric / dataset / method table") {
  EvaluationReport r;
  r.set(kInceptionScoreMetric, "CelebA", "Attribute2Sketch2Face", {1.87, 0.01});
  r.set(kInceptionScoreMetric, "LFWA", "Attribute2Sketch2Face", {1.5, 0.02});
  r.set(kAttributeL2Metric, "CelebA", "Attribute2Sketch2Face", {3.25, 0.5});
  const auto text = r.to_text(2);
  CHECK(text.rfind("| Metric ", 0) == 0);
  CHECK(text.find("| Dataset |") != std::string::npos);
  CHECK(text.find("Attribute2Sketch2Face") != std::string::npos);
  CHECK(text.find("1.87 ± 0.01") != std::string::npos);
  CHECK(text.find("3.25 ± 0.50") != std::string::npos);
  // The metric name appears once per group.
  const auto first = text.find("Inception Score");
  CHECK(text.find("Inception Score", first + 1) == std::string::npos);
  CHECK(EvaluationReport::from_json(r.to_json()) == r);
  CHECK(r.get(kAttributeL2Metric, "CelebA", "Attribute2Sketch2Face")->mean == 3.25);
  CHECK_FALSE(r.get(kAttributeL2Metric, "LFWA", "Attribute2Sketch2Face").has_value());
}

TEST_CASE("evaluate_run: identical folders give zero attribute distance") {
  auto scorer = std::make_shared<MeanScorer>(19);
  PatternClassifier classifier(scorer, {0, 1, 2});
  EvaluationInputs in;
  in.synth = torch::rand({10, 3, 16, 16}) * 2 - 1;
  in.ref = in.synth.clone();
  in.splits = 2;
  const auto report = evaluate_run(in, *scorer, classifier);
  const auto l2 = report.get(kAttributeL2Metric, "CelebA", "Attribute2Sketch2Face");
  REQUIRE(l2);
  CHECK(l2->mean == 0.0);
  const auto is = report.get(kInceptionScoreMetric, "CelebA", "Attribute2Sketch2Face");
  REQUIRE(is);
  CHECK(is->mean >= 1.0);
}
