#include "a2f/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

void EvaluationReport::set(const std::string& metric, const std::string& dataset, const std::string& method,
                           MeanStd value) {
  if (std::find(methods_.begin(), methods_.end(), method) == methods_.end()) methods_.push_back(method);
  auto it = std::find_if(rows_.begin(), rows_.end(),
                         [&](const Row& r) { return r.metric == metric && r.dataset == dataset; });
  if (it == rows_.end()) {
    // Keep rows of one metric together.
    auto last = std::find_if(rows_.rbegin(), rows_.rend(), [&](const Row& r) { return r.metric == metric; });
    it = rows_.insert(last == rows_.rend() ? rows_.end() : last.base(), Row{metric, dataset, {}});
  }
  it->cells[method] = value;
}

std::optional<MeanStd> EvaluationReport::get(const std::string& metric, const std::string& dataset,
                                             const std::string& method) const {
  for (const auto& r : rows_) {
    if (r.metric == metric && r.dataset == dataset) {
      if (auto c = r.cells.find(method); c != r.cells.end()) return c->second;
    }
  }
  return std::nullopt;
}

std::string EvaluationReport::to_text(int precision) const {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"Metric", "Dataset"};
  header.insert(header.end(), methods_.begin(), methods_.end());
  table.push_back(header);
  std::string previous;
  for (const auto& r : rows_) {
    std::vector<std::string> line{r.metric == previous ? "" : r.metric, r.dataset};
    previous = r.metric;
    for (const auto& m : methods_) {
      auto c = r.cells.find(m);
      if (c == r.cells.end()) {
        line.emplace_back("-");
        continue;
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(precision) << c->second.mean << " ± " << c->second.std;
      line.push_back(cell.str());
    }
    table.push_back(line);
  }
  // "±" is two bytes but one column.
  auto width = [](const std::string& s) {
    return s.size() - static_cast<std::size_t>(std::count(s.begin(), s.end(), '\xc2'));
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], width(line[i]));
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    out << '|';
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << ' ' << line[i] << std::string(widths[i] - width(line[i]), ' ') << " |";
    }
    out << '\n';
  };
  emit(table[0]);
  out << '|';
  for (auto w : widths) out << std::string(w + 2, '-') << '|';
  out << '\n';
  for (std::size_t i = 1; i < table.size(); ++i) emit(table[i]);
  for (const auto& n : notes_) out << "\n" << n;
  if (!notes_.empty()) out << '\n';
  return out.str();
}

std::string EvaluationReport::to_json() const {
  json rows = json::array();
  for (const auto& r : rows_) {
    json cells = json::object();
    for (const auto& [m, v] : r.cells) cells[m] = {{"mean", v.mean}, {"std", v.std}};
    rows.push_back({{"metric", r.metric}, {"dataset", r.dataset}, {"cells", cells}});
  }
  return json{{"methods", methods_}, {"rows", rows}, {"notes", notes_}}.dump(2);
}

EvaluationReport EvaluationReport::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    EvaluationReport report;
    report.methods_ = j.at("methods").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      Row row{r.at("metric"), r.at("dataset"), {}};
      for (const auto& [m, v] : r.at("cells").items()) row.cells[m] = {v.at("mean"), v.at("std")};
      report.rows_.push_back(std::move(row));
    }
    report.notes_ = j.at("notes").get<std::vector<std::string>>();
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

EvaluationReport evaluate_run(const EvaluationInputs& inputs, const AttributeScorer& predictor,
                              const PosteriorClassifier& classifier) {
  if (!inputs.synth.defined() || !inputs.ref.defined() || inputs.synth.size(0) == 0 || inputs.ref.size(0) == 0) {
    throw DataError("evaluate_run: empty image sets");
  }
  if (inputs.synth.size(0) != inputs.ref.size(0)) throw DataError("evaluate_run: synth/ref counts differ");
  EvaluationReport report;
  torch::NoGradGuard no_grad;
  const auto splits = static_cast<int>(std::min<std::int64_t>(inputs.splits, inputs.synth.size(0)));
  report.set(kInceptionScoreMetric, inputs.dataset, inputs.method,
             inception_score(classifier.posteriors(inputs.synth), splits));
  report.set(kAttributeL2Metric, inputs.dataset, inputs.method,
             attribute_l2(predictor.scores(inputs.ref), predictor.scores(inputs.synth)));
  report.add_note("attribute predictor: " + predictor.describe());
  report.add_note("inception classifier: " + classifier.describe());
  report.add_note("inception splits: " + std::to_string(splits));
  return report;
}

}  // namespace a2f
