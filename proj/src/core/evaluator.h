#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entailre {

struct Counts {
  std::size_t gold_positive = 0;
  std::size_t predicted_positive = 0;
  std::size_t correct = 0;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give zero, as in the TACRED scorer.
Prf PrfFromCounts(const Counts &counts);

struct ConfusionMatrix {
  std::vector<std::string> labels;
  // rows[i][j] = P(pred = labels[j] | gold = labels[i]); all-zero rows for
  // labels absent from gold.
  std::vector<std::vector<double>> rows;
};

struct ScoreReport {
  Counts support;
  Prf micro;
  // Restricted to gold-positive instances; negative predictions there are
  // recall misses.
  Prf positives_only;
  Counts positives_only_support;
  // All positive labels collapsed into one class.
  Prf positive_vs_negative;
  Counts positive_vs_negative_support;
  ConfusionMatrix confusion;

  double precision() const { return micro.precision; }
  double recall() const { return micro.recall; }
  double f1() const { return micro.f1; }
  double p_metric() const { return positives_only.f1; }
  double pvsn_metric() const { return positive_vs_negative.f1; }
};

// Lexicographic over the labels seen in gold and pred, negative label last.
std::vector<std::string> DefaultLabelOrder(std::span<const std::string> gold,
                                           std::span<const std::string> pred,
                                           std::string_view negative_label);

ConfusionMatrix ComputeConfusion(std::span<const std::string> gold,
                                 std::span<const std::string> pred,
                                 std::vector<std::string> label_order);

// Requires |gold| == |pred| > 0.
ScoreReport Evaluate(std::span<const std::string> gold,
                     std::span<const std::string> pred,
                     std::string_view negative_label);

// Per-example summary used for threshold decisions: the best positive
// relation score and whether that relation is the gold one.
struct DevScore {
  double max_score = 0.0;
  bool gold_positive = false;
  bool argmax_correct = false;
  // False when the type gate admits no relation; such examples are always
  // predicted negative.
  bool has_candidate = true;
};

// Micro-F1 of the predictions induced by "positive iff max_score >= t".
Counts CountsAtThreshold(std::span<const DevScore> scores, double threshold);
double F1AtThreshold(std::span<const DevScore> scores, double threshold);

std::vector<std::pair<double, double>> F1Sweep(
    std::span<const DevScore> scores, std::span<const double> grid);

std::string FormatReport(const ScoreReport &report);
std::string ReportToJson(const ScoreReport &report);
std::string ConfusionToCsv(const ConfusionMatrix &matrix);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double stderr_mean = 0.0;
};

Summary Summarize(std::span<const double> values);

}  // namespace entailre
