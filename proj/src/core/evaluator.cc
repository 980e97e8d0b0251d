#include "core/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "core/error.h"
#include "json.hpp"

namespace entailre {
namespace {

void CheckLengths(std::span<const std::string> gold,
                  std::span<const std::string> pred) {
  if (gold.size() != pred.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "gold has " + std::to_string(gold.size()) + " labels but pred has " +
             std::to_string(pred.size()));
  }
  if (gold.empty()) Fail(ErrorCode::kInvalidArgument, "nothing to evaluate");
}

nlohmann::json PrfJson(const Prf &prf, const Counts &counts) {
  return {{"precision", prf.precision},
          {"recall", prf.recall},
          {"f1", prf.f1},
          {"gold_positive", counts.gold_positive},
          {"predicted_positive", counts.predicted_positive},
          {"correct", counts.correct}};
}

}  // namespace

Prf PrfFromCounts(const Counts &counts) {
  Prf out;
  if (counts.predicted_positive > 0) {
    out.precision = static_cast<double>(counts.correct) /
                    static_cast<double>(counts.predicted_positive);
  }
  if (counts.gold_positive > 0) {
    out.recall = static_cast<double>(counts.correct) /
                 static_cast<double>(counts.gold_positive);
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

std::vector<std::string> DefaultLabelOrder(std::span<const std::string> gold,
                                           std::span<const std::string> pred,
                                           std::string_view negative_label) {
  std::set<std::string> seen(gold.begin(), gold.end());
  seen.insert(pred.begin(), pred.end());
  const bool has_negative = seen.erase(std::string(negative_label)) > 0;
  std::vector<std::string> out(seen.begin(), seen.end());
  if (has_negative) out.emplace_back(negative_label);
  return out;
}

ConfusionMatrix ComputeConfusion(std::span<const std::string> gold,
                                 std::span<const std::string> pred,
                                 std::vector<std::string> label_order) {
  CheckLengths(gold, pred);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < label_order.size(); ++i) {
    if (!index.emplace(label_order[i], i).second) {
      Fail(ErrorCode::kInvalidArgument,
           "duplicate label in order: " + label_order[i]);
    }
  }
  const std::size_t n = label_order.size();
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  std::vector<double> totals(n, 0.0);
  for (std::size_t k = 0; k < gold.size(); ++k) {
    auto g = index.find(gold[k]);
    auto p = index.find(pred[k]);
    if (g == index.end() || p == index.end()) {
      Fail(ErrorCode::kInvalidArgument,
           "label missing from label order: " +
               (g == index.end() ? gold[k] : pred[k]));
    }
    counts[g->second][p->second] += 1.0;
    totals[g->second] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (totals[i] == 0.0) continue;
    for (double &cell : counts[i]) cell /= totals[i];
  }
  return ConfusionMatrix{std::move(label_order), std::move(counts)};
}

ScoreReport Evaluate(std::span<const std::string> gold,
                     std::span<const std::string> pred,
                     std::string_view negative_label) {
  CheckLengths(gold, pred);
  ScoreReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool gold_pos = gold[i] != negative_label;
    const bool pred_pos = pred[i] != negative_label;
    const bool match = gold_pos && pred_pos && gold[i] == pred[i];

    report.support.gold_positive += gold_pos;
    report.support.predicted_positive += pred_pos;
    report.support.correct += match;

    if (gold_pos) {
      report.positives_only_support.gold_positive += 1;
      report.positives_only_support.predicted_positive += pred_pos;
      report.positives_only_support.correct += match;
    }

    report.positive_vs_negative_support.gold_positive += gold_pos;
    report.positive_vs_negative_support.predicted_positive += pred_pos;
    report.positive_vs_negative_support.correct += gold_pos && pred_pos;
  }
  report.micro = PrfFromCounts(report.support);
  report.positives_only = PrfFromCounts(report.positives_only_support);
  report.positive_vs_negative =
      PrfFromCounts(report.positive_vs_negative_support);
  report.confusion = ComputeConfusion(
      gold, pred, DefaultLabelOrder(gold, pred, negative_label));
  return report;
}

Counts CountsAtThreshold(std::span<const DevScore> scores, double threshold) {
  Counts counts;
  for (const DevScore &s : scores) {
    const bool predicted = s.has_candidate && s.max_score >= threshold;
    counts.gold_positive += s.gold_positive;
    counts.predicted_positive += predicted;
    counts.correct += predicted && s.gold_positive && s.argmax_correct;
  }
  return counts;
}

double F1AtThreshold(std::span<const DevScore> scores, double threshold) {
  return PrfFromCounts(CountsAtThreshold(scores, threshold)).f1;
}

std::vector<std::pair<double, double>> F1Sweep(
    std::span<const DevScore> scores, std::span<const double> grid) {
  if (grid.empty()) Fail(ErrorCode::kInvalidArgument, "empty threshold grid");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double t : grid) out.emplace_back(t, F1AtThreshold(scores, t));
  return out;
}

std::string FormatReport(const ScoreReport &report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %9s %9s %9s %8s %8s %8s\n",
                "metric", "precision", "recall", "f1", "gold", "pred",
                "correct");
  out << line;
  auto row = [&](const char *name, const Prf &prf, const Counts &c) {
    std::snprintf(line, sizeof(line),
                  "%-28s %9.4f %9.4f %9.4f %8zu %8zu %8zu\n", name,
                  prf.precision, prf.recall, prf.f1, c.gold_positive,
                  c.predicted_positive, c.correct);
    out << line;
  };
  row("micro (TACRED)", report.micro, report.support);
  row("P (gold positives only)", report.positives_only,
      report.positives_only_support);
  row("PvsN (positive vs negative)", report.positive_vs_negative,
      report.positive_vs_negative_support);
  return out.str();
}

std::string ReportToJson(const ScoreReport &report) {
  nlohmann::json j;
  j["precision"] = report.precision();
  j["recall"] = report.recall();
  j["f1"] = report.f1();
  j["support"] = {{"gold_positive", report.support.gold_positive},
                  {"predicted_positive", report.support.predicted_positive},
                  {"correct", report.support.correct}};
  j["p_metric"] = PrfJson(report.positives_only, report.positives_only_support);
  j["pvsn_metric"] = PrfJson(report.positive_vs_negative,
                             report.positive_vs_negative_support);
  j["confusion"] = {{"labels", report.confusion.labels},
                    {"rows", report.confusion.rows}};
  return j.dump(2);
}

std::string ConfusionToCsv(const ConfusionMatrix &matrix) {
  auto quote = [](const std::string &s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::ostringstream out;
  out << "gold\\pred";
  for (const std::string &label : matrix.labels) out << ',' << quote(label);
  out << '\n';
  for (std::size_t i = 0; i < matrix.labels.size(); ++i) {
    out << quote(matrix.labels[i]);
    for (double cell : matrix.rows[i]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", cell);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

Summary Summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = s.n % 2 == 1
                 ? sorted[s.n / 2]
                 : (sorted[s.n / 2 - 1] + sorted[s.n / 2]) / 2.0;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

}  // namespace entailre
