#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/dataset.h"
#include "core/evaluator.h"
#include "core/nli_backend.h"
#include "core/schema.h"
#include "core/verbalizer.h"
#include "json.hpp"

namespace entailre {

enum class NoRelationMode {
  // Negative when no relation score reaches the threshold.
  kThreshold,
  // The schema's no-relation template competes as one more candidate.
  kTemplate,
};

inline constexpr double kDefaultThreshold = 0.5;

struct InferenceConfig {
  NoRelationMode norel_mode = NoRelationMode::kThreshold;
  double threshold = kDefaultThreshold;
  std::shared_ptr<const Backend> backend;
  // Pairs per pooled backend call in ClassifyBatch.
  std::size_t batch_size = 64;
  unsigned workers = 1;
  // Record per-example failures instead of aborting the batch.
  bool skip_failures = false;
};

// Throws Error(kInvalidArgument) for an out-of-range threshold, a missing
// backend, or template mode without a no-relation template.
void ValidateConfig(const InferenceConfig &config, const RelationSchema &schema);

struct RelationScore {
  double probability = 0.0;
  // Maximizing template; empty when the type gate rejected the relation.
  std::optional<std::size_t> template_id;

  bool operator==(const RelationScore &) const = default;
};

struct Prediction {
  std::string example_id;
  std::string label;
  double score = 0.0;
  // Every positive relation of the schema.
  std::map<std::string, RelationScore> per_relation;
  // Entailment probability of the no-relation template (template mode only).
  std::optional<double> norel_score;
  // Set when skip mode swallowed a failure for this example.
  std::optional<std::string> error;

  bool operator==(const Prediction &) const = default;
};

// Type gate times the best template entailment probability. Does not call the
// backend when the gate is closed.
RelationScore ScoreRelation(const RelationExample &example,
                            std::string_view relation,
                            const RelationSchema &schema,
                            const Backend &backend);

Prediction Classify(const RelationExample &example,
                    const RelationSchema &schema, const InferenceConfig &config);

// Elementwise equal to Classify. Pairs of all examples are pooled into
// backend calls of config.batch_size, run on config.workers threads.
std::vector<Prediction> ClassifyBatch(std::span<const RelationExample> examples,
                                      const RelationSchema &schema,
                                      const InferenceConfig &config);

// Best positive relation among the type-admitted ones (lexicographic
// tie-break), or empty when none is admitted.
std::optional<std::pair<std::string, double>> BestPositive(
    const Prediction &prediction);

DevScore DevScoreOf(const Prediction &prediction,
                    const std::optional<std::string> &gold,
                    std::string_view negative_label);

std::vector<DevScore> DevScoresOf(std::span<const Prediction> predictions,
                                  const Dataset &gold);

struct ThresholdChoice {
  double threshold = kDefaultThreshold;
  double f1 = 0.0;
};

// Candidate grid is {0.5} plus every distinct max_score; returns the smallest
// grid threshold with maximal micro-F1.
std::vector<double> ThresholdGrid(std::span<const DevScore> scores);
ThresholdChoice TuneThreshold(std::span<const DevScore> scores);

struct CurvePoint {
  double fraction = 0.0;
  std::size_t runs = 0;
  double mean_f1 = 0.0;
  double stderr_f1 = 0.0;
  double mean_threshold = 0.0;
};

// For each fraction, tunes the threshold on `runs` stratified samples of the
// development pool and measures F1 on `eval_scores` with it.
std::vector<CurvePoint> ThresholdCurve(const Dataset &dev,
                                       std::span<const Prediction> dev_predictions,
                                       std::span<const DevScore> eval_scores,
                                       std::span<const double> fractions,
                                       std::size_t runs, std::uint64_t seed);

nlohmann::json PredictionToJson(const Prediction &prediction, bool verbose);
Prediction PredictionFromJson(const nlohmann::json &j);

}  // namespace entailre
