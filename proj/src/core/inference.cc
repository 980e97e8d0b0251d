#include "core/inference.h"

#include <algorithm>
#include <set>

#include "core/error.h"
#include "core/parallel.h"

namespace entailre {
namespace {

// One hypothesis to score. An empty relation denotes the no-relation
// template.
struct Slot {
  std::string relation;
  std::size_t template_id = 0;
};

struct Plan {
  std::vector<PremiseHypothesisPair> pairs;
  std::vector<Slot> slots;
};

Plan PlanExample(const RelationExample &example, const RelationSchema &schema,
                 NoRelationMode mode) {
  ValidateExample(example);
  Plan plan;
  const std::string premise = PremiseOf(example);
  const std::string subj = MentionText(example, Argument::kSubject);
  const std::string obj = MentionText(example, Argument::kObject);
  for (const std::string &label :
       schema.CandidateRelations(example.subj_type, example.obj_type)) {
    for (const Template &t : schema.relation(label).templates) {
      plan.pairs.push_back({premise, Verbalize(t, subj, obj), example.id});
      plan.slots.push_back({label, t.id});
    }
  }
  if (mode == NoRelationMode::kTemplate) {
    const Template &t = *schema.norel_template();
    plan.pairs.push_back({premise, Verbalize(t, subj, obj), example.id});
    plan.slots.push_back({"", t.id});
  }
  return plan;
}

Prediction Decide(const RelationExample &example, const RelationSchema &schema,
                  const InferenceConfig &config, const Plan &plan,
                  std::span<const EntailmentScore> scores) {
  Prediction out;
  out.example_id = example.id;
  for (const auto &[label, entry] : schema.relations()) {
    out.per_relation[label] = RelationScore{0.0, std::nullopt};
  }
  for (std::size_t i = 0; i < plan.slots.size(); ++i) {
    const Slot &slot = plan.slots[i];
    const double p = scores[i].entailment;
    if (slot.relation.empty()) {
      if (!out.norel_score || p > *out.norel_score) out.norel_score = p;
      continue;
    }
    RelationScore &rs = out.per_relation[slot.relation];
    if (!rs.template_id || p > rs.probability) {
      rs = RelationScore{p, slot.template_id};
    }
  }

  const auto best = BestPositive(out);
  if (config.norel_mode == NoRelationMode::kThreshold) {
    if (best && best->second >= config.threshold) {
      out.label = best->first;
      out.score = best->second;
    } else {
      out.label = schema.negative_label();
      out.score = best ? best->second : 0.0;
    }
    return out;
  }

  // Template mode: the negative label joins the argmax under the same
  // lexicographic tie-break as the positive relations.
  std::vector<std::pair<std::string, double>> candidates;
  for (const auto &[label, rs] : out.per_relation) {
    if (rs.template_id) candidates.emplace_back(label, rs.probability);
  }
  candidates.emplace_back(schema.negative_label(), *out.norel_score);
  std::sort(candidates.begin(), candidates.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  const auto *winner = &candidates.front();
  for (const auto &c : candidates) {
    if (c.second > winner->second) winner = &c;
  }
  out.label = winner->first;
  out.score = winner->second;
  return out;
}

Prediction FailedPrediction(const RelationExample &example,
                            const RelationSchema &schema,
                            const std::string &message) {
  Prediction out;
  out.example_id = example.id;
  out.label = schema.negative_label();
  out.error = message;
  return out;
}

}  // namespace

void ValidateConfig(const InferenceConfig &config,
                    const RelationSchema &schema) {
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument,
         "threshold must be in [0, 1], got " + std::to_string(config.threshold));
  }
  if (!config.backend) {
    Fail(ErrorCode::kInvalidArgument, "no scoring backend configured");
  }
  if (config.batch_size == 0) {
    Fail(ErrorCode::kInvalidArgument, "batch size must be positive");
  }
  if (config.norel_mode == NoRelationMode::kTemplate &&
      !schema.norel_template()) {
    Fail(ErrorCode::kInvalidArgument,
         "template-based no-relation detection needs norel_template in the "
         "schema");
  }
}

RelationScore ScoreRelation(const RelationExample &example,
                            std::string_view relation,
                            const RelationSchema &schema,
                            const Backend &backend) {
  const RelationEntry &entry = schema.relation(relation);
  if (!schema.Delta(relation, example.subj_type, example.obj_type)) {
    return RelationScore{0.0, std::nullopt};
  }
  const std::string premise = PremiseOf(example);
  std::vector<PremiseHypothesisPair> pairs;
  for (Hypothesis &h : HypothesesFor(example, entry)) {
    pairs.push_back({premise, std::move(h.text), example.id});
  }
  const std::vector<EntailmentScore> scores = backend.ScoreBatch(pairs);
  RelationScore best{scores[0].entailment, entry.templates[0].id};
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].entailment > best.probability) {
      best = RelationScore{scores[i].entailment, entry.templates[i].id};
    }
  }
  return best;
}

Prediction Classify(const RelationExample &example,
                    const RelationSchema &schema,
                    const InferenceConfig &config) {
  ValidateConfig(config, schema);
  const Plan plan = PlanExample(example, schema, config.norel_mode);
  std::vector<EntailmentScore> scores;
  if (!plan.pairs.empty()) scores = config.backend->ScoreBatch(plan.pairs);
  return Decide(example, schema, config, plan, scores);
}

std::vector<Prediction> ClassifyBatch(std::span<const RelationExample> examples,
                                      const RelationSchema &schema,
                                      const InferenceConfig &config) {
  ValidateConfig(config, schema);
  const std::size_t n = examples.size();
  std::vector<Prediction> out(n);
  std::vector<Plan> plans(n);
  std::vector<std::optional<std::string>> failures(n);

  for (std::size_t i = 0; i < n; ++i) {
    try {
      plans[i] = PlanExample(examples[i], schema, config.norel_mode);
    } catch (const Error &e) {
      if (!config.skip_failures) {
        Fail(e.code(), "example " + examples[i].id + ": " + e.what());
      }
      failures[i] = e.what();
    }
  }

  // Pool every pair into one flat list; offsets[i] is where example i starts.
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<PremiseHypothesisPair> pool;
  for (std::size_t i = 0; i < n; ++i) {
    offsets[i] = pool.size();
    if (!failures[i]) {
      pool.insert(pool.end(), plans[i].pairs.begin(), plans[i].pairs.end());
    }
  }
  offsets[n] = pool.size();

  const auto chunks = ChunkRanges(pool.size(), config.batch_size);
  std::vector<EntailmentScore> scores(pool.size());
  std::vector<bool> chunk_failed(chunks.size(), false);
  ParallelFor(chunks.size(), config.workers, [&](std::size_t c) {
    const auto [begin, end] = chunks[c];
    try {
      const auto chunk_scores = config.backend->ScoreBatch(
          std::span(pool).subspan(begin, end - begin));
      std::copy(chunk_scores.begin(), chunk_scores.end(),
                scores.begin() + begin);
    } catch (const Error &) {
      chunk_failed[c] = true;
    }
  });

  // Examples touching a failed chunk are rescored on their own so that the
  // failure is attributed to the right example id.
  auto touches_failed_chunk = [&](std::size_t i) {
    if (offsets[i] == offsets[i + 1]) return false;
    const std::size_t first = offsets[i] / config.batch_size;
    const std::size_t last = (offsets[i + 1] - 1) / config.batch_size;
    for (std::size_t c = first; c <= last; ++c) {
      if (chunk_failed[c]) return true;
    }
    return false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      out[i] = FailedPrediction(examples[i], schema, *failures[i]);
      continue;
    }
    if (touches_failed_chunk(i)) {
      try {
        out[i] = Classify(examples[i], schema, config);
      } catch (const Error &e) {
        if (!config.skip_failures) {
          Fail(e.code(), "example " + examples[i].id + ": " + e.what());
        }
        out[i] = FailedPrediction(examples[i], schema, e.what());
      }
      continue;
    }
    out[i] = Decide(examples[i], schema, config, plans[i],
                    std::span(scores).subspan(offsets[i],
                                              offsets[i + 1] - offsets[i]));
  }
  return out;
}

std::optional<std::pair<std::string, double>> BestPositive(
    const Prediction &prediction) {
  std::optional<std::pair<std::string, double>> best;
  for (const auto &[label, rs] : prediction.per_relation) {
    if (!rs.template_id) continue;
    if (!best || rs.probability > best->second) {
      best.emplace(label, rs.probability);
    }
  }
  return best;
}

DevScore DevScoreOf(const Prediction &prediction,
                    const std::optional<std::string> &gold,
                    std::string_view negative_label) {
  DevScore out;
  const auto best = BestPositive(prediction);
  out.has_candidate = best.has_value();
  out.max_score = best ? best->second : 0.0;
  out.gold_positive = gold.has_value() && *gold != negative_label;
  out.argmax_correct = best && out.gold_positive && best->first == *gold;
  return out;
}

std::vector<DevScore> DevScoresOf(std::span<const Prediction> predictions,
                                  const Dataset &gold) {
  std::map<std::string_view, const RelationExample *> by_id;
  for (const RelationExample &e : gold.examples()) by_id[e.id] = &e;
  std::vector<DevScore> out;
  out.reserve(predictions.size());
  for (const Prediction &p : predictions) {
    auto it = by_id.find(p.example_id);
    if (it == by_id.end()) {
      Fail(ErrorCode::kInvalidArgument,
           "prediction for unknown example " + p.example_id);
    }
    if (p.per_relation.empty() && !p.error) {
      Fail(ErrorCode::kInvalidArgument,
           "prediction for " + p.example_id +
               " has no per-relation scores (write predictions verbosely)");
    }
    out.push_back(DevScoreOf(p, it->second->gold, gold.negative_label()));
  }
  return out;
}

std::vector<double> ThresholdGrid(std::span<const DevScore> scores) {
  std::set<double> grid{kDefaultThreshold};
  for (const DevScore &s : scores) grid.insert(s.max_score);
  return {grid.begin(), grid.end()};
}

ThresholdChoice TuneThreshold(std::span<const DevScore> scores) {
  if (scores.empty()) {
    Fail(ErrorCode::kInvalidArgument, "cannot tune a threshold on no examples");
  }
  const std::vector<double> grid = ThresholdGrid(scores);
  ThresholdChoice best{grid.front(), F1AtThreshold(scores, grid.front())};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double f1 = F1AtThreshold(scores, grid[i]);
    if (f1 > best.f1) best = ThresholdChoice{grid[i], f1};
  }
  return best;
}

std::vector<CurvePoint> ThresholdCurve(const Dataset &dev,
                                       std::span<const Prediction> dev_predictions,
                                       std::span<const DevScore> eval_scores,
                                       std::span<const double> fractions,
                                       std::size_t runs, std::uint64_t seed) {
  if (dev_predictions.size() != dev.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "development predictions do not match the development set");
  }
  if (runs == 0) Fail(ErrorCode::kInvalidArgument, "runs must be positive");
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (dev_predictions[i].example_id != dev.examples()[i].id) {
      Fail(ErrorCode::kInvalidArgument,
           "prediction order differs from development set at " +
               dev.examples()[i].id);
    }
    index[dev.examples()[i].id] = i;
  }
  const std::vector<DevScore> all = DevScoresOf(dev_predictions, dev);

  std::vector<CurvePoint> out;
  for (double fraction : fractions) {
    std::vector<double> f1s;
    std::vector<double> thresholds;
    for (std::size_t run = 0; run < runs; ++run) {
      const SplitResult split = StratifiedSplit(dev, fraction, seed + run);
      std::vector<DevScore> sample;
      for (const RelationExample &e : split.selected.examples()) {
        sample.push_back(all[index.at(e.id)]);
      }
      const ThresholdChoice choice = TuneThreshold(sample);
      thresholds.push_back(choice.threshold);
      f1s.push_back(F1AtThreshold(eval_scores, choice.threshold));
    }
    const Summary f1 = Summarize(f1s);
    out.push_back(CurvePoint{fraction, runs, f1.mean, f1.stderr_mean,
                             Summarize(thresholds).mean});
  }
  return out;
}

nlohmann::json PredictionToJson(const Prediction &prediction, bool verbose) {
  nlohmann::json j;
  j["id"] = prediction.example_id;
  j["label"] = prediction.label;
  j["score"] = prediction.score;
  if (prediction.error) j["error"] = *prediction.error;
  if (verbose) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto &[label, rs] : prediction.per_relation) {
      per[label] = {{"score", rs.probability},
                    {"template_id", rs.template_id
                                        ? nlohmann::json(*rs.template_id)
                                        : nlohmann::json(nullptr)}};
    }
    j["per_relation"] = std::move(per);
    if (prediction.norel_score) j["norel_score"] = *prediction.norel_score;
  }
  return j;
}

Prediction PredictionFromJson(const nlohmann::json &j) {
  Prediction p;
  try {
    p.example_id = j.at("id").get<std::string>();
    p.label = j.at("label").get<std::string>();
    p.score = j.at("score").get<double>();
    if (auto it = j.find("error"); it != j.end()) {
      p.error = it->get<std::string>();
    }
    if (auto it = j.find("per_relation"); it != j.end()) {
      for (const auto &[label, v] : it->items()) {
        RelationScore rs;
        rs.probability = v.at("score").get<double>();
        if (!v.at("template_id").is_null()) {
          rs.template_id = v.at("template_id").get<std::size_t>();
        }
        p.per_relation[label] = rs;
      }
    }
    if (auto it = j.find("norel_score"); it != j.end()) {
      p.norel_score = it->get<double>();
    }
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, std::string("malformed prediction: ") + e.what());
  }
  return p;
}

}  // namespace entailre
