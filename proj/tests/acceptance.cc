// One line per acceptance criterion: [PASS], [FAIL] or [SKIP], with timing.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/dataset.h"
#include "core/error.h"
#include "core/evaluator.h"
#include "core/inference.h"
#include "core/nli_backend.h"
#include "core/pairgen.h"
#include "core/schema.h"
#include "core/verbalizer.h"
#include "support/oracle.h"
#include "support/scenario.h"

using namespace entailre;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kPass;
  std::string detail;
};

// Collects failure messages; the first few are reported.
class Checker {
 public:
  void Expect(bool ok, const std::string &what) {
    if (ok) return;
    if (failures_.size() < 3) failures_.push_back(what);
    ++count_;
  }
  Verdict Result(const std::string &summary) const {
    if (count_ == 0) return {Outcome::kPass, summary};
    std::string d = std::to_string(count_) + " violation(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) {
      d += (i ? "; " : "") + failures_[i];
    }
    return {Outcome::kFail, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string Fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int failed = 0;

void Criterion(const std::string &name, double budget_seconds,
               const std::function<Verdict()> &body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception &e) {
    v = {Outcome::kFail, std::string("exception: ") + e.what()};
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (v.outcome == Outcome::kPass && budget_seconds > 0 &&
      elapsed >= budget_seconds) {
    v = {Outcome::kFail, "took " + Fmt(elapsed, 3) + " s, budget " +
                             Fmt(budget_seconds, 1) + " s"};
  }
  const char *tag = v.outcome == Outcome::kPass   ? "[PASS]"
                    : v.outcome == Outcome::kFail ? "[FAIL]"
                                                  : "[SKIP]";
  if (v.outcome == Outcome::kFail) ++failed;
  std::printf("%s %s (%.3f s): %s\n", tag, name.c_str(), elapsed,
              v.detail.c_str());
  std::fflush(stdout);
}

constexpr std::uint64_t kScenarios = 40;

Verdict OracleEquivalence() {
  Checker check;
  std::size_t examples = 0, max_rel = 0, max_tpl = 0;
  for (std::uint64_t seed = 0; seed < kScenarios; ++seed) {
    const testing::Scenario sc = testing::MakeScenario(seed);
    max_rel = std::max(max_rel, sc.schema.relations().size());
    for (const auto &[label, entry] : sc.schema.relations()) {
      max_tpl = std::max(max_tpl, entry.templates.size());
    }
    for (auto mode : {NoRelationMode::kThreshold, NoRelationMode::kTemplate}) {
      InferenceConfig config;
      config.backend = sc.backend;
      config.norel_mode = mode;
      const auto batch = ClassifyBatch(sc.examples, sc.schema, config);
      for (std::size_t i = 0; i < sc.examples.size(); ++i) {
        const Prediction expected = testing::OracleClassify(
            sc.examples[i], sc.schema, sc.table, mode, config.threshold);
        check.Expect(batch[i] == expected,
                     "batch differs on seed " + std::to_string(seed) + " " +
                         sc.examples[i].id);
        check.Expect(Classify(sc.examples[i], sc.schema, config) == expected,
                     "classify differs on seed " + std::to_string(seed) + " " +
                         sc.examples[i].id);
        ++examples;
      }
    }
  }
  return check.Result(std::to_string(kScenarios) + " scenarios x 2 modes, " +
                      std::to_string(examples) + " predictions bit-exact; up to " +
                      std::to_string(max_rel) + " relations, " +
                      std::to_string(max_tpl) + " templates per relation");
}

Verdict TypeGate() {
  Checker check;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < kScenarios; ++seed) {
    const testing::Scenario sc = testing::MakeScenario(seed);
    for (auto mode : {NoRelationMode::kThreshold, NoRelationMode::kTemplate}) {
      for (double t : {0.0, 0.5}) {
        InferenceConfig config;
        config.backend = sc.backend;
        config.norel_mode = mode;
        config.threshold = t;
        const auto preds = ClassifyBatch(sc.examples, sc.schema, config);
        for (std::size_t i = 0; i < preds.size(); ++i) {
          const RelationExample &e = sc.examples[i];
          const Prediction &p = preds[i];
          if (p.label != sc.schema.negative_label()) {
            check.Expect(sc.schema.Delta(p.label, e.subj_type, e.obj_type),
                         e.id + " predicted gated-out " + p.label);
          }
          for (const auto &[label, rs] : p.per_relation) {
            if (!sc.schema.Delta(label, e.subj_type, e.obj_type)) {
              check.Expect(rs.probability == 0.0 && !rs.template_id,
                           e.id + " scored gated-out " + label);
            }
          }
          ++checked;
        }
      }
    }
  }
  return check.Result(std::to_string(checked) +
                      " predictions, none violates the type gate");
}

Verdict Tuner() {
  Checker check;
  std::mt19937_64 rng(2024);
  for (int set = 0; set < 100; ++set) {
    std::vector<DevScore> dev(testing::Draw(rng, 1, 80));
    for (auto &d : dev) {
      d.max_score = rng() % 4 == 0
                        ? static_cast<double>(testing::Draw(rng, 0, 8)) / 8.0
                        : std::uniform_real_distribution<double>(0, 1)(rng);
      d.gold_positive = rng() % 3 != 0;
      d.argmax_correct = d.gold_positive && rng() % 2;
      d.has_candidate = rng() % 10 != 0;
    }
    const ThresholdChoice c = TuneThreshold(dev);
    const auto [t, f1] = testing::OracleTune(dev);
    check.Expect(c.threshold == t, "set " + std::to_string(set) + ": threshold " +
                                       Fmt(c.threshold) + " vs " + Fmt(t));
    check.Expect(std::abs(c.f1 - f1) <= 1e-12,
                 "set " + std::to_string(set) + ": F1 mismatch");
    for (double g : ThresholdGrid(dev)) {
      check.Expect(F1AtThreshold(dev, g) <= c.f1 + 1e-12,
                   "set " + std::to_string(set) + ": grid point beats optimum");
    }
  }
  return check.Result("100 score sets match exhaustive search; F1 at the "
                      "chosen threshold is the grid maximum");
}

Verdict PairCardinality() {
  Checker check;
  std::size_t datasets = 0, records = 0;
  for (std::uint64_t seed = 0; seed < kScenarios; ++seed) {
    const testing::Scenario sc = testing::MakeScenario(seed);
    if (sc.schema.relations().size() < 2) continue;
    const Dataset d = testing::ScenarioDataset(sc);
    ++datasets;
    for (bool norel : {false, true}) {
      const auto out = GeneratePairs(d, sc.schema, seed, norel);
      std::size_t expected = 0;
      for (const auto &e : d.examples()) {
        expected += (*e.gold == sc.schema.negative_label()
                         ? 1
                         : sc.schema.relation(*e.gold).templates.size() + 1) +
                    (norel ? 1 : 0);
      }
      check.Expect(out.size() == expected,
                   "seed " + std::to_string(seed) + ": " +
                       std::to_string(out.size()) + " records, expected " +
                       std::to_string(expected));
      std::map<std::string, const RelationExample *> by_id;
      for (const auto &e : d.examples()) by_id[e.id] = &e;
      for (const auto &r : out) {
        if (r.label != NliLabel::kEntailment) continue;
        const RelationExample &e = *by_id.at(r.source_example);
        const Template &t =
            r.source_relation == sc.schema.negative_label()
                ? *sc.schema.norel_template()
                : sc.schema.relation(r.source_relation).templates.at(r.source_template);
        check.Expect(r.hypothesis == testing::OracleVerbalize(
                                         t.pattern, MentionText(e, Argument::kSubject),
                                         MentionText(e, Argument::kObject)),
                     "hypothesis mismatch for " + e.id);
      }
      records += out.size();
    }
  }
  return check.Result(std::to_string(datasets) + " datasets, " +
                      std::to_string(records) +
                      " records; counts follow the law with and without the "
                      "no-relation template");
}

Verdict Scorer() {
  Checker check;
  struct Case {
    std::vector<std::string> gold, pred;
    double p, r, f1;
  };
  const std::vector<Case> cases = {
      {{"r1", "r1", "neg"}, {"r1", "neg", "r1"}, 0.5, 0.5, 0.5},
      {{"a", "b", "neg"}, {"a", "b", "neg"}, 1.0, 1.0, 1.0},
      {{"a", "b", "neg"}, {"neg", "neg", "neg"}, 0.0, 0.0, 0.0},
      {{"a", "b", "c", "neg"}, {"a", "c", "b", "neg"}, 1.0 / 3, 1.0 / 3, 1.0 / 3},
      {{"a", "a", "b", "b", "neg"}, {"a", "neg", "b", "neg", "neg"}, 1.0, 0.5, 2.0 / 3},
      {{"a", "neg", "neg", "b"}, {"a", "a", "b", "neg"}, 1.0 / 3, 0.5, 0.4},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case &c = cases[i];
    const ScoreReport r = Evaluate(c.gold, c.pred, "neg");
    const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    check.Expect(near(r.precision(), c.p) && near(r.recall(), c.r) &&
                     near(r.f1(), c.f1),
                 "fixture " + std::to_string(i) + ": got " + Fmt(r.precision()) +
                     "/" + Fmt(r.recall()) + "/" + Fmt(r.f1()));
  }
  std::mt19937_64 rng(8);
  std::size_t rows = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> gold, pred;
    const std::size_t n = testing::Draw(rng, 1, 80);
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back("l" + std::to_string(testing::Draw(rng, 0, 6)));
      pred.push_back("l" + std::to_string(testing::Draw(rng, 0, 6)));
    }
    const ScoreReport r = Evaluate(gold, pred, "l0");
    for (std::size_t i = 0; i < r.confusion.labels.size(); ++i) {
      double sum = 0;
      for (double v : r.confusion.rows[i]) sum += v;
      const bool present =
          std::find(gold.begin(), gold.end(), r.confusion.labels[i]) != gold.end();
      check.Expect(std::abs(sum - (present ? 1.0 : 0.0)) <= 1e-9,
                   "confusion row sums to " + Fmt(sum, 12));
      ++rows;
    }
  }
  return check.Result(std::to_string(cases.size()) +
                      " hand-counted fixtures exact; " + std::to_string(rows) +
                      " confusion rows sum to 1 within 1e-9");
}

// Type gate answers transcribed from the template tables.
struct GateRow {
  const char *relation, *subj, *obj;
  bool admitted;
};

const GateRow kGateRows[] = {
    {"per:alternate_names", "PERSON", "PERSON", true},
    {"per:alternate_names", "PERSON", "MISC", true},
    {"per:alternate_names", "PERSON", "ORGANIZATION", false},
    {"per:date_of_birth", "PERSON", "DATE", true},
    {"per:date_of_birth", "PERSON", "CITY", false},
    {"per:age", "PERSON", "NUMBER", true},
    {"per:age", "PERSON", "DURATION", true},
    {"per:age", "PERSON", "DATE", false},
    {"per:city_of_birth", "PERSON", "LOCATION", true},
    {"per:city_of_birth", "PERSON", "COUNTRY", false},
    {"per:origin", "PERSON", "NATIONALITY", true},
    {"per:origin", "PERSON", "LOCATION", true},
    {"per:origin", "PERSON", "CITY", false},
    {"per:cause_of_death", "PERSON", "CAUSE_OF_DEATH", true},
    {"per:countries_of_residence", "PERSON", "NATIONALITY", true},
    {"per:schools_attended", "PERSON", "ORGANIZATION", true},
    {"per:title", "PERSON", "TITLE", true},
    {"per:title", "ORGANIZATION", "TITLE", false},
    {"per:religion", "PERSON", "RELIGION", true},
    {"per:spouse", "PERSON", "PERSON", true},
    {"per:spouse", "PERSON", "ORGANIZATION", false},
    {"per:charges", "PERSON", "CRIMINAL_CHARGE", true},
    {"org:alternate_names", "ORGANIZATION", "MISC", true},
    {"org:political/religious_affiliation", "ORGANIZATION", "IDEOLOGY", true},
    {"org:top_members/employees", "ORGANIZATION", "PERSON", true},
    {"org:top_members/employees", "PERSON", "PERSON", false},
    {"org:number_of_employees/members", "ORGANIZATION", "NUMBER", true},
    {"org:members", "ORGANIZATION", "COUNTRY", true},
    {"org:subsidiaries", "ORGANIZATION", "LOCATION", true},
    {"org:parents", "ORGANIZATION", "COUNTRY", true},
    {"org:founded_by", "ORGANIZATION", "PERSON", true},
    {"org:founded_by", "ORGANIZATION", "ORGANIZATION", false},
    {"org:founded", "ORGANIZATION", "DATE", true},
    {"org:dissolved", "ORGANIZATION", "DATE", true},
    {"org:city_of_headquarters", "ORGANIZATION", "LOCATION", true},
    {"org:stateorprovince_of_headquarters", "ORGANIZATION", "STATE_OR_PROVINCE", true},
    {"org:shareholders", "ORGANIZATION", "PERSON", true},
    {"org:website", "ORGANIZATION", "URL", true},
    {"org:website", "PERSON", "URL", false},
};

Verdict SchemaFidelity() {
  Checker check;
  const RelationSchema schema =
      LoadSchema(std::string(ENTAILRE_SCHEMA_DIR) + "/tacred.schema");
  const std::size_t n = schema.relations().size();
  check.Expect(n == 41, std::to_string(n) + " relations");
  std::size_t total = 0, lo = 99, hi = 0;
  for (const auto &[label, entry] : schema.relations()) {
    total += entry.templates.size();
    lo = std::min(lo, entry.templates.size());
    hi = std::max(hi, entry.templates.size());
  }
  const double mean = n ? static_cast<double>(total) / n : 0.0;
  check.Expect(lo >= 1 && hi <= 8, "template counts in [" + std::to_string(lo) +
                                       ", " + std::to_string(hi) + "]");
  check.Expect(std::abs(mean - 2.0) <= 0.5, "mean templates " + Fmt(mean, 2));
  std::size_t rows = 0;
  for (const GateRow &row : kGateRows) {
    check.Expect(schema.Contains(row.relation),
                 std::string("missing ") + row.relation);
    if (!schema.Contains(row.relation)) continue;
    check.Expect(schema.Delta(row.relation, row.subj, row.obj) == row.admitted,
                 std::string(row.relation) + "(" + row.subj + ", " + row.obj + ")");
    ++rows;
  }
  return check.Result(std::to_string(n) + " relations, " +
                      std::to_string(total) + " templates (mean " +
                      Fmt(mean, 2) + ", range " + std::to_string(lo) + "-" +
                      std::to_string(hi) + "), " + std::to_string(rows) +
                      " type-gate rows match");
}

Verdict SplitFidelity() {
  const char *path = std::getenv("TACRED_TRAIN");
  if (!path || !*path) {
    return {Outcome::kSkip,
            "set TACRED_TRAIN to the TACRED train.json to check the 1/5/10% "
            "split totals"};
  }
  Checker check;
  const Dataset train = LoadTacred(path);
  struct Row {
    double fraction;
    std::size_t positives, negatives;
  };
  std::string summary;
  for (const Row &row : {Row{0.01, 130, 552}, Row{0.05, 651, 2756},
                         Row{0.10, 1302, 5513}}) {
    const SplitResult s = StratifiedSplit(train, row.fraction, 0);
    const auto pos = static_cast<long>(s.selected.positive_count());
    const auto neg = static_cast<long>(s.selected.negative_count());
    check.Expect(std::abs(pos - static_cast<long>(row.positives)) <= 1,
                 Fmt(row.fraction, 2) + ": " + std::to_string(pos) +
                     " positives, expected " + std::to_string(row.positives));
    check.Expect(std::abs(neg - static_cast<long>(row.negatives)) <= 1,
                 Fmt(row.fraction, 2) + ": " + std::to_string(neg) +
                     " negatives, expected " + std::to_string(row.negatives));
    summary += (summary.empty() ? "" : ", ") + std::to_string(pos) + "/" +
               std::to_string(neg);
  }
  return check.Result("positive/negative totals " + summary);
}

std::string Serialized(const std::vector<Prediction> &preds) {
  std::ostringstream out;
  for (const auto &p : preds) out << PredictionToJson(p, true).dump() << "\n";
  return out.str();
}

Verdict Determinism() {
  Checker check;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const testing::Scenario sc = testing::MakeScenario(seed);
    std::string base;
    for (unsigned workers : {1u, 2u, 4u, 8u}) {
      for (std::size_t batch : {1u, 7u, 64u}) {
        InferenceConfig config;
        config.backend = sc.backend;
        config.workers = workers;
        config.batch_size = batch;
        const std::string s =
            Serialized(ClassifyBatch(sc.examples, sc.schema, config));
        if (base.empty()) base = s;
        check.Expect(s == base, "classify output changes with workers=" +
                                    std::to_string(workers));
      }
    }
    const Dataset d = testing::ScenarioDataset(sc);
    if (sc.schema.relations().size() >= 2) {
      std::ostringstream a;
      WritePairs(GeneratePairs(d, sc.schema, seed, true, 1), a);
      for (unsigned workers : {1u, 3u, 8u}) {
        std::ostringstream b;
        WritePairs(GeneratePairs(d, sc.schema, seed, true, workers), b);
        check.Expect(a.str() == b.str(), "pairs change with workers=" +
                                             std::to_string(workers));
      }
    }
    const std::string split = SerializeTacred(StratifiedSplit(d, 0.3, seed).selected);
    check.Expect(SerializeTacred(StratifiedSplit(d, 0.3, seed).selected) == split,
                 "split output changes between runs");
  }
  return check.Result("classify, pair generation and split are byte-identical "
                      "across runs, worker counts and batch sizes");
}

Verdict LiveReproduction() {
  const char *endpoint = std::getenv("ENTAILRE_LIVE_ENDPOINT");
  const char *dev_path = std::getenv("TACRED_DEV");
  if (!endpoint || !*endpoint || !dev_path || !*dev_path) {
    return {Outcome::kSkip,
            "integration check; set ENTAILRE_LIVE_ENDPOINT (NLI scoring "
            "service) and TACRED_DEV (dev.json) to run it"};
  }
  const RelationSchema schema =
      LoadSchema(std::string(ENTAILRE_SCHEMA_DIR) + "/tacred.schema");
  const Dataset dev = LoadTacred(dev_path);
  InferenceConfig config;
  config.backend = OpenBackend(std::string("remote:") + endpoint);
  config.workers = 4;
  const auto preds = ClassifyBatch(dev.examples(), schema, config);
  std::vector<std::string> gold, pred;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    gold.push_back(*dev.examples()[i].gold);
    pred.push_back(preds[i].label);
  }
  const double f1 = 100.0 * Evaluate(gold, pred, schema.negative_label()).f1();
  const double expected = 45.7;
  Checker check;
  check.Expect(std::abs(f1 - expected) <= 3.0,
               "micro-F1 " + Fmt(f1, 1) + ", expected " + Fmt(expected, 1) +
                   " +/- 3");
  return check.Result("micro-F1 " + Fmt(f1, 1) + " at threshold 0.5 (expected " +
                      Fmt(expected, 1) + " +/- 3)");
}

}  // namespace

int main() {
  Criterion("oracle equivalence", 5.0, OracleEquivalence);
  Criterion("type-gate soundness", 1.0, TypeGate);
  Criterion("threshold tuner", 2.0, Tuner);
  Criterion("pair-generation cardinality", 2.0, PairCardinality);
  Criterion("scorer correctness", 0, Scorer);
  Criterion("schema fidelity", 0, SchemaFidelity);
  Criterion("split fidelity", 0, SplitFidelity);
  Criterion("determinism", 0, Determinism);
  Criterion("live reproduction", 0, LiveReproduction);
  return failed == 0 ? 0 : 1;
}
