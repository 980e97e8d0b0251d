#include "core/pairgen.h"

#include "core/error.h"
#include "core/parallel.h"
#include "core/random.h"
#include "core/verbalizer.h"
#include "json.hpp"

namespace entailre {
namespace {

struct TemplateRef {
  const RelationEntry *relation;
  const Template *tmpl;
};

}  // namespace

std::string_view NliLabelName(NliLabel label) {
  switch (label) {
    case NliLabel::kEntailment:
      return "entailment";
    case NliLabel::kNeutral:
      return "neutral";
    case NliLabel::kContradiction:
      return "contradiction";
  }
  return "unknown";
}

std::vector<NliPairRecord> GeneratePairs(const Dataset &dataset,
                                         const RelationSchema &schema,
                                         std::uint64_t seed,
                                         bool use_norel_template,
                                         unsigned workers) {
  if (use_norel_template && !schema.norel_template()) {
    Fail(ErrorCode::kInvalidArgument,
         "no-relation pairs requested but the schema has no norel_template");
  }
  const std::string &negative = schema.negative_label();
  for (const RelationExample &e : dataset.examples()) {
    if (!e.gold) {
      Fail(ErrorCode::kInvalidArgument, "example " + e.id + " has no label");
    }
    if (*e.gold != negative && !schema.Contains(*e.gold)) {
      Fail(ErrorCode::kInvalidArgument,
           "example " + e.id + " has unknown label " + *e.gold);
    }
  }

  // All positive templates in schema order; a relation's templates are
  // contiguous, which lets the neutral draw skip the gold block.
  std::vector<TemplateRef> all;
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> block;
  for (const auto &[label, entry] : schema.relations()) {
    const std::size_t begin = all.size();
    for (const Template &t : entry.templates) all.push_back({&entry, &t});
    block[label] = {begin, all.size()};
  }

  const auto &examples = dataset.examples();
  std::vector<std::vector<NliPairRecord>> per_example(examples.size());
  ParallelFor(examples.size(), workers, [&](std::size_t i) {
    const RelationExample &e = examples[i];
    std::mt19937_64 rng = DerivedStream(seed, i);
    const std::string premise = PremiseOf(e);
    const std::string subj = MentionText(e, Argument::kSubject);
    const std::string obj = MentionText(e, Argument::kObject);
    auto &records = per_example[i];
    auto emit = [&](const Template &t, const std::string &relation,
                    NliLabel label) {
      records.push_back(NliPairRecord{premise, Verbalize(t, subj, obj), label,
                                      e.id, relation, t.id});
    };

    if (*e.gold == negative) {
      if (all.empty()) {
        Fail(ErrorCode::kInvalidArgument,
             "schema has no positive templates to contradict");
      }
      const TemplateRef &pick = all[UniformBelow(rng, all.size())];
      emit(*pick.tmpl, pick.relation->label, NliLabel::kContradiction);
      if (use_norel_template) {
        emit(*schema.norel_template(), negative, NliLabel::kEntailment);
      }
      return;
    }

    const RelationEntry &gold = schema.relation(*e.gold);
    for (const Template &t : gold.templates) {
      emit(t, gold.label, NliLabel::kEntailment);
    }
    const auto [skip_begin, skip_end] = block.at(gold.label);
    const std::size_t others = all.size() - (skip_end - skip_begin);
    if (others == 0) {
      Fail(ErrorCode::kInvalidArgument,
           "no template of another relation available for a neutral pair");
    }
    std::size_t k = UniformBelow(rng, others);
    if (k >= skip_begin) k += skip_end - skip_begin;
    emit(*all[k].tmpl, all[k].relation->label, NliLabel::kNeutral);
    if (use_norel_template) {
      emit(*schema.norel_template(), negative, NliLabel::kContradiction);
    }
  });

  std::vector<NliPairRecord> out;
  for (auto &records : per_example) {
    for (auto &r : records) out.push_back(std::move(r));
  }
  return out;
}

void WritePairs(std::span<const NliPairRecord> records, std::ostream &out) {
  for (const NliPairRecord &r : records) {
    nlohmann::json j;
    j["premise"] = r.premise;
    j["hypothesis"] = r.hypothesis;
    j["label"] = NliLabelName(r.label);
    j["meta"] = {{"example_id", r.source_example},
                 {"relation", r.source_relation},
                 {"template_id", r.source_template}};
    out << j.dump() << '\n';
  }
}

Dataset AnnotateSilver(const Dataset &unlabeled, const RelationSchema &schema,
                       const InferenceConfig &config, SilverReport *report) {
  const std::vector<Prediction> predictions =
      ClassifyBatch(unlabeled.examples(), schema, config);
  std::vector<std::string> labels;
  labels.reserve(predictions.size());
  SilverReport local;
  for (const Prediction &p : predictions) {
    labels.push_back(p.label);
    ++local.label_distribution[p.label];
    local.failures += p.error.has_value();
  }
  if (report) *report = std::move(local);
  std::vector<RelationExample> examples = unlabeled.examples();
  for (std::size_t i = 0; i < examples.size(); ++i) examples[i].gold = labels[i];
  return Dataset(std::move(examples), schema.negative_label());
}

std::string SilverReportToJson(const SilverReport &report) {
  nlohmann::json j;
  j["label_distribution"] = report.label_distribution;
  j["failures"] = report.failures;
  std::size_t total = 0;
  for (const auto &[label, n] : report.label_distribution) total += n;
  j["total"] = total;
  return j.dump(2);
}

}  // namespace entailre
