#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/dataset.h"
#include "core/inference.h"
#include "core/schema.h"

namespace entailre {

enum class NliLabel { kEntailment, kNeutral, kContradiction };

std::string_view NliLabelName(NliLabel label);

struct NliPairRecord {
  std::string premise;
  std::string hypothesis;
  NliLabel label = NliLabel::kEntailment;
  std::string source_example;
  // The negative label for records built from the no-relation template.
  std::string source_relation;
  std::size_t source_template = 0;

  bool operator==(const NliPairRecord &) const = default;
};

// Compiles labeled examples into entailment fine-tuning pairs:
//   positive example -> one entailment per template of its relation, plus one
//                       neutral from a random template of another relation;
//   negative example -> one contradiction from a random positive template.
// With `use_norel_template`, negatives also get an entailment and positives a
// contradiction with the no-relation template. Random draws come from a
// per-example stream derived from `seed`, so the output does not depend on
// `workers`.
std::vector<NliPairRecord> GeneratePairs(const Dataset &dataset,
                                         const RelationSchema &schema,
                                         std::uint64_t seed,
                                         bool use_norel_template,
                                         unsigned workers = 1);

// One JSON object per line: premise, hypothesis, label,
// meta.{example_id, relation, template_id}.
void WritePairs(std::span<const NliPairRecord> records, std::ostream &out);

struct SilverReport {
  std::map<std::string, std::size_t> label_distribution;
  std::size_t failures = 0;
};

// Labels every example with its classification (negatives included).
Dataset AnnotateSilver(const Dataset &unlabeled, const RelationSchema &schema,
                       const InferenceConfig &config,
                       SilverReport *report = nullptr);

std::string SilverReportToJson(const SilverReport &report);

}  // namespace entailre
