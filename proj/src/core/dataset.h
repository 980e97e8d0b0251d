#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/verbalizer.h"
#include "json.hpp"

namespace entailre {

// Label used by the TACRED release for the negative class.
inline constexpr std::string_view kTacredNegativeLabel = "no_relation";

// Key under which unlabeled examples are counted in label_counts().
inline constexpr std::string_view kUnlabeledKey = "";

class Dataset {
 public:
  Dataset() = default;
  // Validates every example and rejects duplicate ids.
  Dataset(std::vector<RelationExample> examples, std::string negative_label);

  const std::vector<RelationExample> &examples() const { return examples_; }
  const std::string &negative_label() const { return negative_label_; }
  const std::map<std::string, std::size_t> &label_counts() const {
    return label_counts_;
  }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }

  std::size_t positive_count() const;
  std::size_t negative_count() const;
  std::size_t unlabeled_count() const;

  bool operator==(const Dataset &) const = default;

 private:
  std::vector<RelationExample> examples_;
  std::string negative_label_ = std::string(kTacredNegativeLabel);
  std::map<std::string, std::size_t> label_counts_;
};

// One TACRED record. End indices in the record are inclusive; a missing
// "relation" field yields an unlabeled example. `no_relation` maps to
// `negative_label`.
RelationExample ExampleFromTacred(const nlohmann::json &record,
                                  std::string_view negative_label);
nlohmann::json ExampleToTacred(const RelationExample &example,
                               std::string_view negative_label);

Dataset ParseTacred(std::string_view text, std::string_view negative_label,
                    std::string_view source = "<tacred>");
Dataset LoadTacred(const std::filesystem::path &path,
                   std::string_view negative_label = kTacredNegativeLabel);

std::string SerializeTacred(const Dataset &dataset);
void SaveTacred(const Dataset &dataset, const std::filesystem::path &path);

struct SplitResult {
  Dataset selected;
  Dataset rest;
};

// Number of examples kept from a stratum of `count`: round-half-up of
// count * fraction, at least one for non-empty strata, at most `count`.
std::size_t StratumQuota(std::size_t count, double fraction);

// Per-label uniform sampling without replacement under `seed`. Both outputs
// keep the original example order. Requires 0 < fraction <= 1.
SplitResult StratifiedSplit(const Dataset &dataset, double fraction,
                            std::uint64_t seed);

Dataset StripLabels(const Dataset &dataset);

// Replaces every gold label; `labels` must match the dataset size.
Dataset WithLabels(const Dataset &dataset, std::span<const std::string> labels);

}  // namespace entailre
