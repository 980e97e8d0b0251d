#include "core/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.h"
#include "core/random.h"

namespace entailre {
namespace {

std::string RecordName(const nlohmann::json &record) {
  auto it = record.find("id");
  if (it != record.end() && it->is_string()) return it->get<std::string>();
  return "<no id>";
}

std::size_t IndexField(const nlohmann::json &record, const char *field) {
  const nlohmann::json &value = record.at(field);
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    Fail(ErrorCode::kParse, std::string("record ") + RecordName(record) +
                                ": field " + field +
                                " must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

}  // namespace

Dataset::Dataset(std::vector<RelationExample> examples,
                 std::string negative_label)
    : examples_(std::move(examples)), negative_label_(std::move(negative_label)) {
  std::set<std::string_view> ids;
  for (const RelationExample &example : examples_) {
    ValidateExample(example);
    if (!ids.insert(example.id).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate example id " + example.id);
    }
    ++label_counts_[example.gold.value_or(std::string(kUnlabeledKey))];
  }
}

std::size_t Dataset::positive_count() const {
  return size() - negative_count() - unlabeled_count();
}

std::size_t Dataset::negative_count() const {
  auto it = label_counts_.find(negative_label_);
  return it == label_counts_.end() ? 0 : it->second;
}

std::size_t Dataset::unlabeled_count() const {
  auto it = label_counts_.find(std::string(kUnlabeledKey));
  return it == label_counts_.end() ? 0 : it->second;
}

RelationExample ExampleFromTacred(const nlohmann::json &record,
                                  std::string_view negative_label) {
  if (!record.is_object()) {
    Fail(ErrorCode::kParse, "TACRED record must be an object");
  }
  RelationExample example;
  try {
    example.id = record.at("id").get<std::string>();
    example.tokens = record.at("token").get<std::vector<std::string>>();
    const std::size_t subj_start = IndexField(record, "subj_start");
    const std::size_t subj_end = IndexField(record, "subj_end");
    const std::size_t obj_start = IndexField(record, "obj_start");
    const std::size_t obj_end = IndexField(record, "obj_end");
    example.subj = TokenSpan{subj_start, subj_end + 1};
    example.obj = TokenSpan{obj_start, obj_end + 1};
    example.subj_type = record.at("subj_type").get<std::string>();
    example.obj_type = record.at("obj_type").get<std::string>();
    auto rel = record.find("relation");
    if (rel != record.end() && !rel->is_null()) {
      std::string label = rel->get<std::string>();
      example.gold = label == kTacredNegativeLabel ? std::string(negative_label)
                                                   : std::move(label);
    }
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, "record " + RecordName(record) + ": " + e.what());
  }
  try {
    ValidateExample(example);
  } catch (const Error &e) {
    Fail(ErrorCode::kParse, e.what());
  }
  return example;
}

nlohmann::json ExampleToTacred(const RelationExample &example,
                               std::string_view negative_label) {
  nlohmann::json j;
  j["id"] = example.id;
  if (example.gold) {
    j["relation"] = *example.gold == negative_label
                        ? std::string(kTacredNegativeLabel)
                        : *example.gold;
  }
  j["token"] = example.tokens;
  j["subj_start"] = example.subj.start;
  j["subj_end"] = example.subj.end - 1;
  j["obj_start"] = example.obj.start;
  j["obj_end"] = example.obj.end - 1;
  j["subj_type"] = example.subj_type;
  j["obj_type"] = example.obj_type;
  return j;
}

Dataset ParseTacred(std::string_view text, std::string_view negative_label,
                    std::string_view source) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, std::string(source) + ": " + e.what());
  }
  if (!root.is_array()) {
    Fail(ErrorCode::kParse,
         std::string(source) + ": expected an array of records");
  }
  std::vector<RelationExample> examples;
  examples.reserve(root.size());
  for (const nlohmann::json &record : root) {
    try {
      examples.push_back(ExampleFromTacred(record, negative_label));
    } catch (const Error &e) {
      Fail(e.code(), std::string(source) + ": " + e.what());
    }
  }
  try {
    return Dataset(std::move(examples), std::string(negative_label));
  } catch (const Error &e) {
    Fail(ErrorCode::kParse, std::string(source) + ": " + e.what());
  }
}

Dataset LoadTacred(const std::filesystem::path &path,
                   std::string_view negative_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseTacred(buffer.str(), negative_label, path.string());
}

std::string SerializeTacred(const Dataset &dataset) {
  nlohmann::json root = nlohmann::json::array();
  for (const RelationExample &example : dataset.examples()) {
    root.push_back(ExampleToTacred(example, dataset.negative_label()));
  }
  return root.dump() + "\n";
}

void SaveTacred(const Dataset &dataset, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write dataset file " + path.string());
  out << SerializeTacred(dataset);
  if (!out) Fail(ErrorCode::kIo, "short write to " + path.string());
}

std::size_t StratumQuota(std::size_t count, double fraction) {
  if (count == 0) return 0;
  // The epsilon keeps exact halves such as 0.01 * 150 on the upper side.
  const double raw = static_cast<double>(count) * fraction;
  auto quota = static_cast<std::size_t>(std::floor(raw + 0.5 + 1e-9));
  return std::clamp<std::size_t>(quota, 1, count);
}

SplitResult StratifiedSplit(const Dataset &dataset, double fraction,
                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument,
         "split fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  const auto &examples = dataset.examples();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    strata[examples[i].gold.value_or(std::string(kUnlabeledKey))].push_back(i);
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> keep(examples.size(), false);
  for (auto &[label, members] : strata) {
    const std::size_t quota = StratumQuota(members.size(), fraction);
    // Partial Fisher-Yates: the first `quota` slots become the sample.
    for (std::size_t i = 0; i < quota; ++i) {
      const std::size_t j = i + UniformBelow(rng, members.size() - i);
      std::swap(members[i], members[j]);
      keep[members[i]] = true;
    }
  }

  std::vector<RelationExample> selected;
  std::vector<RelationExample> rest;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (keep[i] ? selected : rest).push_back(examples[i]);
  }
  return SplitResult{Dataset(std::move(selected), dataset.negative_label()),
                     Dataset(std::move(rest), dataset.negative_label())};
}

Dataset StripLabels(const Dataset &dataset) {
  std::vector<RelationExample> examples = dataset.examples();
  for (RelationExample &example : examples) example.gold.reset();
  return Dataset(std::move(examples), dataset.negative_label());
}

Dataset WithLabels(const Dataset &dataset,
                   std::span<const std::string> labels) {
  if (labels.size() != dataset.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "got " + std::to_string(labels.size()) + " labels for " +
             std::to_string(dataset.size()) + " examples");
  }
  std::vector<RelationExample> examples = dataset.examples();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    examples[i].gold = labels[i];
  }
  return Dataset(std::move(examples), dataset.negative_label());
}

}  // namespace entailre
