#include "core/nli_backend.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.h"
#include "json.hpp"

namespace entailre {
namespace {

class FixtureBackend : public Backend {
 public:
  FixtureBackend(FixtureTable table, FixtureMode mode)
      : table_(std::move(table)), mode_(mode) {
    for (const auto &[key, score] : table_) {
      try {
        ValidateScore(score);
      } catch (const Error &e) {
        Fail(ErrorCode::kInvalidArgument, "fixture entry (\"" + key.first +
                                              "\", \"" + key.second +
                                              "\"): " + e.what());
      }
    }
  }

  std::string Describe() const override {
    return std::string("fixture(") +
           (mode_ == FixtureMode::kStrict ? "strict" : "uniform-default") +
           ", " + std::to_string(table_.size()) + " entries)";
  }

 protected:
  std::vector<EntailmentScore> DoScoreBatch(
      std::span<const PremiseHypothesisPair> pairs) const override {
    std::vector<EntailmentScore> out;
    out.reserve(pairs.size());
    for (const PremiseHypothesisPair &pair : pairs) {
      auto it = table_.find({pair.premise, pair.hypothesis});
      if (it != table_.end()) {
        out.push_back(it->second);
      } else if (mode_ == FixtureMode::kStrict) {
        Fail(ErrorCode::kBackend, "fixture miss for hypothesis \"" +
                                      pair.hypothesis + "\"");
      } else {
        out.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      }
    }
    return out;
  }

 private:
  FixtureTable table_;
  FixtureMode mode_;
};

std::set<std::string_view> TokenSet(std::string_view text) {
  std::set<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.insert(text.substr(i, j - i));
    i = j;
  }
  return out;
}

class LexicalBackend : public Backend {
 public:
  std::string Describe() const override { return "lexical"; }

 protected:
  std::vector<EntailmentScore> DoScoreBatch(
      std::span<const PremiseHypothesisPair> pairs) const override {
    std::vector<EntailmentScore> out;
    out.reserve(pairs.size());
    for (const PremiseHypothesisPair &pair : pairs) {
      const auto premise = TokenSet(pair.premise);
      const auto hypothesis = TokenSet(pair.hypothesis);
      double entailment = 0.0;
      if (!hypothesis.empty()) {
        std::size_t shared = 0;
        for (std::string_view token : hypothesis) {
          shared += premise.count(token);
        }
        entailment = static_cast<double>(shared) /
                     static_cast<double>(hypothesis.size());
      }
      const double rest = (1.0 - entailment) / 2.0;
      out.push_back({entailment, rest, rest});
    }
    return out;
  }
};

}  // namespace

void ValidateScore(const EntailmentScore &score) {
  for (double p : {score.entailment, score.neutral, score.contradiction}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      Fail(ErrorCode::kBackend,
           "probability " + std::to_string(p) + " outside [0, 1]");
    }
  }
  const double sum = score.entailment + score.neutral + score.contradiction;
  if (std::abs(sum - 1.0) > kScoreSumTolerance) {
    std::ostringstream msg;
    msg << "probabilities sum to " << sum << ", expected 1";
    Fail(ErrorCode::kBackend, msg.str());
  }
}

std::vector<EntailmentScore> Backend::ScoreBatch(
    std::span<const PremiseHypothesisPair> pairs) const {
  if (pairs.empty()) Fail(ErrorCode::kInvalidArgument, "empty pair batch");
  for (const PremiseHypothesisPair &pair : pairs) {
    if (pair.premise.empty() || pair.hypothesis.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           "premise and hypothesis must be non-empty");
    }
  }
  std::vector<EntailmentScore> scores = DoScoreBatch(pairs);
  if (scores.size() != pairs.size()) {
    Fail(ErrorCode::kBackend, Describe() + " returned " +
                                  std::to_string(scores.size()) +
                                  " scores for " +
                                  std::to_string(pairs.size()) + " pairs");
  }
  for (const EntailmentScore &score : scores) ValidateScore(score);
  return scores;
}

std::shared_ptr<const Backend> MakeFixtureBackend(FixtureTable table,
                                                  FixtureMode mode) {
  return std::make_shared<FixtureBackend>(std::move(table), mode);
}

FixtureTable LoadFixtureTable(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open fixture file " + path.string());
  FixtureTable table;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      table[{j.at("premise").get<std::string>(),
             j.at("hypothesis").get<std::string>()}] =
          EntailmentScore{j.at("entailment").get<double>(),
                          j.at("neutral").get<double>(),
                          j.at("contradiction").get<double>()};
    } catch (const nlohmann::json::exception &e) {
      Fail(ErrorCode::kParse,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

std::shared_ptr<const Backend> MakeLexicalBackend() {
  return std::make_shared<LexicalBackend>();
}

std::vector<std::pair<std::size_t, std::size_t>> ChunkRanges(
    std::size_t total, std::size_t batch_size) {
  if (batch_size == 0) Fail(ErrorCode::kInvalidArgument, "batch size is 0");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < total; begin += batch_size) {
    out.emplace_back(begin, std::min(total, begin + batch_size));
  }
  return out;
}

std::shared_ptr<const Backend> OpenBackend(std::string_view uri,
                                           const BackendOptions &options) {
  const std::size_t colon = uri.find(':');
  if (colon == std::string_view::npos) {
    Fail(ErrorCode::kInvalidArgument,
         "backend must be fixture:<path>, lexical: or remote:<address>, got " +
             std::string(uri));
  }
  const std::string_view scheme = uri.substr(0, colon);
  const std::string rest(uri.substr(colon + 1));
  if (scheme == "fixture") {
    if (rest.empty()) Fail(ErrorCode::kInvalidArgument, "fixture: needs a path");
    return MakeFixtureBackend(LoadFixtureTable(rest), options.fixture_mode);
  }
  if (scheme == "lexical") return MakeLexicalBackend();
  if (scheme == "remote") {
    RemoteOptions remote;
    remote.endpoint = rest;
    remote.batch_size = options.batch_size;
    remote.timeout = options.timeout;
    remote.concurrency = options.concurrency;
    return MakeRemoteBackend(std::move(remote));
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown backend scheme " + std::string(scheme));
}

}  // namespace entailre
