#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entailre {

struct PremiseHypothesisPair {
  std::string premise;
  std::string hypothesis;
  std::optional<std::string> key;
};

struct EntailmentScore {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;

  bool operator==(const EntailmentScore &) const = default;
};

inline constexpr double kScoreSumTolerance = 1e-6;

// Components must lie in [0, 1] and sum to 1 within kScoreSumTolerance.
// Scores are never renormalized; a violation throws Error(kBackend).
void ValidateScore(const EntailmentScore &score);

// Scores (premise, hypothesis) pairs. Implementations must tolerate
// concurrent ScoreBatch calls.
class Backend {
 public:
  virtual ~Backend() = default;

  // One score per pair, in input order. Rejects empty input and empty texts,
  // and validates every returned triple.
  std::vector<EntailmentScore> ScoreBatch(
      std::span<const PremiseHypothesisPair> pairs) const;

  virtual std::string Describe() const = 0;

 protected:
  virtual std::vector<EntailmentScore> DoScoreBatch(
      std::span<const PremiseHypothesisPair> pairs) const = 0;
};

enum class FixtureMode { kStrict, kUniformDefault };

using FixtureTable =
    std::map<std::pair<std::string, std::string>, EntailmentScore>;

// Replays `table`. Misses return (1/3, 1/3, 1/3) or fail in strict mode.
std::shared_ptr<const Backend> MakeFixtureBackend(FixtureTable table,
                                                  FixtureMode mode);

// JSON lines: {"premise", "hypothesis", "entailment", "neutral",
// "contradiction"}.
FixtureTable LoadFixtureTable(const std::filesystem::path &path);

// entailment = |set(hyp tokens) & set(premise tokens)| / |set(hyp tokens)|,
// with the remainder split evenly between neutral and contradiction.
std::shared_ptr<const Backend> MakeLexicalBackend();

struct RemoteOptions {
  std::string endpoint;  // http://host:port[/prefix]
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  unsigned concurrency = 1;
};

// Client for POST <endpoint>/nli/score. Transport failures and 5xx replies
// are retried with exponential backoff; malformed payloads are not.
std::shared_ptr<const Backend> MakeRemoteBackend(RemoteOptions options);

// Splits `total` items into consecutive chunks of at most `batch_size`.
std::vector<std::pair<std::size_t, std::size_t>> ChunkRanges(
    std::size_t total, std::size_t batch_size);

struct BackendOptions {
  FixtureMode fixture_mode = FixtureMode::kUniformDefault;
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  unsigned concurrency = 1;
};

// "fixture:<path>", "lexical:" or "remote:<address>".
std::shared_ptr<const Backend> OpenBackend(std::string_view uri,
                                           const BackendOptions &options = {});

}  // namespace entailre
