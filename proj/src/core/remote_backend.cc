#include <thread>

#include "core/error.h"
#include "core/nli_backend.h"
#include "core/parallel.h"
#include "httplib.h"
#include "json.hpp"

namespace entailre {
namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint ParseEndpoint(std::string address) {
  if (address.empty()) {
    Fail(ErrorCode::kInvalidArgument, "remote backend needs an address");
  }
  if (address.find("://") == std::string::npos) {
    address = "http://" + address;
  }
  if (address.rfind("http://", 0) != 0) {
    Fail(ErrorCode::kInvalidArgument,
         "unsupported remote scheme in " + address);
  }
  const std::size_t path_at = address.find('/', 7);
  Endpoint out;
  out.scheme_host_port = address.substr(0, path_at);
  std::string prefix =
      path_at == std::string::npos ? "" : address.substr(path_at);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  out.path = prefix + "/nli/score";
  if (out.scheme_host_port.size() <= 7) {
    Fail(ErrorCode::kInvalidArgument, "missing host in " + address);
  }
  return out;
}

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options)
      : options_(std::move(options)), endpoint_(ParseEndpoint(options_.endpoint)) {
    if (options_.batch_size == 0) {
      Fail(ErrorCode::kInvalidArgument, "remote batch size must be positive");
    }
    if (options_.max_attempts < 1) options_.max_attempts = 1;
    if (options_.concurrency < 1) options_.concurrency = 1;
  }

  std::string Describe() const override {
    return "remote(" + endpoint_.scheme_host_port + endpoint_.path +
           ", batch " + std::to_string(options_.batch_size) + ")";
  }

 protected:
  std::vector<EntailmentScore> DoScoreBatch(
      std::span<const PremiseHypothesisPair> pairs) const override {
    const auto chunks = ChunkRanges(pairs.size(), options_.batch_size);
    std::vector<EntailmentScore> out(pairs.size());
    ParallelFor(chunks.size(), options_.concurrency, [&](std::size_t c) {
      const auto [begin, end] = chunks[c];
      std::vector<EntailmentScore> scores =
          ScoreChunk(pairs.subspan(begin, end - begin), c);
      std::copy(scores.begin(), scores.end(), out.begin() + begin);
    });
    return out;
  }

 private:
  std::vector<EntailmentScore> ScoreChunk(
      std::span<const PremiseHypothesisPair> pairs, std::size_t chunk) const {
    nlohmann::json request;
    request["pairs"] = nlohmann::json::array();
    for (const PremiseHypothesisPair &pair : pairs) {
      request["pairs"].push_back(
          {{"premise", pair.premise}, {"hypothesis", pair.hypothesis}});
    }
    const std::string body = request.dump();
    const std::string where = "chunk " + std::to_string(chunk) + " (" +
                              endpoint_.scheme_host_port + endpoint_.path + ")";

    std::string last_failure;
    auto backoff = options_.initial_backoff;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client client(endpoint_.scheme_host_port);
      const auto seconds =
          std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
      const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
          options_.timeout - seconds);
      client.set_connection_timeout(seconds.count(), micros.count());
      client.set_read_timeout(seconds.count(), micros.count());
      client.set_write_timeout(seconds.count(), micros.count());

      auto res = client.Post(endpoint_.path, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_failure = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        Fail(ErrorCode::kBackend,
             where + ": HTTP " + std::to_string(res->status) + ": " +
                 res->body.substr(0, 200));
      }
      return ParseResponse(res->body, pairs.size(), where);
    }
    Fail(ErrorCode::kBackend, where + ": giving up after " +
                                  std::to_string(options_.max_attempts) +
                                  " attempts, last failure: " + last_failure);
  }

  static std::vector<EntailmentScore> ParseResponse(const std::string &body,
                                                    std::size_t expected,
                                                    const std::string &where) {
    std::vector<EntailmentScore> out;
    try {
      const nlohmann::json j = nlohmann::json::parse(body);
      const nlohmann::json &scores = j.at("scores");
      if (!scores.is_array() || scores.size() != expected) {
        Fail(ErrorCode::kBackend,
             where + ": malformed response, expected " +
                 std::to_string(expected) + " scores");
      }
      for (const nlohmann::json &s : scores) {
        EntailmentScore score{s.at("entailment").get<double>(),
                              s.at("neutral").get<double>(),
                              s.at("contradiction").get<double>()};
        ValidateScore(score);
        out.push_back(score);
      }
    } catch (const nlohmann::json::exception &e) {
      Fail(ErrorCode::kBackend, where + ": malformed response: " + e.what());
    } catch (const Error &e) {
      if (std::string_view(e.what()).rfind(where, 0) == 0) throw;
      Fail(ErrorCode::kBackend, where + ": malformed response: " + e.what());
    }
    return out;
  }

  RemoteOptions options_;
  Endpoint endpoint_;
};

}  // namespace

std::shared_ptr<const Backend> MakeRemoteBackend(RemoteOptions options) {
  return std::make_shared<RemoteBackend>(std::move(options));
}

}  // namespace entailre
