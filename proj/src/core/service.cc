#include "core/service.h"

#include "core/dataset.h"
#include "core/error.h"
#include "httplib.h"
#include "json.hpp"

namespace entailre {
namespace {

constexpr const char *kVersionHeader = "X-Schema-Version";

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kBackend:
      return 502;
    default:
      return 500;
  }
}

void Reply(httplib::Response &res, int status, const nlohmann::json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response &res, int status, const std::string &msg) {
  Reply(res, status, {{"error", msg}});
}

// Wraps a handler so that core errors become HTTP statuses.
template <typename Fn>
httplib::Server::Handler Guarded(Fn fn) {
  return [fn](const httplib::Request &req, httplib::Response &res) {
    try {
      fn(req, res);
    } catch (const Error &e) {
      ReplyError(res, StatusFor(e.code()), e.what());
    } catch (const nlohmann::json::exception &e) {
      ReplyError(res, 400, std::string("malformed request: ") + e.what());
    } catch (const std::exception &e) {
      ReplyError(res, 500, e.what());
    }
  };
}

nlohmann::json ParseBody(const httplib::Request &req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, std::string("request body is not JSON: ") + e.what());
  }
}

nlohmann::json SchemaToJson(const RelationSchema &schema,
                            std::uint64_t version) {
  nlohmann::json j;
  j["version"] = std::to_string(version);
  j["negative_label"] = schema.negative_label();
  j["norel_template"] = schema.norel_template()
                            ? nlohmann::json(schema.norel_template()->pattern)
                            : nlohmann::json(nullptr);
  nlohmann::json relations = nlohmann::json::object();
  for (const auto &[label, entry] : schema.relations()) {
    nlohmann::json templates = nlohmann::json::array();
    for (const Template &t : entry.templates) templates.push_back(t.pattern);
    relations[label] = {{"templates", templates},
                        {"subj_types", entry.subj_types},
                        {"obj_types", entry.obj_types}};
  }
  j["relations"] = std::move(relations);
  return j;
}

void ReplySchema(const httplib::Request &req, httplib::Response &res,
                 const RelationSchema &schema, std::uint64_t version) {
  res.set_header(kVersionHeader, std::to_string(version));
  res.set_header("ETag", "\"" + std::to_string(version) + "\"");
  if (req.get_param_value("format") == "json") {
    Reply(res, 200, SchemaToJson(schema, version));
  } else {
    res.status = 200;
    res.set_content(SerializeSchema(schema), "application/yaml");
  }
}

std::uint64_t ParseVersion(std::string token) {
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    token = token.substr(1, token.size() - 2);
  }
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception &) {
  }
  Fail(ErrorCode::kInvalidArgument, "malformed version token " + token);
}

}  // namespace

SchemaService::SchemaService(ServiceConfig config)
    : config_(std::move(config)),
      snapshot_(std::make_shared<const RelationSchema>(config_.schema)) {
  if (!config_.inference.backend) {
    Fail(ErrorCode::kInvalidArgument, "service needs a scoring backend");
  }
}

std::shared_ptr<const RelationSchema> SchemaService::Snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

std::uint64_t SchemaService::version() const {
  std::lock_guard lock(snapshot_mu_);
  return version_;
}

std::uint64_t SchemaService::ReplaceTemplates(
    const std::string &relation, const std::vector<std::string> &patterns,
    std::uint64_t expected_version) {
  std::lock_guard write_lock(write_mu_);
  const auto current = Snapshot();
  const std::uint64_t current_version = version();
  if (expected_version != current_version) {
    Fail(ErrorCode::kConflict,
         "schema version is " + std::to_string(current_version) + ", not " +
             std::to_string(expected_version));
  }
  auto next = std::make_shared<const RelationSchema>(
      current->WithTemplates(relation, patterns));
  if (!config_.schema_path.empty()) {
    SaveSchemaAtomic(*next, config_.schema_path);
  }
  std::lock_guard lock(snapshot_mu_);
  snapshot_ = std::move(next);
  return ++version_;
}

void SchemaService::Mount(httplib::Server &server) {
  server.set_default_headers(
      {{"Access-Control-Allow-Origin", "*"},
       {"Access-Control-Allow-Headers", "Content-Type, If-Match"},
       {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
       {"Access-Control-Expose-Headers", kVersionHeader}});
  server.Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });

  server.Get("/schema", Guarded([this](const httplib::Request &req,
                                       httplib::Response &res) {
               std::shared_ptr<const RelationSchema> schema;
               std::uint64_t version;
               {
                 std::lock_guard lock(snapshot_mu_);
                 schema = snapshot_;
                 version = version_;
               }
               ReplySchema(req, res, *schema, version);
             }));

  server.Put(R"(/schema/(.+)/templates)",
             Guarded([this](const httplib::Request &req,
                            httplib::Response &res) {
               const std::string relation = req.matches[1];
               const nlohmann::json body = ParseBody(req);
               std::string token;
               if (req.has_header("If-Match")) {
                 token = req.get_header_value("If-Match");
               } else if (body.contains("version")) {
                 token = body["version"].is_string()
                             ? body["version"].get<std::string>()
                             : body["version"].dump();
               } else {
                 Fail(ErrorCode::kInvalidArgument,
                      "version token required (If-Match or body.version)");
               }
               const auto patterns =
                   body.at("templates").get<std::vector<std::string>>();
               const std::uint64_t version =
                   ReplaceTemplates(relation, patterns, ParseVersion(token));
               ReplySchema(req, res, *Snapshot(), version);
             }));

  server.Post("/probe-template", Guarded([this](const httplib::Request &req,
                                                httplib::Response &res) {
                const nlohmann::json body = ParseBody(req);
                const std::string pattern = body.at("template").get<std::string>();
                ValidateTemplatePattern(pattern);
                const nlohmann::json &probes = body.at("examples");
                if (!probes.is_array() || probes.empty()) {
                  Fail(ErrorCode::kInvalidArgument,
                       "at least one probe example is required");
                }
                const auto schema = Snapshot();
                std::vector<PremiseHypothesisPair> pairs;
                for (const nlohmann::json &record : probes) {
                  const RelationExample e =
                      ExampleFromTacred(record, schema->negative_label());
                  pairs.push_back({PremiseOf(e),
                                   Verbalize(pattern,
                                             MentionText(e, Argument::kSubject),
                                             MentionText(e, Argument::kObject)),
                                   e.id});
                }
                const auto scores = config_.inference.backend->ScoreBatch(pairs);
                nlohmann::json out;
                out["relation"] = body.value("relation", "");
                out["template"] = pattern;
                out["scores"] = nlohmann::json::array();
                for (std::size_t i = 0; i < scores.size(); ++i) {
                  out["scores"].push_back({{"id", pairs[i].key.value_or("")},
                                           {"hypothesis", pairs[i].hypothesis},
                                           {"entailment", scores[i].entailment},
                                           {"neutral", scores[i].neutral},
                                           {"contradiction",
                                            scores[i].contradiction}});
                }
                Reply(res, 200, out);
              }));

  server.Post("/classify-one", Guarded([this](const httplib::Request &req,
                                              httplib::Response &res) {
                const auto schema = Snapshot();
                InferenceConfig config = config_.inference;
                if (req.has_param("threshold")) {
                  try {
                    config.threshold = std::stod(req.get_param_value("threshold"));
                  } catch (const std::exception &) {
                    Fail(ErrorCode::kInvalidArgument,
                         "threshold must be a number");
                  }
                }
                const RelationExample example =
                    ExampleFromTacred(ParseBody(req), schema->negative_label());
                Reply(res, 200,
                      PredictionToJson(Classify(example, *schema, config), true));
              }));
}

HttpService::HttpService(ServiceConfig config)
    : service_(std::make_unique<SchemaService>(std::move(config))),
      server_(std::make_unique<httplib::Server>()) {
  service_->Mount(*server_);
}

HttpService::~HttpService() { Stop(); }

int HttpService::Start(const std::string &host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    Fail(ErrorCode::kIo,
         "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpService::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpService::Wait() {
  if (thread_.joinable()) thread_.join();
}

}  // namespace entailre
