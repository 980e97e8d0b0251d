#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "core/inference.h"
#include "core/schema.h"

namespace httplib {
class Server;
}

namespace entailre {

struct ServiceConfig {
  RelationSchema schema;
  // Where accepted template edits are persisted; empty keeps them in memory.
  std::filesystem::path schema_path;
  InferenceConfig inference;
};

// Request handling for the template-authoring service. The schema is an
// immutable snapshot swapped on every accepted write; readers never see a
// partial update.
class SchemaService {
 public:
  explicit SchemaService(ServiceConfig config);

  std::shared_ptr<const RelationSchema> Snapshot() const;
  std::uint64_t version() const;

  // Replaces the templates of `relation` if `expected_version` is current.
  // Throws Error(kConflict) otherwise. Returns the new version.
  std::uint64_t ReplaceTemplates(const std::string &relation,
                                 const std::vector<std::string> &patterns,
                                 std::uint64_t expected_version);

  // GET /schema, PUT /schema/{relation}/templates, POST /probe-template,
  // POST /classify-one.
  void Mount(httplib::Server &server);

 private:
  ServiceConfig config_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const RelationSchema> snapshot_;
  std::uint64_t version_ = 1;
  std::mutex write_mu_;
};

// Owns a listening HTTP server running on a background thread.
class HttpService {
 public:
  explicit HttpService(ServiceConfig config);
  ~HttpService();

  HttpService(const HttpService &) = delete;
  HttpService &operator=(const HttpService &) = delete;

  // Binds and starts serving. Port 0 picks a free port. Returns the port.
  int Start(const std::string &host, int port);
  void Stop();
  // Blocks until Stop() is called from elsewhere.
  void Wait();

  SchemaService &service() { return *service_; }

 private:
  std::unique_ptr<SchemaService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace entailre
