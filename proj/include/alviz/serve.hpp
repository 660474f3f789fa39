#pragma once

#include "alviz/al_engine.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace alviz::serve {

inline constexpr std::size_t kMaxChangeIndices = 512;

// Loaded artifacts keyed by run id (file stem). Immutable once serving.
class ServiceState {
 public:
  void add(std::string run_id, RunArtifact artifact);
  static ServiceState load(std::span<const std::filesystem::path> paths);

  const RunArtifact* find(std::string_view run_id) const;
  const std::map<std::string, RunArtifact, std::less<>>& runs() const { return runs_; }

 private:
  std::map<std::string, RunArtifact, std::less<>> runs_;
};

struct Response {
  int status = 200;
  std::string body;  // always JSON
};

using Params = std::map<std::string, std::string, std::less<>>;

// Handlers are pure functions of (state, request).
Response list_runs(const ServiceState& state);
Response embedding(const ServiceState& state, std::string_view run_id);
Response selection(const ServiceState& state, std::string_view run_id, std::string_view body);
Response change(const ServiceState& state, std::string_view run_id, const Params& params);
Response mse(const ServiceState& state, std::string_view run_id);
Response query_histogram(const ServiceState& state, std::string_view run_id, const Params& params);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";  // empty disables the header
  std::optional<std::filesystem::path> static_dir;
};

// Registers every /api route plus `/` on the server. `state` must outlive it.
void install_routes(httplib::Server& server, const ServiceState& state, const ServeOptions& options);

}  // namespace alviz::serve
