#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "speech3d/adapters/mock.hpp"

namespace httplib {
class Server;
}

namespace speech3d::adapters {

// Canned deviation for the next request on a route.
struct Fault {
  int status = 500;
  std::string body = "injected failure";
  std::chrono::milliseconds delay{0};  // applied before replying
  bool pass_through = false;           // only delay, then answer normally
};

// HTTP server speaking the backend wire protocol, answered by the mocks.
// Used for wire-conformance tests and `speech3d mock-backends`.
class BackendStubServer {
 public:
  explicit BackendStubServer(std::size_t embed_dimension = 384, MockGeneratorConfig gen = {});
  ~BackendStubServer();
  BackendStubServer(const BackendStubServer&) = delete;
  BackendStubServer& operator=(const BackendStubServer&) = delete;

  // Binds and serves on a background thread. port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string base_url() const;

  // Route is the path without a leading slash, e.g. "generate".
  void inject(const std::string& route, Fault fault);
  void inject_body(const std::string& route, std::string raw_json_body);
  void clear_faults();

  std::vector<std::pair<std::string, nlohmann::json>> requests() const;
  std::size_t request_count(const std::string& route) const;

 private:
  struct Canned {
    Fault fault;
    std::optional<std::string> body;  // 200 with this body
  };
  void install_routes();
  std::optional<Canned> next_fault(const std::string& route);

  Backends mocks_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<Canned>> faults_;
  std::vector<std::pair<std::string, nlohmann::json>> requests_;
};

}  // namespace speech3d::adapters
